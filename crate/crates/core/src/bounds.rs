//! Worst-case bounds on the excess risk over the posterior-oracle risk.
//!
//! Writing the conditional risk of MMSE or MAP as `MSE1 + MSE2`, where
//! `MSE1 = sum_k c2[k] sigma^2 g[k]` is the posterior-expected oracle risk
//! and `MSE2` collects the support-uncertainty penalty, the ratio
//! `MSE2 / MSE1` admits a bound that depends on the observation only
//! through `s[k] = c2[k] beta[k]^2 / (2 sigma^2)` and on the model only
//! through the smallest prior odds factor `G_m = min_k G[k]`:
//!
//! * MMSE: `f(s) = 2s / (1 + G_m e^s)`, maximized at the root of
//!   `G_m e^s (s - 1) = 1`;
//! * MAP: `f(s) = 2s` while `G_m e^s < 1` (atom dropped) and
//!   `2s / (G_m e^s)` past the threshold, maximized at `s = ln(1/G_m)`
//!   when `G_m < 1/e` and at `s = 1` otherwise.
//!
//! Both maxima also have explicit closed-form upper bounds with a regime
//! switch; for MAP the explicit form is the maximum itself. When all
//! atoms share one `G`, the bound is attained by setting every `|beta[k]|`
//! to `sigma * sqrt(2 s_star) / c`, which the tests verify numerically.

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Coeffs, ModelParams};
use crate::shrink::{Estimator, ShrinkageInputs};

/// Which side of the switch point an explicit bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `G` below the switch: the logarithmic branch.
    SmallG,
    /// `G` at or above the switch: the exponential branch.
    LargeG,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SmallG => "small-g",
            Regime::LargeG => "large-g",
        })
    }
}

/// Location and value of the worst-case ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstRatio {
    /// Argmax in the `s` variable.
    pub s_star: f64,
    /// The maximal `MSE2 / MSE1` ratio.
    pub r_star: f64,
}

/// Prior odds factor `G = sqrt(1 - c2) * p / (1 - p)` of a single atom.
pub fn g_factor(p: f64, sigma_x: f64, sigma: f64) -> Result<f64> {
    let params = ModelParams::new(vec![p], vec![sigma_x], sigma)?;
    Ok(params.ln_g_factor()[0].exp())
}

fn check_g(g_m: f64) -> Result<()> {
    if !(g_m > 0.0 && g_m.is_finite()) {
        return Err(Error::InvalidParams(format!("odds factor {g_m} must be positive and finite")));
    }
    Ok(())
}

/// MMSE worst case: maximizes `2s / (1 + G e^s)` over `s >= 0`.
pub fn worst_ratio_mmse(g_m: f64) -> Result<WorstRatio> {
    check_g(g_m)?;
    // Stationary point: G e^s (s - 1) = 1, a strictly increasing function
    // of s past 1, so plain bisection is exact enough and never fails.
    let h = |s: f64| g_m * s.exp() * (s - 1.0) - 1.0;
    let mut lo = 1.0f64;
    let mut hi = 2.0f64.max((1.0 / g_m).ln() + 10.0);
    if h(hi) <= 0.0 {
        return Err(Error::NoConvergence { context: "MMSE worst-ratio bracket" });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s_star = 0.5 * (lo + hi);
    Ok(WorstRatio { s_star, r_star: 2.0 * s_star / (1.0 + g_m * s_star.exp()) })
}

/// Closed-form upper bound on the MMSE worst case, with its regime. The
/// branches agree (both equal 4) at the switch `G = 1/(4 e^2)`.
pub fn explicit_bound_mmse(g_m: f64) -> Result<(f64, Regime)> {
    check_g(g_m)?;
    let switch = 0.25 * (-2.0f64).exp();
    Ok(if g_m < switch {
        (2.0 * (1.0 / (4.0 * g_m)).ln(), Regime::SmallG)
    } else {
        (2.0 / (g_m.sqrt() * std::f64::consts::E), Regime::LargeG)
    })
}

/// MAP worst case: maximizes the piecewise ratio `2s` (below the inclusion
/// threshold) / `2s / (G e^s)` (above). Closed form, no solver.
pub fn worst_ratio_map(g_m: f64) -> Result<WorstRatio> {
    check_g(g_m)?;
    Ok(if g_m < (-1.0f64).exp() {
        let s_star = (1.0 / g_m).ln();
        WorstRatio { s_star, r_star: 2.0 * s_star }
    } else {
        WorstRatio { s_star: 1.0, r_star: 2.0 / (g_m * std::f64::consts::E) }
    })
}

/// Same values as [`worst_ratio_map`] (for MAP the explicit form is exact,
/// not just a bound), reported with the regime of the switch at `1/e`.
pub fn explicit_bound_map(g_m: f64) -> Result<(f64, Regime)> {
    let w = worst_ratio_map(g_m)?;
    let regime = if g_m < (-1.0f64).exp() { Regime::SmallG } else { Regime::LargeG };
    Ok((w.r_star, regime))
}

/// The realized `MSE2 / MSE1` ratio of an estimator at one observation.
/// Zero when the observation carries no support-uncertainty penalty.
pub fn risk_ratio(beta: &Coeffs, params: &ModelParams, estimator: Estimator) -> f64 {
    let inputs = ShrinkageInputs::new(beta, params);
    let s2 = params.sigma() * params.sigma();
    let mut mse1 = Vec::with_capacity(inputs.len());
    let mut mse2 = Vec::with_capacity(inputs.len());
    for k in 0..inputs.len() {
        let g = inputs.g(k);
        let c2 = inputs.c2()[k];
        let b2 = inputs.beta()[k] * inputs.beta()[k];
        mse1.push(c2 * s2 * g);
        let factor = match estimator {
            Estimator::Mmse => g * inputs.one_minus_g(k),
            Estimator::Map => {
                if inputs.map_includes(k) {
                    inputs.one_minus_g(k)
                } else {
                    g
                }
            }
        };
        mse2.push(c2 * c2 * b2 * factor);
    }
    let denom = exec::compensated_sum(mse1);
    let numer = exec::compensated_sum(mse2);
    if numer == 0.0 {
        return 0.0;
    }
    numer / denom
}

/// Smallest odds factor across the atoms of `params`.
pub fn min_g_factor(params: &ModelParams) -> f64 {
    params.ln_g_factor().iter().fold(f64::INFINITY, |a, &b| a.min(b)).exp()
}
