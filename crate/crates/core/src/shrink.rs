//! MAP and MMSE coefficient shrinkage under the unitary model.
//!
//! With a unitary dictionary the posterior over supports factorizes per
//! atom. Everything is driven by two per-atom quantities:
//!
//! * the shrinkage gain `c2[k] = sigma_x[k]^2 / (sigma_x[k]^2 + sigma^2)`,
//! * the posterior log-odds of atom `k` being active,
//!   `log_q[k] = c2[k] * beta[k]^2 / (2 sigma^2) + ln G[k]`, where
//!   `G[k] = sqrt(1 - c2[k]) * p[k] / (1 - p[k])`.
//!
//! The oracle estimator (support known) scales each on-support coefficient
//! by its gain. MAP keeps an atom exactly when `q[k] > 1` (a hard
//! threshold on `|beta[k]|`) and then applies the oracle scaling. MMSE
//! blends: each coefficient is scaled by `g[k] * c2[k]` where
//! `g[k] = q[k] / (1 + q[k])` is the posterior inclusion probability.
//!
//! `g` is evaluated as a logistic of `log_q`, never through `q` itself, so
//! nothing overflows for large coefficients.

use crate::model::{Coeffs, Estimate, ModelParams, SupportMask};

/// Which posterior point estimate to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Map,
    Mmse,
}

/// `1 / (1 + exp(-t))`, safe across the whole f64 range.
pub(crate) fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Per-atom quantities shared by the shrinkage rules, the risk formulas,
/// and the bound machinery. Building one costs `O(m)`.
#[derive(Debug, Clone)]
pub struct ShrinkageInputs {
    beta: Vec<f64>,
    c2: Vec<f64>,
    log_q: Vec<f64>,
    sigma: f64,
}

impl ShrinkageInputs {
    pub fn new(beta: &[f64], params: &ModelParams) -> Self {
        assert_eq!(beta.len(), params.len(), "beta/params length mismatch");
        let c2 = params.c2();
        let ln_g = params.ln_g_factor();
        let two_s2 = 2.0 * params.sigma() * params.sigma();
        let log_q = beta
            .iter()
            .zip(c2.iter().zip(&ln_g))
            .map(|(&b, (&c2k, &lg))| c2k * b * b / two_s2 + lg)
            .collect();
        ShrinkageInputs { beta: beta.to_vec(), c2, log_q, sigma: params.sigma() }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn c2(&self) -> &[f64] {
        &self.c2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Posterior log-odds of atom `k` being active.
    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    /// Posterior inclusion probability of atom `k`.
    pub fn g(&self, k: usize) -> f64 {
        sigmoid(self.log_q[k])
    }

    /// `1 - g(k)` computed directly (no cancellation when `g` is near 1).
    pub fn one_minus_g(&self, k: usize) -> f64 {
        sigmoid(-self.log_q[k])
    }

    /// MAP inclusion rule: strictly positive log-odds. A tie (`q = 1`
    /// exactly) excludes the atom.
    pub fn map_includes(&self, k: usize) -> bool {
        self.log_q[k] > 0.0
    }
}

/// Scales the on-support coefficients by their gains; off-support entries
/// are exactly zero. This is the conditional posterior mean given the
/// true support.
pub fn oracle_estimate(beta: &Coeffs, support: &SupportMask, params: &ModelParams) -> Estimate {
    assert_eq!(beta.len(), params.len(), "beta/params length mismatch");
    assert_eq!(support.len(), params.len(), "support/params length mismatch");
    let c2 = params.c2();
    let xhat = beta
        .iter()
        .zip(support.iter().zip(&c2))
        .map(|(&b, (&on, &c2k))| if on { c2k * b } else { 0.0 })
        .collect();
    Estimate { xhat: Coeffs(xhat), support: Some(support.clone()) }
}

/// Hard-threshold estimator: keeps atom `k` iff its posterior odds exceed
/// one, then applies the oracle scaling on the kept set.
pub fn map_shrink(beta: &Coeffs, params: &ModelParams) -> Estimate {
    let inputs = ShrinkageInputs::new(beta, params);
    let mut xhat = vec![0.0; inputs.len()];
    let mut mask = vec![false; inputs.len()];
    for k in 0..inputs.len() {
        if inputs.map_includes(k) {
            mask[k] = true;
            xhat[k] = inputs.c2[k] * beta[k];
        }
    }
    Estimate { xhat: Coeffs(xhat), support: Some(SupportMask(mask)) }
}

/// Posterior-mean estimator: `xhat[k] = g[k] * c2[k] * beta[k]`.
pub fn mmse_shrink(beta: &Coeffs, params: &ModelParams) -> Estimate {
    let inputs = ShrinkageInputs::new(beta, params);
    let xhat = (0..inputs.len()).map(|k| inputs.g(k) * inputs.c2[k] * beta[k]).collect();
    Estimate { xhat: Coeffs(xhat), support: None }
}

/// The MAP inclusion threshold on `|beta|` for a single atom: zero when
/// `G >= 1` (the atom is always kept), otherwise
/// `(sqrt(2) * sigma / c) * sqrt(ln(1/G))`.
pub fn map_threshold(p: f64, sigma_x: f64, sigma: f64) -> f64 {
    let params = ModelParams::new(vec![p], vec![sigma_x], sigma).expect("single-atom params");
    let ln_g = params.ln_g_factor()[0];
    if ln_g >= 0.0 {
        return 0.0;
    }
    let c2 = params.c2()[0];
    (2.0 * sigma * sigma * (-ln_g) / c2).sqrt()
}

/// Samples the scalar shrinkage rule of one atom over a grid of
/// coefficient values. Returns `(beta, psi(beta))` pairs.
pub fn shrinkage_curve(
    estimator: Estimator,
    p: f64,
    sigma_x: f64,
    sigma: f64,
    grid: &[f64],
) -> Vec<(f64, f64)> {
    let params = ModelParams::new(vec![p], vec![sigma_x], sigma).expect("single-atom params");
    grid.iter()
        .map(|&b| {
            let beta = Coeffs(vec![b]);
            let est = match estimator {
                Estimator::Map => map_shrink(&beta, &params),
                Estimator::Mmse => mmse_shrink(&beta, &params),
            };
            (b, est.xhat[0])
        })
        .collect()
}
