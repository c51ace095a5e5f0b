//! Per-band parameter estimation from noisy coefficients.
//!
//! Within one band the coefficients are treated as i.i.d. draws from the
//! two-group model: with probability `p` a coefficient is signal plus noise,
//! `N(0, sigma_x^2 + sigma^2)`, otherwise pure noise `N(0, sigma^2)`. For a
//! candidate active count `k` the most plausible active set is the `k`
//! largest magnitudes, the activity rate is profiled as `k / n`, and the
//! signal variance as the excess energy of that set. Scanning `k` from `0`
//! to `n` with prefix sums costs one sort per band.
//!
//! The objective for active count `k` (up to a `k`-independent constant) is
//!
//! ```text
//! f(k) = -(k/2) ln((s2 + sigma^2) / sigma^2)
//!        + k ln(k/n) + (n - k) ln(1 - k/n)
//!        + E_k s2 / (2 sigma^2 (s2 + sigma^2))
//!        - lambda k
//! ```
//!
//! where `E_k` is the energy of the `k` largest coefficients,
//! `s2 = max(E_k / k - sigma^2, floor)` is the profiled signal variance, and
//! `lambda >= 0` is an optional sparsity surcharge. `f(0) = 0` by
//! convention, and the `(n - k) ln(1 - k/n)` term is `0` at `k = n`.
//!
//! Bands with `k* = 0` are reported as inactive with clamped-down
//! parameters rather than a degenerate `p = 0`, so the result is always a
//! valid model.

use crate::dict::BandLayout;
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Coeffs, ModelParams};

/// Activity probability assigned to bands where nothing is detected, and
/// the ceiling `1 - MIN_ACTIVITY` applied to fully active bands.
pub const MIN_ACTIVITY: f64 = 1e-6;

/// Signal standard deviation of an inactive band, as a multiple of the
/// noise level. Also floors the profiled variance of active bands.
pub const SIGMA_X_FLOOR_FACTOR: f64 = 1e-6;

/// Per-band sparsity surcharges, aligned with a [`BandLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSchedule {
    per_band: Vec<f64>,
}

impl LambdaSchedule {
    /// Halves the surcharge per wavelet level away from the coarsest: the
    /// approximation and coarsest detail bands get `lambda0`, the finest
    /// details get `lambda0 / 2^(levels - 1)`. A single-band layout gets
    /// `lambda0` as-is.
    pub fn default_for(layout: &BandLayout, lambda0: f64) -> Result<Self> {
        if lambda0 < 0.0 || !lambda0.is_finite() {
            return Err(Error::InvalidParams(format!("lambda0 must be finite and >= 0, got {lambda0}")));
        }
        let levels = layout.levels() as i32;
        let per_band = layout
            .bands()
            .iter()
            .map(|band| lambda0 * f64::exp2((band.level as i32 - levels) as f64))
            .collect();
        Ok(LambdaSchedule { per_band })
    }

    /// No surcharge anywhere: pure profile likelihood.
    pub fn zero(layout: &BandLayout) -> Self {
        LambdaSchedule { per_band: vec![0.0; layout.bands().len()] }
    }

    /// The same surcharge for every band.
    pub fn uniform(layout: &BandLayout, lambda: f64) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(LambdaSchedule { per_band: vec![lambda; layout.bands().len()] })
    }

    pub fn values(&self) -> &[f64] {
        &self.per_band
    }
}

/// Fitted two-group parameters for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEstimate {
    /// Band identifier from the layout ("all" for a single-band fit).
    pub id: String,
    /// Number of coefficients in the band.
    pub atoms: usize,
    /// Selected active count.
    pub k_star: usize,
    /// Estimated activity probability, clamped to `(0, 1)`.
    pub p_hat: f64,
    /// Estimated on-support standard deviation.
    pub sigma_x_hat: f64,
    /// Objective value at `k_star`.
    pub objective: f64,
}

/// Objective for explaining the `k` largest of the band's coefficients as
/// active atoms. `sorted_beta_sq` holds every squared coefficient of the
/// band, sorted descending.
pub fn band_objective(k: usize, sorted_beta_sq: &[f64], sigma: f64, lambda: f64) -> f64 {
    debug_assert!(sorted_beta_sq.windows(2).all(|w| w[0] >= w[1]), "energies must be sorted descending");
    let top_k_energy = sorted_beta_sq[..k].iter().sum();
    band_objective_from_energy(k, top_k_energy, sorted_beta_sq.len(), sigma, lambda)
}

/// Same objective, parameterized by the energy of the chosen `k` atoms;
/// lets callers score arbitrary candidate sets, not just top-`k` ones.
pub fn band_objective_from_energy(k: usize, top_k_energy: f64, n: usize, sigma: f64, lambda: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let sigma2 = sigma * sigma;
    let s2 = profiled_variance(k, top_k_energy, sigma);
    let kf = k as f64;
    let nf = n as f64;
    let fit = -0.5 * kf * ((s2 + sigma2) / sigma2).ln() + top_k_energy * s2 / (2.0 * sigma2 * (s2 + sigma2));
    let on = kf * (kf / nf).ln();
    let off = if k == n { 0.0 } else { (nf - kf) * (((n - k) as f64) / nf).ln() };
    fit + on + off - lambda * kf
}

fn profiled_variance(k: usize, top_k_energy: f64, sigma: f64) -> f64 {
    let floor = SIGMA_X_FLOOR_FACTOR * sigma;
    (top_k_energy / k as f64 - sigma * sigma).max(floor * floor)
}

/// Fits one band by scanning every active count. Ties pick the smallest
/// `k`, and `k* = 0` yields a clamped-down inactive estimate.
pub fn estimate_band(beta: &[f64], sigma: f64, lambda: f64) -> Result<BandEstimate> {
    fit_band("all".into(), beta, sigma, lambda)
}

fn fit_band(id: String, beta: &[f64], sigma: f64, lambda: f64) -> Result<BandEstimate> {
    let n = beta.len();
    if n == 0 {
        return Err(Error::InvalidParams("cannot estimate an empty band".into()));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParams(format!("sigma must be finite and > 0, got {sigma}")));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("coefficients must be finite".into()));
    }
    let mut energies: Vec<f64> = beta.iter().map(|&b| b * b).collect();
    energies.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite energies"));

    let mut best_k = 0usize;
    let mut best_obj = 0.0;
    let mut prefix = 0.0;
    for k in 1..=n {
        prefix += energies[k - 1];
        let obj = band_objective_from_energy(k, prefix, n, sigma, lambda);
        if obj > best_obj {
            best_obj = obj;
            best_k = k;
        }
    }

    let (p_hat, sigma_x_hat) = if best_k == 0 {
        (MIN_ACTIVITY, SIGMA_X_FLOOR_FACTOR * sigma)
    } else {
        let top: f64 = energies[..best_k].iter().sum();
        let p = (best_k as f64 / n as f64).clamp(MIN_ACTIVITY, 1.0 - MIN_ACTIVITY);
        (p, profiled_variance(best_k, top, sigma).sqrt())
    };
    Ok(BandEstimate { id, atoms: n, k_star: best_k, p_hat, sigma_x_hat, objective: best_obj })
}

/// Fits every band of a layout independently (in parallel when enabled).
pub fn estimate_bands(
    beta: &Coeffs,
    layout: &BandLayout,
    sigma: f64,
    schedule: &LambdaSchedule,
) -> Result<Vec<BandEstimate>> {
    if beta.len() != layout.coeff_len() {
        return Err(Error::DimensionMismatch { expected: layout.coeff_len(), got: beta.len() });
    }
    if schedule.per_band.len() != layout.bands().len() {
        return Err(Error::DimensionMismatch { expected: layout.bands().len(), got: schedule.per_band.len() });
    }
    let results = exec::indexed_map(layout.bands().len(), |b| {
        let band = &layout.bands()[b];
        let values: Vec<f64> = band.indices.iter().map(|&i| beta[i]).collect();
        fit_band(band.id.clone(), &values, sigma, schedule.per_band[b])
    });
    results.into_iter().collect()
}

/// Fits every band and expands the result to per-atom model parameters.
pub fn estimate_params(
    beta: &Coeffs,
    layout: &BandLayout,
    sigma: f64,
    schedule: &LambdaSchedule,
) -> Result<ModelParams> {
    let fits = estimate_bands(beta, layout, sigma, schedule)?;
    let mut p = vec![0.0; layout.coeff_len()];
    let mut sigma_x = vec![0.0; layout.coeff_len()];
    for (band, fit) in layout.bands().iter().zip(&fits) {
        for &i in &band.indices {
            p[i] = fit.p_hat;
            sigma_x[i] = fit.sigma_x_hat;
        }
    }
    ModelParams::new(p, sigma_x, sigma)
}
