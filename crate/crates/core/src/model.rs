//! The Bernoulli-Gaussian signal model and its domain types.
//!
//! A coefficient vector of length `m` is generated in two stages: atom `k`
//! joins the support with probability `p[k]` (independent coins), and each
//! on-support coefficient is drawn `N(0, sigma_x[k]^2)`. Off-support
//! coefficients are exactly zero. The observation is the dictionary
//! synthesis of the coefficients plus white Gaussian noise of standard
//! deviation `sigma`.
//!
//! Per-atom activity probabilities and coefficient scales make the
//! heteroscedastic case the primary citizen; a shared scalar value is the
//! homoscedastic special case (see [`ModelParams::iid`]).

use std::ops::{Deref, DerefMut};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dict::{BandLayout, Dictionary};
use crate::error::{Error, Result};
use crate::rng::{self, StreamTag};

/// Coefficient vector in the dictionary domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs(pub Vec<f64>);

impl Coeffs {
    pub fn zeros(m: usize) -> Self {
        Coeffs(vec![0.0; m])
    }
}

impl Deref for Coeffs {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Coeffs {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Coeffs {
    fn from(values: Vec<f64>) -> Self {
        Coeffs(values)
    }
}

/// Signal-domain vector, optionally carrying 2-D shape `(rows, cols)` in
/// row-major order for image dictionaries and image I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub values: Vec<f64>,
    pub shape: Option<(usize, usize)>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Self {
        Signal { values, shape: None }
    }

    /// Row-major image; errors if `rows * cols` disagrees with the data.
    pub fn image(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: values.len() });
        }
        Ok(Signal { values, shape: Some((rows, cols)) })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which atoms are active.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask(pub Vec<bool>);

impl SupportMask {
    pub fn empty(m: usize) -> Self {
        SupportMask(vec![false; m])
    }

    /// Number of active atoms.
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Indices of active atoms in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
    }
}

impl Deref for SupportMask {
    type Target = [bool];
    fn deref(&self) -> &[bool] {
        &self.0
    }
}

/// A point estimate of the coefficients, with the chosen support when the
/// estimator commits to one (MAP and oracle do, MMSE does not).
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub xhat: Coeffs,
    pub support: Option<SupportMask>,
}

/// Prior and noise parameters. All probabilities are strictly inside
/// `(0, 1)` and all scales strictly positive; the constructors enforce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    p: Vec<f64>,
    sigma_x: Vec<f64>,
    sigma: f64,
}

impl ModelParams {
    /// Per-atom activity probabilities and coefficient scales plus the
    /// shared noise standard deviation.
    pub fn new(p: Vec<f64>, sigma_x: Vec<f64>, sigma: f64) -> Result<Self> {
        if p.len() != sigma_x.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: sigma_x.len() });
        }
        if p.is_empty() {
            return Err(Error::InvalidParams("at least one atom required".into()));
        }
        if let Some(bad) = p.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::InvalidParams(format!("activity probability {bad} outside (0, 1)")));
        }
        if let Some(bad) = sigma_x.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams(format!("coefficient scale {bad} must be positive")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("noise scale {sigma} must be positive")));
        }
        Ok(ModelParams { p, sigma_x, sigma })
    }

    /// Homoscedastic shorthand: every atom shares one probability and one
    /// coefficient scale.
    pub fn iid(m: usize, p: f64, sigma_x: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![p; m], vec![sigma_x; m], sigma)
    }

    /// Expands per-band values over a band layout: every atom in band `i`
    /// gets `band_p[i]` and `band_sigma_x[i]`.
    pub fn from_bands(
        layout: &BandLayout,
        band_p: &[f64],
        band_sigma_x: &[f64],
        sigma: f64,
    ) -> Result<Self> {
        if band_p.len() != layout.bands().len() {
            return Err(Error::DimensionMismatch { expected: layout.bands().len(), got: band_p.len() });
        }
        if band_sigma_x.len() != layout.bands().len() {
            return Err(Error::DimensionMismatch { expected: layout.bands().len(), got: band_sigma_x.len() });
        }
        let m = layout.coeff_len();
        let mut p = vec![0.0; m];
        let mut sigma_x = vec![0.0; m];
        for (band, (&bp, &bs)) in layout.bands().iter().zip(band_p.iter().zip(band_sigma_x)) {
            for &idx in &band.indices {
                p[idx] = bp;
                sigma_x[idx] = bs;
            }
        }
        Self::new(p, sigma_x, sigma)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn sigma_x(&self) -> &[f64] {
        &self.sigma_x
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Per-atom shrinkage gain `c2[k] = sigma_x[k]^2 / (sigma_x[k]^2 + sigma^2)`.
    pub fn c2(&self) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        self.sigma_x.iter().map(|&sx| sx * sx / (sx * sx + s2)).collect()
    }

    /// Per-atom `1 - c2[k]`, computed as `sigma^2 / (sigma_x[k]^2 + sigma^2)`
    /// so no cancellation occurs when the gain is close to one.
    pub fn one_minus_c2(&self) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        self.sigma_x.iter().map(|&sx| s2 / (sx * sx + s2)).collect()
    }

    /// Per-atom prior odds factor `G[k] = sqrt(1 - c2[k]) * p[k] / (1 - p[k])`,
    /// in log form (`ln G` stays finite over the whole admissible range).
    pub fn ln_g_factor(&self) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        self.p
            .iter()
            .zip(&self.sigma_x)
            .map(|(&p, &sx)| 0.5 * (s2.ln() - (sx * sx + s2).ln()) + p.ln() - (-p).ln_1p())
            .collect()
    }
}

/// Draws a support: independent coin flips with the per-atom probabilities.
pub fn sample_support(params: &ModelParams, seed: u64) -> SupportMask {
    let mut rng = rng::stream(seed, StreamTag::Support, 0);
    SupportMask(params.p().iter().map(|&p| rng.gen::<f64>() < p).collect())
}

/// Draws coefficients for a given support: on-support atoms get
/// `N(0, sigma_x[k]^2)`, the rest are exactly zero.
pub fn sample_coefficients(params: &ModelParams, support: &SupportMask, seed: u64) -> Coeffs {
    assert_eq!(support.len(), params.len(), "support/params length mismatch");
    let mut rng = rng::stream(seed, StreamTag::Coefficients, 0);
    Coeffs(
        params
            .sigma_x()
            .iter()
            .zip(support.iter())
            .map(|(&sx, &on)| if on { sx * rng.sample::<f64, _>(StandardNormal) } else { 0.0 })
            .collect(),
    )
}

/// Synthesizes `D x` and adds white Gaussian noise of standard deviation
/// `sigma`. `sigma = 0` returns the clean signal.
pub fn synthesize_observation(
    dict: &Dictionary,
    x: &Coeffs,
    sigma: f64,
    seed: u64,
) -> Result<Signal> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("noise scale {sigma} must be nonnegative")));
    }
    let mut signal = dict.synthesize(x)?;
    if sigma > 0.0 {
        let mut rng = rng::stream(seed, StreamTag::Noise, 0);
        for v in &mut signal.values {
            *v += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(signal)
}
