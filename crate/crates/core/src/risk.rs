//! Conditional estimation risks given the observation.
//!
//! All quantities are posterior expectations given `beta = D^T y`. For the
//! unitary model they reduce to per-atom sums driven by the inclusion
//! probabilities `g[k]` and gains `c2[k]`:
//!
//! * oracle (support known): `sum_{k in S} c2[k] sigma^2`,
//! * MMSE: `sum_k c2[k] sigma^2 g[k] + c2[k]^2 beta[k]^2 g[k](1 - g[k])`,
//! * MAP: same first term, with the second term's variance factor replaced
//!   by `1 - g[k]` on the kept atoms and `g[k]` on the dropped ones,
//! * any other estimate `xhat`: `||xhat - xhat_MMSE||^2 + risk(MMSE)`
//!   (the posterior risk decomposes around the posterior mean).
//!
//! [`posterior_mc_risk`] estimates the same conditional risk by sampling
//! from the exact posterior, as an independent check on the formulas. Its
//! sample chunks own fixed RNG streams, so the result is identical under
//! any thread count.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dict::BandLayout;
use crate::exec;
use crate::model::{Coeffs, ModelParams, SupportMask};
use crate::rng::{self, StreamTag};
use crate::shrink::{mmse_shrink, ShrinkageInputs};

/// Posterior probability that each atom is active.
pub fn posterior_inclusion(beta: &Coeffs, params: &ModelParams) -> Vec<f64> {
    let inputs = ShrinkageInputs::new(beta, params);
    (0..inputs.len()).map(|k| inputs.g(k)).collect()
}

/// Expected number of active atoms under the posterior.
pub fn expected_support_size(beta: &Coeffs, params: &ModelParams) -> f64 {
    exec::compensated_sum(posterior_inclusion(beta, params))
}

/// Risk of the oracle estimator on a known support.
pub fn oracle_risk(support: &SupportMask, params: &ModelParams) -> f64 {
    assert_eq!(support.len(), params.len(), "support/params length mismatch");
    let s2 = params.sigma() * params.sigma();
    exec::compensated_sum(
        params.c2().iter().zip(support.iter()).map(|(&c2, &on)| if on { c2 * s2 } else { 0.0 }),
    )
}

fn per_atom_risks(inputs: &ShrinkageInputs) -> (Vec<f64>, Vec<f64>) {
    let s2 = inputs.sigma() * inputs.sigma();
    let mut mmse = Vec::with_capacity(inputs.len());
    let mut map = Vec::with_capacity(inputs.len());
    for k in 0..inputs.len() {
        let g = inputs.g(k);
        let omg = inputs.one_minus_g(k);
        let c2 = inputs.c2()[k];
        let b2 = inputs.beta()[k] * inputs.beta()[k];
        let base = c2 * s2 * g;
        mmse.push(base + c2 * c2 * b2 * g * omg);
        let miss = if inputs.map_includes(k) { omg } else { g };
        map.push(base + c2 * c2 * b2 * miss);
    }
    (mmse, map)
}

/// Conditional risk of the MMSE estimator.
pub fn mmse_risk(beta: &Coeffs, params: &ModelParams) -> f64 {
    let inputs = ShrinkageInputs::new(beta, params);
    exec::compensated_sum(per_atom_risks(&inputs).0)
}

/// Conditional risk of the MAP estimator.
pub fn map_risk(beta: &Coeffs, params: &ModelParams) -> f64 {
    let inputs = ShrinkageInputs::new(beta, params);
    exec::compensated_sum(per_atom_risks(&inputs).1)
}

/// Conditional risk of an arbitrary estimate: squared distance to the
/// posterior mean plus the MMSE risk.
pub fn estimate_risk(beta: &Coeffs, params: &ModelParams, xhat: &[f64]) -> f64 {
    assert_eq!(xhat.len(), params.len(), "estimate/params length mismatch");
    let mmse = mmse_shrink(beta, params);
    let dist: f64 = exec::compensated_sum(
        xhat.iter().zip(mmse.xhat.iter()).map(|(&a, &b)| (a - b) * (a - b)),
    );
    dist + mmse_risk(beta, params)
}

/// Closed-form risk summary for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    /// Posterior-expected oracle risk `sum_k c2[k] sigma^2 g[k]`.
    pub mse_oracle: f64,
    pub mse_mmse: f64,
    pub mse_map: f64,
    pub expected_support_size: f64,
    /// Per-band rows when a layout was supplied.
    pub per_band: Option<Vec<BandRisk>>,
}

/// One band's share of the totals in a [`RiskReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandRisk {
    pub id: String,
    pub atoms: usize,
    pub mse_oracle: f64,
    pub mse_mmse: f64,
    pub mse_map: f64,
    pub expected_support_size: f64,
}

impl RiskReport {
    pub fn compute(beta: &Coeffs, params: &ModelParams) -> Self {
        Self::build(beta, params, None)
    }

    /// Totals plus a per-band breakdown following `layout`.
    pub fn compute_with_layout(beta: &Coeffs, params: &ModelParams, layout: &BandLayout) -> Self {
        Self::build(beta, params, Some(layout))
    }

    fn build(beta: &Coeffs, params: &ModelParams, layout: Option<&BandLayout>) -> Self {
        let inputs = ShrinkageInputs::new(beta, params);
        let s2 = params.sigma() * params.sigma();
        let (mmse, map) = per_atom_risks(&inputs);
        let oracle: Vec<f64> = (0..inputs.len()).map(|k| inputs.c2()[k] * s2 * inputs.g(k)).collect();
        let g: Vec<f64> = (0..inputs.len()).map(|k| inputs.g(k)).collect();
        let per_band = layout.map(|layout| {
            layout
                .bands()
                .iter()
                .map(|band| BandRisk {
                    id: band.id.clone(),
                    atoms: band.indices.len(),
                    mse_oracle: exec::compensated_sum(band.indices.iter().map(|&i| oracle[i])),
                    mse_mmse: exec::compensated_sum(band.indices.iter().map(|&i| mmse[i])),
                    mse_map: exec::compensated_sum(band.indices.iter().map(|&i| map[i])),
                    expected_support_size: exec::compensated_sum(band.indices.iter().map(|&i| g[i])),
                })
                .collect()
        });
        RiskReport {
            mse_oracle: exec::compensated_sum(oracle),
            mse_mmse: exec::compensated_sum(mmse),
            mse_map: exec::compensated_sum(map),
            expected_support_size: exec::compensated_sum(g),
            per_band,
        }
    }
}

/// Result of the Monte Carlo risk estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRisk {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 4096;

/// Estimates `E[||xhat - x||^2 | y]` by sampling supports and coefficients
/// from the exact posterior. The estimate and its standard error shrink at
/// the usual `samples^(-1/2)` rate. Deterministic for a fixed seed
/// regardless of parallelism: every fixed-size chunk owns its own RNG
/// stream and the chunk sums are combined in order.
pub fn posterior_mc_risk(
    beta: &Coeffs,
    params: &ModelParams,
    xhat: &[f64],
    samples: u64,
    seed: u64,
) -> McRisk {
    assert!(samples >= 2, "need at least two samples for a standard error");
    assert_eq!(xhat.len(), params.len(), "estimate/params length mismatch");
    let inputs = ShrinkageInputs::new(beta, params);
    let g: Vec<f64> = (0..inputs.len()).map(|k| inputs.g(k)).collect();
    let mean: Vec<f64> = (0..inputs.len()).map(|k| inputs.c2()[k] * inputs.beta()[k]).collect();
    let sd: Vec<f64> = inputs.c2().iter().map(|&c2| (c2 * params.sigma() * params.sigma()).sqrt()).collect();

    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = exec::indexed_map(chunks as usize, |chunk| {
        let lo = chunk as u64 * MC_CHUNK;
        let hi = (lo + MC_CHUNK).min(samples);
        let mut rng = rng::stream(seed, StreamTag::McSample, chunk as u64);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in lo..hi {
            let mut err = 0.0;
            for k in 0..xhat.len() {
                let x = if rng.gen::<f64>() < g[k] {
                    mean[k] + sd[k] * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                let d = xhat[k] - x;
                err += d * d;
            }
            sum += err;
            sum_sq += err * err;
        }
        (sum, sum_sq)
    });
    let sum = exec::compensated_sum(partials.iter().map(|p| p.0));
    let sum_sq = exec::compensated_sum(partials.iter().map(|p| p.1));
    let n = samples as f64;
    let mean_err = sum / n;
    let var = ((sum_sq - n * mean_err * mean_err) / (n - 1.0)).max(0.0);
    McRisk { mean: mean_err, std_err: (var / n).sqrt(), samples }
}
