//! Monte Carlo experiments: synthetic signals, batched trials, and
//! empirical-versus-theoretical risk summaries.
//!
//! A trial draws a support, on-support coefficients, and observation noise
//! from per-trial deterministic streams, runs every estimator, and records
//! squared errors next to their closed-form conditional risks. Batches fan
//! the trials out with [`exec::indexed_map`], so a run is reproducible bit
//! for bit regardless of thread count, and each `(sigma, trial)` cell gets
//! an independent seed via [`rng::derive`].

use crate::dict::Dictionary;
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{sample_coefficients, sample_support, synthesize_observation, ModelParams};
use crate::risk::{self, RiskReport};
use crate::rng;
use crate::shrink;

/// Squared errors and conditional risks from one synthetic draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Squared error of the oracle estimator (true support revealed).
    pub emp_oracle: f64,
    /// Squared error of the posterior-mean estimator.
    pub emp_mmse: f64,
    /// Squared error of the most-probable-support estimator.
    pub emp_map: f64,
    /// Oracle risk of the drawn support, `sum_{k in S} c_k^2 sigma^2`.
    pub oracle_risk_true_support: f64,
    /// Posterior-expected oracle risk given the observation.
    pub th_oracle: f64,
    /// Conditional risk of the posterior mean given the observation.
    pub th_mmse: f64,
    /// Conditional risk of the most-probable-support estimate.
    pub th_map: f64,
    /// Drawn support size.
    pub support_size: usize,
    /// Posterior-expected support size given the observation.
    pub expected_support: f64,
}

/// Runs one synthetic draw-estimate-score cycle.
///
/// Errors are measured between coefficient vectors; the dictionary is
/// unitary, so they equal the signal-domain errors.
pub fn synthetic_trial(dict: &Dictionary, params: &ModelParams, trial_seed: u64) -> Result<TrialResult> {
    let support = sample_support(params, trial_seed);
    let x = sample_coefficients(params, &support, trial_seed);
    let y = synthesize_observation(dict, &x, params.sigma(), trial_seed)?;
    let beta = dict.analyze(&y)?;

    let oracle = shrink::oracle_estimate(&beta, &support, params);
    let mmse = shrink::mmse_shrink(&beta, params);
    let map = shrink::map_shrink(&beta, params);
    let sq = |est: &[f64]| exec::compensated_sum(est.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)));

    let report = RiskReport::compute(&beta, params);
    Ok(TrialResult {
        emp_oracle: sq(&oracle.xhat),
        emp_mmse: sq(&mmse.xhat),
        emp_map: sq(&map.xhat),
        oracle_risk_true_support: risk::oracle_risk(&support, params),
        th_oracle: report.mse_oracle,
        th_mmse: report.mse_mmse,
        th_map: report.mse_map,
        support_size: support.count(),
        expected_support: report.expected_support_size,
    })
}

/// A batch of i.i.d. trials on a 2-D wavelet dictionary, swept over noise
/// levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub rows: usize,
    pub cols: usize,
    pub levels: usize,
    /// Activity probability shared by every atom.
    pub p: f64,
    /// On-support standard deviation shared by every atom.
    pub sigma_x: f64,
    /// Noise levels to sweep.
    pub sigmas: Vec<f64>,
    /// Trials per noise level.
    pub trials: usize,
    pub seed: u64,
}

/// Per-noise-level averages. Every risk column is normalized by
/// `n sigma^2`, the risk of handing back the raw observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaRow {
    pub sigma: f64,
    pub trials: usize,
    pub emp_oracle: f64,
    pub th_oracle: f64,
    pub emp_mmse: f64,
    pub th_mmse: f64,
    pub emp_map: f64,
    pub th_map: f64,
    /// Average drawn support size.
    pub mean_support: f64,
    /// Average posterior-expected support size.
    pub expected_support: f64,
}

/// Runs the full sweep. Trials are independent across `(sigma, trial)`
/// cells and are averaged in a fixed order.
pub fn run_synthetic(config: &SyntheticConfig) -> Result<Vec<SigmaRow>> {
    if config.trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if config.sigmas.is_empty() {
        return Err(Error::InvalidParams("at least one noise level is required".into()));
    }
    let dict = Dictionary::db5_2d(config.rows, config.cols, config.levels)?;
    let n = config.rows * config.cols;
    let params: Vec<ModelParams> = config
        .sigmas
        .iter()
        .map(|&sigma| ModelParams::iid(n, config.p, config.sigma_x, sigma))
        .collect::<Result<_>>()?;

    let cells = config.sigmas.len() * config.trials;
    let results: Vec<TrialResult> = exec::indexed_map(cells, |cell| {
        let sigma_idx = cell / config.trials;
        let trial = cell % config.trials;
        let trial_seed = rng::derive(config.seed, sigma_idx as u64, trial as u64);
        synthetic_trial(&dict, &params[sigma_idx], trial_seed)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(config.sigmas.len());
    for (sigma_idx, &sigma) in config.sigmas.iter().enumerate() {
        let trials = &results[sigma_idx * config.trials..(sigma_idx + 1) * config.trials];
        let scale = 1.0 / (config.trials as f64 * n as f64 * sigma * sigma);
        let mean = |f: &dyn Fn(&TrialResult) -> f64| exec::compensated_sum(trials.iter().map(f)) * scale;
        let count = |f: &dyn Fn(&TrialResult) -> f64| {
            exec::compensated_sum(trials.iter().map(f)) / config.trials as f64
        };
        rows.push(SigmaRow {
            sigma,
            trials: config.trials,
            emp_oracle: mean(&|t| t.emp_oracle),
            th_oracle: mean(&|t| t.th_oracle),
            emp_mmse: mean(&|t| t.emp_mmse),
            th_mmse: mean(&|t| t.th_mmse),
            emp_map: mean(&|t| t.emp_map),
            th_map: mean(&|t| t.th_map),
            mean_support: count(&|t| t.support_size as f64),
            expected_support: count(&|t| t.expected_support),
        });
    }
    Ok(rows)
}
