//! Brute-force posterior enumeration over all `2^m` supports.
//!
//! This is the reference the closed forms are certified against. It works
//! for any dictionary with unit-norm columns (orthogonal or not, square or
//! redundant), at exponential cost, so the atom count is capped at
//! [`MAX_ATOMS`].
//!
//! For a support `S` the observation covariance is
//! `C_S = D_S V_S D_S^T + sigma^2 I` with `V_S` the diagonal of on-support
//! coefficient variances. Everything is evaluated through the small
//! `|S| x |S|` matrix `Q_S = V_S^{-1} + D_S^T D_S / sigma^2`:
//!
//! * `log det C_S = 2n ln sigma + sum_{i in S} ln sigma_x[i]^2 + log det Q_S`,
//! * `y^T C_S^{-1} y = y^T y / sigma^2 - ||L^{-1} D_S^T y||^2 / sigma^4`
//!   (matrix inversion lemma, `L` the Cholesky factor of `Q_S`),
//! * oracle estimate `Q_S^{-1} D_S^T y / sigma^2`, posterior risk
//!   `trace(Q_S^{-1})`.
//!
//! Weights are kept in log space and normalized by log-sum-exp; masks are
//! always visited in increasing bitmask order (chunked for parallelism,
//! combined in chunk order), so results are reproducible bit for bit.

use crate::dict::Dictionary;
use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Coeffs, Estimate, ModelParams, SupportMask};

/// Enumeration refuses to run past this many atoms (`2^20` supports).
pub const MAX_ATOMS: usize = 20;

const CHUNK: usize = 1024;

/// Dense `n x m` dictionary with unit-norm columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDictionary {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl DenseDictionary {
    /// Validates the shape and that every column has unit norm (within
    /// `1e-8`; use [`DenseDictionary::normalized`] to rescale raw data).
    pub fn new(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, got: data.len() });
        }
        if n == 0 || m == 0 {
            return Err(Error::InvalidParams("dictionary must be non-empty".into()));
        }
        for k in 0..m {
            let norm: f64 = (0..n).map(|r| data[r * m + k] * data[r * m + k]).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidParams(format!("column {k} has norm {norm}, expected 1")));
            }
        }
        Ok(DenseDictionary { n, m, data })
    }

    /// Rescales every column to unit norm, then validates.
    pub fn normalized(n: usize, m: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, got: data.len() });
        }
        for k in 0..m {
            let norm: f64 = (0..n).map(|r| data[r * m + k] * data[r * m + k]).sum::<f64>().sqrt();
            if norm <= 0.0 {
                return Err(Error::InvalidParams(format!("column {k} is zero")));
            }
            for r in 0..n {
                data[r * m + k] /= norm;
            }
        }
        Self::new(n, m, data)
    }

    /// Materializes a square unitary dictionary.
    pub fn from_dictionary(dict: &Dictionary) -> Self {
        let n = dict.len();
        DenseDictionary { n, m: n, data: dict.to_dense() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.m + col]
    }
}

/// Unnormalized log-weights of every support, plus the normalizer.
#[derive(Debug, Clone)]
pub struct SupportPosterior {
    m: usize,
    log_weights: Vec<f64>,
    log_normalizer: f64,
}

impl SupportPosterior {
    pub fn atoms(&self) -> usize {
        self.m
    }

    /// `ln t_S` for the support encoded as a bitmask.
    pub fn log_weight(&self, mask: usize) -> f64 {
        self.log_weights[mask]
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// `P(S | y)` for the support encoded as a bitmask.
    pub fn probability(&self, mask: usize) -> f64 {
        (self.log_weights[mask] - self.log_normalizer).exp()
    }

    /// All `2^m` probabilities, indexed by bitmask.
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|&lw| (lw - self.log_normalizer).exp()).collect()
    }
}

/// Shared per-observation precomputation.
struct Precomp<'a> {
    dict: &'a DenseDictionary,
    params: &'a ModelParams,
    /// `D^T D`, `m x m` row-major.
    gram: Vec<f64>,
    /// `D^T y`.
    dty: Vec<f64>,
    yty: f64,
    /// `ln p_i - ln(1 - p_i)` per atom.
    prior_delta: Vec<f64>,
    /// `sum_j ln(1 - p_j)`.
    prior_base: f64,
    /// `ln sigma_x[i]^2` per atom.
    ln_sx2: Vec<f64>,
    sigma2: f64,
    /// `2 n ln sigma`, the support-independent determinant part.
    logdet_base: f64,
}

impl<'a> Precomp<'a> {
    fn new(y: &[f64], dict: &'a DenseDictionary, params: &'a ModelParams) -> Result<Self> {
        if params.len() != dict.m {
            return Err(Error::DimensionMismatch { expected: dict.m, got: params.len() });
        }
        if y.len() != dict.n {
            return Err(Error::DimensionMismatch { expected: dict.n, got: y.len() });
        }
        if dict.m > MAX_ATOMS {
            return Err(Error::EnumerationBudget { m: dict.m, limit: MAX_ATOMS });
        }
        let (n, m) = (dict.n, dict.m);
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let dot: f64 = (0..n).map(|r| dict.data[r * m + i] * dict.data[r * m + j]).sum();
                gram[i * m + j] = dot;
                gram[j * m + i] = dot;
            }
        }
        let dty: Vec<f64> = (0..m).map(|k| (0..n).map(|r| dict.data[r * m + k] * y[r]).sum()).collect();
        let yty = y.iter().map(|v| v * v).sum();
        let prior_delta = params.p().iter().map(|&p| p.ln() - (-p).ln_1p()).collect();
        let prior_base = params.p().iter().map(|&p| (-p).ln_1p()).sum();
        let ln_sx2 = params.sigma_x().iter().map(|&sx| (sx * sx).ln()).collect();
        let sigma2 = params.sigma() * params.sigma();
        let logdet_base = n as f64 * sigma2.ln();
        Ok(Precomp { dict, params, gram, dty, yty, prior_delta, prior_base, ln_sx2, sigma2, logdet_base })
    }

    fn m(&self) -> usize {
        self.dict.m
    }

    /// Fills `idx` with the support members and `q` (k*k) with `Q_S`,
    /// factored in place to its lower Cholesky factor. Returns the
    /// support size.
    fn factor_support(&self, mask: usize, idx: &mut Vec<usize>, q: &mut Vec<f64>) -> Result<usize> {
        idx.clear();
        for i in 0..self.m() {
            if mask & (1 << i) != 0 {
                idx.push(i);
            }
        }
        let k = idx.len();
        q.clear();
        q.resize(k * k, 0.0);
        for a in 0..k {
            for b in 0..k {
                let mut v = self.gram[idx[a] * self.m() + idx[b]] / self.sigma2;
                if a == b {
                    let sx = self.params.sigma_x()[idx[a]];
                    v += 1.0 / (sx * sx);
                }
                q[a * k + b] = v;
            }
        }
        cholesky_in_place(q, k)?;
        Ok(k)
    }

    /// `ln t_S` plus the Cholesky factor left in `q` for reuse.
    fn log_weight(&self, mask: usize, idx: &mut Vec<usize>, q: &mut Vec<f64>, z: &mut Vec<f64>) -> Result<f64> {
        let k = self.factor_support(mask, idx, q)?;
        let mut logdet = self.logdet_base;
        for a in 0..k {
            logdet += self.ln_sx2[idx[a]] + 2.0 * q[a * k + a].ln();
        }
        z.clear();
        z.extend(idx.iter().map(|&i| self.dty[i]));
        forward_solve(q, k, z);
        let quad_reduction: f64 = z.iter().map(|v| v * v).sum();
        let quad_form = self.yty / self.sigma2 - quad_reduction / (self.sigma2 * self.sigma2);
        let prior: f64 = self.prior_base + idx.iter().map(|&i| self.prior_delta[i]).sum::<f64>();
        Ok(-0.5 * logdet - 0.5 * quad_form + prior)
    }

    /// Oracle estimate (embedded in `m` coordinates) and `trace(Q_S^{-1})`.
    fn oracle(&self, mask: usize) -> Result<(Vec<f64>, f64)> {
        let mut idx = Vec::new();
        let mut q = Vec::new();
        let k = self.factor_support(mask, &mut idx, &mut q)?;
        let mut z: Vec<f64> = idx.iter().map(|&i| self.dty[i]).collect();
        forward_solve(&q, k, &mut z);
        backward_solve(&q, k, &mut z);
        let mut xhat = vec![0.0; self.m()];
        for (a, &i) in idx.iter().enumerate() {
            xhat[i] = z[a] / self.sigma2;
        }
        // trace(Q^{-1}) = ||L^{-1}||_F^2, column by column.
        let mut trace = 0.0;
        let mut e = vec![0.0; k];
        for c in 0..k {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[c] = 1.0;
            forward_solve(&q, k, &mut e);
            trace += e.iter().map(|v| v * v).sum::<f64>();
        }
        Ok((xhat, trace))
    }
}

/// In-place lower Cholesky factorization of a `k x k` SPD matrix.
fn cholesky_in_place(a: &mut [f64], k: usize) -> Result<()> {
    for j in 0..k {
        let mut d = a[j * k + j];
        for t in 0..j {
            d -= a[j * k + t] * a[j * k + t];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NoConvergence { context: "Cholesky factorization of Q_S" });
        }
        let l = d.sqrt();
        a[j * k + j] = l;
        for i in j + 1..k {
            let mut v = a[i * k + j];
            for t in 0..j {
                v -= a[i * k + t] * a[j * k + t];
            }
            a[i * k + j] = v / l;
        }
    }
    // Zero the strict upper triangle so leftover entries never leak.
    for i in 0..k {
        for j in i + 1..k {
            a[i * k + j] = 0.0;
        }
    }
    Ok(())
}

/// Solves `L z = b` in place (lower triangular from [`cholesky_in_place`]).
fn forward_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut v = b[i];
        for t in 0..i {
            v -= l[i * k + t] * b[t];
        }
        b[i] = v / l[i * k + i];
    }
}

/// Solves `L^T z = b` in place.
fn backward_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in (0..k).rev() {
        let mut v = b[i];
        for t in i + 1..k {
            v -= l[t * k + i] * b[t];
        }
        b[i] = v / l[i * k + i];
    }
}

fn enumerate_log_weights(pre: &Precomp) -> Result<Vec<f64>> {
    let total = 1usize << pre.m();
    let chunks = total.div_ceil(CHUNK);
    let per_chunk: Vec<Result<Vec<f64>>> = exec::indexed_map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut idx = Vec::with_capacity(pre.m());
        let mut q = Vec::new();
        let mut z = Vec::new();
        (lo..hi).map(|mask| pre.log_weight(mask, &mut idx, &mut q, &mut z)).collect()
    });
    let mut log_weights = Vec::with_capacity(total);
    for chunk in per_chunk {
        log_weights.extend(chunk?);
    }
    Ok(log_weights)
}

fn log_sum_exp(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum = exec::compensated_sum(log_weights.iter().map(|&lw| (lw - max).exp()));
    max + sum.ln()
}

/// Posterior over all `2^m` supports.
pub fn support_posterior(y: &[f64], dict: &DenseDictionary, params: &ModelParams) -> Result<SupportPosterior> {
    let pre = Precomp::new(y, dict, params)?;
    let log_weights = enumerate_log_weights(&pre)?;
    let log_normalizer = log_sum_exp(&log_weights);
    Ok(SupportPosterior { m: pre.m(), log_weights, log_normalizer })
}

/// Posterior mean by full enumeration: the probability-weighted average of
/// the per-support oracle estimates.
pub fn exact_mmse(y: &[f64], dict: &DenseDictionary, params: &ModelParams) -> Result<Coeffs> {
    let pre = Precomp::new(y, dict, params)?;
    let log_weights = enumerate_log_weights(&pre)?;
    let log_norm = log_sum_exp(&log_weights);
    let total = log_weights.len();
    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<f64>>> = exec::indexed_map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut acc = vec![0.0; pre.m()];
        for (mask, &lw) in (lo..).zip(&log_weights[lo..hi]) {
            let w = (lw - log_norm).exp();
            if w == 0.0 {
                continue;
            }
            let (xhat, _) = pre.oracle(mask)?;
            for (a, v) in acc.iter_mut().zip(&xhat) {
                *a += w * v;
            }
        }
        Ok(acc)
    });
    let mut out = vec![0.0; pre.m()];
    for partial in partials {
        for (o, v) in out.iter_mut().zip(partial?) {
            *o += v;
        }
    }
    Ok(Coeffs(out))
}

/// Most probable support by full enumeration, with its oracle estimate.
/// Ties break toward the smaller support, then the smaller bitmask.
pub fn exact_map(y: &[f64], dict: &DenseDictionary, params: &ModelParams) -> Result<Estimate> {
    let pre = Precomp::new(y, dict, params)?;
    let log_weights = enumerate_log_weights(&pre)?;
    let better = |a: (f64, u32, usize), b: (f64, u32, usize)| -> bool {
        a.0 > b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)))
    };
    let mut best = (f64::NEG_INFINITY, u32::MAX, 0usize);
    for (mask, &lw) in log_weights.iter().enumerate() {
        let cand = (lw, mask.count_ones(), mask);
        if better(cand, best) {
            best = cand;
        }
    }
    let mask = best.2;
    let (xhat, _) = pre.oracle(mask)?;
    let support = SupportMask((0..pre.m()).map(|i| mask & (1 << i) != 0).collect());
    Ok(Estimate { xhat: Coeffs(xhat), support: Some(support) })
}

/// Conditional risk of an arbitrary estimate by full enumeration:
/// `sum_S P(S|y) [trace(Q_S^{-1}) + ||xhat - oracle_S||^2]`.
pub fn exact_risk(y: &[f64], dict: &DenseDictionary, params: &ModelParams, xhat: &[f64]) -> Result<f64> {
    let pre = Precomp::new(y, dict, params)?;
    if xhat.len() != pre.m() {
        return Err(Error::DimensionMismatch { expected: pre.m(), got: xhat.len() });
    }
    let log_weights = enumerate_log_weights(&pre)?;
    let log_norm = log_sum_exp(&log_weights);
    let total = log_weights.len();
    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<Result<f64>> = exec::indexed_map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut acc = 0.0;
        for (mask, &lw) in (lo..).zip(&log_weights[lo..hi]) {
            let w = (lw - log_norm).exp();
            if w == 0.0 {
                continue;
            }
            let (oracle, trace) = pre.oracle(mask)?;
            let dist: f64 = xhat.iter().zip(&oracle).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += w * (trace + dist);
        }
        Ok(acc)
    });
    let mut values = Vec::with_capacity(chunks);
    for p in partials {
        values.push(p?);
    }
    Ok(exec::compensated_sum(values))
}

/// Oracle estimate and posterior risk `trace(Q_S^{-1})` for one support.
pub fn exact_oracle(
    y: &[f64],
    dict: &DenseDictionary,
    params: &ModelParams,
    support: &SupportMask,
) -> Result<(Estimate, f64)> {
    let pre = Precomp::new(y, dict, params)?;
    if support.len() != pre.m() {
        return Err(Error::DimensionMismatch { expected: pre.m(), got: support.len() });
    }
    let mask = support.iter().enumerate().fold(0usize, |acc, (i, &on)| acc | ((on as usize) << i));
    let (xhat, trace) = pre.oracle(mask)?;
    Ok((Estimate { xhat: Coeffs(xhat), support: Some(support.clone()) }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk;
    use crate::shrink;

    fn unitary_case(m: usize, seed: u64) -> (Vec<f64>, DenseDictionary, ModelParams) {
        let dict = Dictionary::random_orthogonal(m, seed);
        let dense = DenseDictionary::from_dictionary(&dict);
        let p: Vec<f64> = (0..m).map(|i| 0.05 + 0.9 * ((i * 7 + 3) % 11) as f64 / 11.0).collect();
        let sx: Vec<f64> = (0..m).map(|i| 0.4 + 0.3 * ((i * 5 + 1) % 7) as f64).collect();
        let params = ModelParams::new(p, sx, 0.7).unwrap();
        let y: Vec<f64> = (0..m).map(|i| ((i * 37 + 5) % 17) as f64 / 4.0 - 2.0).collect();
        (y, dense, params)
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (y, dict, params) = unitary_case(8, 1);
        let post = support_posterior(&y, &dict, &params).unwrap();
        let sum: f64 = post.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
    }

    #[test]
    fn unitary_posterior_factorizes_per_atom() {
        let (y, dense, params) = unitary_case(6, 2);
        let post = support_posterior(&y, &dense, &params).unwrap();
        let beta = Coeffs(dense_analyze(&dense, &y));
        let g = risk::posterior_inclusion(&beta, &params);
        for mask in 0..1usize << 6 {
            let mut product = 1.0;
            for (i, &gi) in g.iter().enumerate() {
                product *= if mask & (1 << i) != 0 { gi } else { 1.0 - gi };
            }
            let got = post.probability(mask);
            assert!((got - product).abs() < 1e-10, "mask {mask:b}: {got} vs {product}");
        }
    }

    fn dense_analyze(dict: &DenseDictionary, y: &[f64]) -> Vec<f64> {
        (0..dict.m()).map(|k| (0..dict.n()).map(|r| dict.entry(r, k) * y[r]).sum()).collect()
    }

    #[test]
    fn single_atom_inclusion_matches_logistic_form() {
        let dict = DenseDictionary::new(1, 1, vec![1.0]).unwrap();
        let params = ModelParams::new(vec![0.1], vec![1.0], 1.0).unwrap();
        let y = vec![2.0];
        let post = support_posterior(&y, &dict, &params).unwrap();
        let g = risk::posterior_inclusion(&Coeffs(y), &params)[0];
        assert!((post.probability(1) - g).abs() < 1e-14);
        assert!((post.probability(0) - (1.0 - g)).abs() < 1e-14);
    }

    #[test]
    fn log_weights_match_direct_covariance_route() {
        // Independent oracle: evaluate ln t_S through the full n x n
        // covariance C_S instead of the small-matrix identity.
        let n = 5;
        let m = 5;
        let (y, dense, params) = unitary_case(m, 3);
        let post = support_posterior(&y, &dense, &params).unwrap();
        for mask in 0..1usize << m {
            let mut c = vec![0.0; n * n];
            for r in 0..n {
                c[r * n + r] = params.sigma() * params.sigma();
            }
            for i in 0..m {
                if mask & (1 << i) != 0 {
                    let sx2 = params.sigma_x()[i] * params.sigma_x()[i];
                    for r in 0..n {
                        for s in 0..n {
                            c[r * n + s] += sx2 * dense.entry(r, i) * dense.entry(s, i);
                        }
                    }
                }
            }
            cholesky_in_place(&mut c, n).unwrap();
            let logdet: f64 = (0..n).map(|r| 2.0 * c[r * n + r].ln()).sum();
            let mut z = y.clone();
            forward_solve(&c, n, &mut z);
            let quad: f64 = z.iter().map(|v| v * v).sum();
            let mut prior = 0.0;
            for i in 0..m {
                prior += if mask & (1 << i) != 0 { params.p()[i].ln() } else { (-params.p()[i]).ln_1p() };
            }
            let direct = -0.5 * logdet - 0.5 * quad + prior;
            let got = post.log_weight(mask);
            assert!((got - direct).abs() < 1e-9, "mask {mask:b}: {got} vs {direct}");
        }
    }

    #[test]
    fn exact_estimators_match_closed_forms_on_unitary_dictionaries() {
        let (y, dense, params) = unitary_case(7, 4);
        let beta = Coeffs(dense_analyze(&dense, &y));

        let mmse_exact = exact_mmse(&y, &dense, &params).unwrap();
        let mmse_closed = shrink::mmse_shrink(&beta, &params);
        for (a, b) in mmse_exact.iter().zip(mmse_closed.xhat.iter()) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }

        let map_exact = exact_map(&y, &dense, &params).unwrap();
        let map_closed = shrink::map_shrink(&beta, &params);
        assert_eq!(map_exact.support, map_closed.support);
        for (a, b) in map_exact.xhat.iter().zip(map_closed.xhat.iter()) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }

        let risk_exact = exact_risk(&y, &dense, &params, &mmse_closed.xhat).unwrap();
        let risk_closed = risk::mmse_risk(&beta, &params);
        assert!((risk_exact - risk_closed).abs() < 1e-9 * risk_closed.max(1.0), "{risk_exact} vs {risk_closed}");

        let (_, trace) = exact_oracle(&y, &dense, &params, &SupportMask(vec![true; 7])).unwrap();
        let closed = risk::oracle_risk(&SupportMask(vec![true; 7]), &params);
        assert!((trace - closed).abs() < 1e-9 * closed.max(1.0));
    }

    #[test]
    fn pythagorean_identity_by_enumeration() {
        let (y, dense, params) = unitary_case(6, 5);
        let arbitrary: Vec<f64> = (0..6).map(|i| 0.3 * i as f64 - 0.7).collect();
        let mmse = exact_mmse(&y, &dense, &params).unwrap();
        let dist: f64 = arbitrary.iter().zip(mmse.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let lhs = exact_risk(&y, &dense, &params, &arbitrary).unwrap();
        let rhs = dist + exact_risk(&y, &dense, &params, &mmse).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn redundant_dictionaries_are_supported() {
        // 3 x 5 with correlated columns: still a proper posterior.
        let n = 3;
        let m = 5;
        let raw: Vec<f64> = vec![
            1.0, 0.6, 0.0, 0.3, 0.5, //
            0.0, 0.8, 1.0, 0.3, 0.5, //
            0.0, 0.0, 0.0, 0.9, 0.7,
        ];
        let dict = DenseDictionary::normalized(n, m, raw).unwrap();
        let params = ModelParams::iid(m, 0.2, 1.0, 0.5).unwrap();
        let y = vec![0.9, -0.4, 0.2];
        let post = support_posterior(&y, &dict, &params).unwrap();
        let sum: f64 = post.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let mmse = exact_mmse(&y, &dict, &params).unwrap();
        let risk_mmse = exact_risk(&y, &dict, &params, &mmse).unwrap();
        let risk_zero = exact_risk(&y, &dict, &params, &vec![0.0; m]).unwrap();
        assert!(risk_mmse <= risk_zero, "posterior mean must beat the zero estimate");
    }

    #[test]
    fn identical_atoms_tie_break_lexicographically() {
        // Two copies of the same column produce exactly equal weights for
        // {0} and {1}; the smaller bitmask must win.
        let dict = DenseDictionary::new(2, 2, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let params = ModelParams::iid(2, 0.4, 1.0, 0.4).unwrap();
        let y = vec![1.5, 0.0];
        let post = support_posterior(&y, &dict, &params).unwrap();
        assert_eq!(post.log_weight(0b01), post.log_weight(0b10), "weights tie bit for bit");
        let map = exact_map(&y, &dict, &params).unwrap();
        assert_eq!(map.support.unwrap().0, vec![true, false]);
    }

    #[test]
    fn vanishing_priors_pick_the_empty_support() {
        let dict = DenseDictionary::new(3, 3, {
            let mut d = vec![0.0; 9];
            for i in 0..3 {
                d[i * 3 + i] = 1.0;
            }
            d
        })
        .unwrap();
        let params = ModelParams::iid(3, 1e-9, 1.0, 1.0).unwrap();
        let map = exact_map(&[0.0, 0.0, 0.0], &dict, &params).unwrap();
        assert_eq!(map.support.unwrap().count(), 0);
        assert!(map.xhat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn budget_is_enforced() {
        let m = MAX_ATOMS + 1;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        let dict = DenseDictionary::new(m, m, data).unwrap();
        let params = ModelParams::iid(m, 0.1, 1.0, 1.0).unwrap();
        match support_posterior(&vec![0.0; m], &dict, &params) {
            Err(Error::EnumerationBudget { m: got, limit }) => {
                assert_eq!(got, m);
                assert_eq!(limit, MAX_ATOMS);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn bernoulli_product_identities() {
        // sum_S prod_{i in S} g_i prod_{j notin S} (1 - g_j) telescopes to 1,
        // and weighting by membership of atom k telescopes to g_k.
        let m = 15;
        let g: Vec<f64> = (0..m).map(|i| 0.02 + 0.96 * ((i * 13 + 7) % 29) as f64 / 29.0).collect();
        let mut total = 0.0;
        let mut member = vec![0.0; m];
        for mask in 0..1usize << m {
            let mut prod = 1.0;
            for (i, &gi) in g.iter().enumerate() {
                prod *= if mask & (1 << i) != 0 { gi } else { 1.0 - gi };
            }
            total += prod;
            for (i, mv) in member.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    *mv += prod;
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "normalization: {total}");
        for (i, (&mv, &gi)) in member.iter().zip(&g).enumerate() {
            assert!((mv - gi).abs() < 1e-12, "membership {i}: {mv} vs {gi}");
        }
    }
}
