//! Unitary dictionaries: analysis, synthesis, and band structure.
//!
//! Every dictionary here is a square orthogonal transform, so analysis is
//! `beta = D^T y`, synthesis is `D x`, and the two compose to the identity.
//! The wavelet dictionary additionally partitions its coefficients into
//! subbands (three detail orientations per level plus one approximation
//! block); all other kinds expose a single trivial band.

pub mod wavelet;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Coeffs, Signal};
use crate::rng::{self, StreamTag};

/// Orthonormality tolerance accepted for user-supplied explicit matrices.
const ORTHO_TOL: f64 = 1e-8;

/// A contiguous group of coefficients sharing one prior band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    /// Short name, e.g. `lh1`, `hh3`, `a3`, or `all`.
    pub id: String,
    /// Decomposition level; the approximation band carries the deepest
    /// level, and the trivial single band carries 0.
    pub level: usize,
    /// Flattened coefficient indices belonging to the band.
    pub indices: Vec<usize>,
}

/// Partition of the coefficient indices into bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandLayout {
    bands: Vec<Band>,
    coeff_len: usize,
    levels: usize,
}

impl BandLayout {
    /// One band covering everything (non-wavelet dictionaries).
    pub fn single(n: usize) -> Self {
        BandLayout {
            bands: vec![Band { id: "all".into(), level: 0, indices: (0..n).collect() }],
            coeff_len: n,
            levels: 0,
        }
    }

    /// Custom layout from explicit bands; the indices must partition
    /// `0..total` with `total` the sum of the band sizes.
    pub fn from_bands(bands: Vec<Band>) -> Result<Self> {
        let coeff_len: usize = bands.iter().map(|b| b.indices.len()).sum();
        if coeff_len == 0 {
            return Err(Error::InvalidParams("a layout needs at least one coefficient".into()));
        }
        let mut seen = vec![false; coeff_len];
        for band in &bands {
            if band.indices.is_empty() {
                return Err(Error::InvalidParams(format!("band {} is empty", band.id)));
            }
            for &i in &band.indices {
                if i >= coeff_len || seen[i] {
                    return Err(Error::InvalidParams(format!(
                        "band indices must partition 0..{coeff_len}; index {i} is out of range or repeated"
                    )));
                }
                seen[i] = true;
            }
        }
        let levels = bands.iter().map(|b| b.level).max().unwrap_or(0);
        Ok(BandLayout { bands, coeff_len, levels })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn coeff_len(&self) -> usize {
        self.coeff_len
    }

    /// Number of decomposition levels behind this layout (0 for trivial).
    pub fn levels(&self) -> usize {
        self.levels
    }
}

/// Dense column-orthonormal matrix backing the explicit dictionary kinds.
/// Stored row-major; column `k` is atom `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMatrix {
    n: usize,
    data: Vec<f64>,
}

impl OrthoMatrix {
    /// Validates `D^T D = I` to within `1e-8` per entry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        let mut deviation = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n).map(|r| data[r * n + i] * data[r * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - target).abs());
            }
        }
        if deviation > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(OrthoMatrix { n, data })
    }

    /// Seeded Gaussian matrix orthonormalized by modified Gram-Schmidt
    /// (with one re-orthogonalization pass).
    pub fn random(n: usize, seed: u64) -> Self {
        assert!(n > 0, "matrix size must be positive");
        let mut rng = rng::stream(seed, StreamTag::Dictionary, 0);
        let mut data: Vec<f64> = (0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for k in 0..n {
            for _pass in 0..2 {
                for j in 0..k {
                    let dot: f64 = (0..n).map(|r| data[r * n + j] * data[r * n + k]).sum();
                    for r in 0..n {
                        data[r * n + k] -= dot * data[r * n + j];
                    }
                }
            }
            let norm: f64 = (0..n).map(|r| data[r * n + k] * data[r * n + k]).sum::<f64>().sqrt();
            assert!(norm > 1e-12, "degenerate random column");
            for r in 0..n {
                data[r * n + k] /= norm;
            }
        }
        OrthoMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries, column `k` = atom `k`.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(n)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (&v, row) in y.iter().zip(self.data.chunks_exact(n)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * v;
            }
        }
        out
    }
}

/// A unitary dictionary.
#[derive(Debug, Clone, PartialEq)]
pub enum Dictionary {
    /// Coefficients are the signal itself.
    Identity { n: usize },
    /// Normalized Walsh-Hadamard transform; length must be a power of two.
    Hadamard { n: usize },
    /// Orthonormal type-II cosine transform (naive `O(n^2)`, meant for
    /// moderate lengths).
    Dct { n: usize },
    /// Separable 2-D Daubechies-5 wavelet transform with periodic
    /// boundaries on a `rows x cols` image.
    Db5 { rows: usize, cols: usize, levels: usize },
    /// Seeded random orthogonal matrix.
    RandomOrthogonal(OrthoMatrix),
    /// Caller-supplied orthogonal matrix.
    Explicit(OrthoMatrix),
}

impl Dictionary {
    pub fn identity(n: usize) -> Self {
        Dictionary::Identity { n }
    }

    pub fn hadamard(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::UnsupportedSize {
                kind: "hadamard",
                detail: format!("length {n} is not a power of two"),
            });
        }
        Ok(Dictionary::Hadamard { n })
    }

    pub fn dct(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedSize { kind: "dct", detail: "empty".into() });
        }
        Ok(Dictionary::Dct { n })
    }

    /// 2-D wavelet dictionary; both dimensions must be divisible by
    /// `2^levels`.
    pub fn db5_2d(rows: usize, cols: usize, levels: usize) -> Result<Self> {
        let div = 1usize
            .checked_shl(levels as u32)
            .filter(|d| levels >= 1 && rows > 0 && cols > 0 && rows.is_multiple_of(*d) && cols.is_multiple_of(*d));
        if div.is_none() {
            return Err(Error::UnsupportedSize {
                kind: "db5-2d",
                detail: format!("{rows}x{cols} with {levels} levels (need dimensions divisible by 2^levels)"),
            });
        }
        Ok(Dictionary::Db5 { rows, cols, levels })
    }

    pub fn random_orthogonal(n: usize, seed: u64) -> Self {
        Dictionary::RandomOrthogonal(OrthoMatrix::random(n, seed))
    }

    pub fn explicit(n: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Dictionary::Explicit(OrthoMatrix::new(n, data)?))
    }

    /// Signal length = coefficient length (all kinds are square).
    pub fn len(&self) -> usize {
        match self {
            Dictionary::Identity { n } | Dictionary::Hadamard { n } | Dictionary::Dct { n } => *n,
            Dictionary::Db5 { rows, cols, .. } => rows * cols,
            Dictionary::RandomOrthogonal(m) | Dictionary::Explicit(m) => m.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got });
        }
        Ok(())
    }

    /// `beta = D^T y`.
    pub fn analyze(&self, y: &Signal) -> Result<Coeffs> {
        self.check_len(y.len())?;
        if let (Dictionary::Db5 { rows, cols, .. }, Some(shape)) = (self, y.shape) {
            if shape != (*rows, *cols) {
                return Err(Error::UnsupportedSize {
                    kind: "db5-2d",
                    detail: format!("signal shape {shape:?} does not match {rows}x{cols}"),
                });
            }
        }
        Ok(Coeffs(match self {
            Dictionary::Identity { .. } => y.values.clone(),
            Dictionary::Hadamard { .. } => hadamard_transform(&y.values),
            Dictionary::Dct { .. } => dct2(&y.values),
            Dictionary::Db5 { rows, cols, levels } => {
                let mut data = y.values.clone();
                wavelet::forward_2d(&mut data, *rows, *cols, *levels);
                data
            }
            Dictionary::RandomOrthogonal(m) | Dictionary::Explicit(m) => m.apply_transpose(&y.values),
        }))
    }

    /// `D x`; carries the image shape for the 2-D wavelet kind.
    pub fn synthesize(&self, x: &Coeffs) -> Result<Signal> {
        self.check_len(x.len())?;
        let values = match self {
            Dictionary::Identity { .. } => x.0.clone(),
            Dictionary::Hadamard { .. } => hadamard_transform(x),
            Dictionary::Dct { .. } => dct3(x),
            Dictionary::Db5 { rows, cols, levels } => {
                let mut data = x.0.clone();
                wavelet::inverse_2d(&mut data, *rows, *cols, *levels);
                data
            }
            Dictionary::RandomOrthogonal(m) | Dictionary::Explicit(m) => m.apply(x),
        };
        Ok(match self {
            Dictionary::Db5 { rows, cols, .. } => Signal { values, shape: Some((*rows, *cols)) },
            _ => Signal::new(values),
        })
    }

    /// Subband partition of the coefficient indices. Wavelets get
    /// `3 * levels + 1` bands ordered finest to coarsest with the
    /// approximation last; every other kind gets one `all` band.
    pub fn band_layout(&self) -> BandLayout {
        match self {
            Dictionary::Db5 { rows, cols, levels } => {
                let mut bands = Vec::with_capacity(3 * levels + 1);
                for level in 1..=*levels {
                    let rl = rows >> level;
                    let cl = cols >> level;
                    let rect = |r0: usize, c0: usize| -> Vec<usize> {
                        let mut idx = Vec::with_capacity(rl * cl);
                        for r in r0..r0 + rl {
                            for c in c0..c0 + cl {
                                idx.push(r * cols + c);
                            }
                        }
                        idx
                    };
                    bands.push(Band { id: format!("lh{level}"), level, indices: rect(0, cl) });
                    bands.push(Band { id: format!("hl{level}"), level, indices: rect(rl, 0) });
                    bands.push(Band { id: format!("hh{level}"), level, indices: rect(rl, cl) });
                }
                let rl = rows >> levels;
                let cl = cols >> levels;
                let mut approx = Vec::with_capacity(rl * cl);
                for r in 0..rl {
                    for c in 0..cl {
                        approx.push(r * cols + c);
                    }
                }
                bands.push(Band { id: format!("a{levels}"), level: *levels, indices: approx });
                BandLayout { bands, coeff_len: rows * cols, levels: *levels }
            }
            _ => BandLayout::single(self.len()),
        }
    }

    /// Materializes the transform as a dense matrix (column `k` is the
    /// synthesis of the `k`-th unit coefficient vector). For tests and
    /// cross-checks on small sizes.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut dense = vec![0.0; n * n];
        let mut unit = Coeffs::zeros(n);
        for k in 0..n {
            unit[k] = 1.0;
            let col = self.synthesize(&unit).expect("unit vector has the right length");
            for r in 0..n {
                dense[r * n + k] = col.values[r];
            }
            unit[k] = 0.0;
        }
        dense
    }
}

/// Normalized Walsh-Hadamard transform (self-inverse).
fn hadamard_transform(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = v.to_vec();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (out[j], out[j + h]);
                out[j] = a + b;
                out[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for o in &mut out {
        *o *= scale;
    }
    out
}

/// Orthonormal DCT-II (analysis direction).
fn dct2(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            let acc: f64 = v
                .iter()
                .enumerate()
                .map(|(j, &x)| x * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos())
                .sum();
            scale * acc
        })
        .collect()
}

/// Orthonormal DCT-III (synthesis direction, inverse of [`dct2`]).
fn dct3(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let nf = n as f64;
    (0..n)
        .map(|j| {
            c.iter()
                .enumerate()
                .map(|(k, &x)| {
                    let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    scale * x * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos()
                })
                .sum()
        })
        .collect()
}
