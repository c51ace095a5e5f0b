//! Periodized orthogonal Daubechies-5 wavelet transform, separable 2-D.
//!
//! One analysis level splits a length-`n` vector (n even) into `n/2`
//! approximation and `n/2` detail coefficients by circular correlation
//! with the 10-tap scaling/wavelet pair followed by decimation. Because
//! the filter pair is orthonormal and the boundary is handled by
//! periodization, the transform matrix is exactly orthogonal for every
//! even length, including lengths shorter than the filter (the wrap-around
//! sums telescope onto the even-lag autocorrelations, which vanish).
//!
//! The 2-D transform applies the split to every row of the active block,
//! then to every column, and recurses on the approximation quadrant. The
//! coefficient array keeps the usual quadrant arrangement: after `L`
//! levels the top-left `(rows/2^L, cols/2^L)` block holds the
//! approximation and each level's three detail quadrants sit beside it.

/// Daubechies-5 scaling filter (10 taps), rounded to nearest f64 from a
/// 60-digit spectral factorization. Sum is `sqrt(2)` and the even-lag
/// autocorrelations vanish to machine precision, which the unit tests
/// pin down.
pub const DB5_LO: [f64; 10] = [
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
];

/// Quadrature mirror of [`DB5_LO`]: `hi[k] = (-1)^k * lo[9 - k]`.
pub const DB5_HI: [f64; 10] = [
    0.0033357252854737712,
    0.012580751999081999,
    -0.006241490212798274,
    -0.07757149384004572,
    -0.032244869584638375,
    0.24229488706638203,
    0.13842814590132074,
    -0.7243085284377729,
    0.6038292697971896,
    -0.16010239797419293,
];

const TAPS: usize = 10;

/// One periodized analysis split: `src.len()` must be even; approximation
/// goes to `low`, detail to `high` (each half length).
fn analyze_step(src: &[f64], low: &mut [f64], high: &mut [f64]) {
    let n = src.len();
    let half = n / 2;
    debug_assert!(n.is_multiple_of(2) && low.len() == half && high.len() == half);
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for k in 0..TAPS {
            let v = src[(2 * i + k) % n];
            a += DB5_LO[k] * v;
            d += DB5_HI[k] * v;
        }
        low[i] = a;
        high[i] = d;
    }
}

/// Adjoint of [`analyze_step`]; exact inverse by orthonormality.
fn synthesize_step(low: &[f64], high: &[f64], dst: &mut [f64]) {
    let half = low.len();
    let n = 2 * half;
    debug_assert!(high.len() == half && dst.len() == n);
    dst.fill(0.0);
    for i in 0..half {
        let (a, d) = (low[i], high[i]);
        for k in 0..TAPS {
            dst[(2 * i + k) % n] += DB5_LO[k] * a + DB5_HI[k] * d;
        }
    }
}

/// In-place forward 2-D transform of a row-major `rows x cols` array.
/// `rows` and `cols` must be divisible by `2^levels`.
pub fn forward_2d(data: &mut [f64], rows: usize, cols: usize, levels: usize) {
    debug_assert_eq!(data.len(), rows * cols);
    let mut scratch = vec![0.0; rows.max(cols)];
    let mut split = vec![0.0; rows.max(cols)];
    for level in 0..levels {
        let ra = rows >> level;
        let ca = cols >> level;
        // Rows of the active block.
        for r in 0..ra {
            let row = &mut data[r * cols..r * cols + ca];
            scratch[..ca].copy_from_slice(row);
            let (lo, hi) = split[..ca].split_at_mut(ca / 2);
            analyze_step(&scratch[..ca], lo, hi);
            row.copy_from_slice(&split[..ca]);
        }
        // Columns of the active block.
        for c in 0..ca {
            for r in 0..ra {
                scratch[r] = data[r * cols + c];
            }
            let (lo, hi) = split[..ra].split_at_mut(ra / 2);
            analyze_step(&scratch[..ra], lo, hi);
            for r in 0..ra {
                data[r * cols + c] = split[r];
            }
        }
    }
}

/// In-place inverse of [`forward_2d`].
pub fn inverse_2d(data: &mut [f64], rows: usize, cols: usize, levels: usize) {
    debug_assert_eq!(data.len(), rows * cols);
    let mut scratch = vec![0.0; rows.max(cols)];
    let mut merged = vec![0.0; rows.max(cols)];
    for level in (0..levels).rev() {
        let ra = rows >> level;
        let ca = cols >> level;
        // Columns first (reverse of the forward order).
        for c in 0..ca {
            for r in 0..ra {
                scratch[r] = data[r * cols + c];
            }
            let (lo, hi) = scratch[..ra].split_at(ra / 2);
            synthesize_step(lo, hi, &mut merged[..ra]);
            for r in 0..ra {
                data[r * cols + c] = merged[r];
            }
        }
        for r in 0..ra {
            let row = &mut data[r * cols..r * cols + ca];
            scratch[..ca].copy_from_slice(row);
            let (lo, hi) = scratch[..ca].split_at(ca / 2);
            synthesize_step(lo, hi, &mut merged[..ca]);
            row.copy_from_slice(&merged[..ca]);
        }
    }
}
