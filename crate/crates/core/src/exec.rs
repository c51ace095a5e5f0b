//! Parallel/sequential execution of independent work items.
//!
//! All data-parallel loops in the crate go through [`indexed_map`], which
//! runs on rayon when the `parallel` feature is enabled and degrades to a
//! plain sequential loop without it. Outputs are collected in index order,
//! so downstream reductions see the same operand order either way.
//! [`indexed_map_seq`] is the sequential path kept unconditionally public;
//! the comparison benchmarks pit the two against each other on the real
//! workloads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order. Parallel when
/// the `parallel` feature is on.
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed_map_seq(n, f)
    }
}

/// Sequential fallback of [`indexed_map`]; always available.
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Neumaier compensated sum. Used wherever a total must not depend on how
/// the terms were produced in parallel (the terms themselves are already
/// in a deterministic order; compensation just keeps the total accurate).
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
