//! Exact Bayesian denoising under a Bernoulli-Gaussian sparse prior.
//!
//! A signal is modeled as `y = D x + v` where `D` is a unitary dictionary,
//! `v` is white Gaussian noise, and the coefficient vector `x` is sparse:
//! each atom is active with its own probability and, when active, carries a
//! zero-mean Gaussian coefficient. Under a unitary `D` the posterior over
//! the `2^m` candidate supports factorizes per atom, so the MAP and MMSE
//! estimators, their conditional risks, and worst-case risk-ratio bounds
//! all have closed forms. This crate implements those closed forms, a
//! brute-force enumeration reference to certify them against, a per-band
//! maximum-likelihood parameter estimator, and the experiment harnesses
//! that exercise the lot.
//!
//! Hot loops (trial batches, support enumeration, Monte Carlo sampling)
//! run on rayon when the default `parallel` feature is enabled and fall
//! back to plain sequential iteration without it. Results are identical
//! either way: every parallel reduction is an ordered combine.

pub mod bounds;
pub mod dict;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod exec;
pub mod experiment;
pub mod model;
pub mod pipeline;
pub mod risk;
pub mod rng;
pub mod shrink;

pub use error::{Error, Result};
pub use model::{Coeffs, Estimate, ModelParams, Signal, SupportMask};
pub use shrink::Estimator;
