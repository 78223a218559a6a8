//! SNR-loss analysis of adaptive multichannel filters.
//!
//! An adaptive filter built from `K` training snapshots does not reach the
//! optimal output SNR; the ratio of achieved to optimal SNR is the SNR loss
//! `rho in [0, 1]`. This crate provides everything needed to study the
//! distribution of `rho` for the classical filter families (sample matrix
//! inversion, partially adaptive, eigencanceler, diagonal loading) under
//! matched and mismatched training covariance:
//!
//! * [`hermitian`] — complex Hermitian linear algebra: eigendecomposition,
//!   square roots, partial Cholesky, projectors, orthogonal complements.
//! * [`dist`] — complex matrix-variate samplers (Gaussian, Wishart,
//!   chi-square, Student, F) plus the scalar special functions the
//!   closed-form densities need (regularized incomplete beta, Gauss 2F1).
//! * [`scenario`] — covariance-mismatch scenario builders for a uniform
//!   linear array: matched (MVDR), signal-contaminated (MPDR), generalized
//!   eigenvalue relation, undernulled interference, random Wishart
//!   mismatch, Student-distributed training.
//! * [`filters`] — the filter bank and weight-vector representations.
//! * [`law`] — SNR-loss distribution laws: stochastic-representation
//!   samplers and closed-form densities, cross-checkable against direct
//!   simulation.
//!
//! The crate is `no_std` (with `alloc`); IO, CSV/JSON formats and the CLI
//! live in the companion `snrloss` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dist;
pub mod filters;
pub mod hermitian;
pub mod law;
pub mod scenario;

pub use num_complex::Complex64;
