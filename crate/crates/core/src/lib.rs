//! Spectral statistics of unitary Floquet operators.
//!
//! The crate provides the pieces needed to run an "ergodic hypothesis test"
//! on the spectrum of a unitary matrix: samplers for the classical circular
//! ensembles and for Poissonian (regular) spectra, spectral form factors and
//! their random-matrix expectations, a kicked-top Floquet operator whose
//! dynamics interpolates between regular and chaotic, and a simulator for
//! the one-clean-qubit (DQC1) trace-estimation circuit including shot noise.
//!
//! The intended workflow mirrors the physics: sample or build a Floquet
//! operator, extract its eigenphases, form the time series of form factors
//! `T_n = |Tr F^n|^2`, and decide between the regular and chaotic hypotheses
//! from a handful of the `T_n`, either from the exact spectrum or from noisy
//! DQC1 trace estimates.
//!
//! Dense linear algebra is delegated to LAPACK via `ndarray-linalg`; sample
//! sweeps run on a rayon pool when the default `parallel` feature is on, and
//! fall back to plain sequential iteration otherwise. Results are identical
//! either way because every sample owns a counter-derived RNG stream.

pub mod dqc1;
pub mod ensembles;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod kickedtop;
pub mod linalg;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};

/// Complex double, the scalar type of every matrix in this crate.
pub type C64 = num_complex::Complex64;

/// Largest matrix dimension any constructor accepts.
///
/// Dense eigendecomposition is O(N^3) with sizable constants; beyond this
/// size a single sample would take minutes and the toolkit stops being
/// interactive. The cap is enforced wherever a matrix enters the crate.
pub const MAX_DIM: usize = 4096;
