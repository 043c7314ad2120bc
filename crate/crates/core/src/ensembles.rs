//! Random-matrix ensembles for the two spectral hypotheses.
//!
//! The regular hypothesis is modeled by Poissonian spectra: diagonal
//! unitaries with independent, uniformly distributed eigenphases. The
//! chaotic hypothesis is modeled by the circular ensembles of random-matrix
//! theory, labeled by the Dyson index `beta`:
//!
//! * CUE (`beta = 2`): Haar-distributed unitaries, no antiunitary symmetry.
//! * COE (`beta = 1`): symmetric unitaries `U = W^T W`, time-reversal
//!   invariant without spin.
//! * CSE (`beta = 4`): self-dual unitaries `U = W^R W`, time-reversal
//!   invariant with half-integer spin; every level is a Kramers doublet.
//!
//! CUE sampling follows the QR recipe: fill a matrix with iid complex
//! Gaussians, take its QR factorization, and absorb the phases of the
//! diagonal of `R` into the columns of `Q`. Without that last step the
//! distribution of `Q` is biased by the sign conventions of the QR routine;
//! with it the result is exactly Haar.
//!
//! Dimension bookkeeping for the symplectic class: [`sample_cse`] takes the
//! number of Kramers doublets `n` and returns a `2n x 2n` matrix whose
//! spectrum consists of `n` doubly degenerate phases. Spectral statistics
//! of the class refer to the `n` distinct levels, obtained with
//! [`crate::spectral::deduplicate_kramers`].

use ndarray::Array2;
use ndarray_linalg::QR;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{EigenphaseSpectrum, UnitaryMatrix};
use crate::spectral::{deduplicate_kramers, Beta};
use crate::{C64, MAX_DIM};

/// Merge tolerance for Kramers doublets of CSE spectra.
pub const KRAMERS_PAIR_TOL: f64 = 1e-6;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(format!(
            "ensemble dimension must be in 1..={MAX_DIM}, got {dim}"
        )));
    }
    Ok(())
}

/// Diagonal unitary with iid eigenphases, uniform on the circle.
///
/// This is the spectrum of a generic integrable Floquet operator: no level
/// repulsion, exponential spacing distribution.
pub fn sample_poisson<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    check_dim(dim)?;
    let mut m = Array2::zeros((dim, dim));
    for i in 0..dim {
        let phi = rng.random_range(-PI..PI);
        m[(i, i)] = C64::from_polar(1.0, -phi);
    }
    UnitaryMatrix::new(m)
}

/// Haar-distributed unitary (circular unitary ensemble, `beta = 2`).
pub fn sample_cue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    check_dim(dim)?;
    let ginibre = Array2::from_shape_fn((dim, dim), |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let (mut q, r) = ginibre
        .qr()
        .map_err(|e| Error::Eigen(format!("QR factorization failed: {e}")))?;
    for j in 0..dim {
        let d = r[(j, j)];
        // The diagonal of R is nonzero with probability one; the fallback
        // only guards against a degenerate draw.
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        q.column_mut(j).mapv_inplace(|z| z * phase);
    }
    UnitaryMatrix::new(q)
}

/// Symmetric unitary `W^T W` with `W` Haar (circular orthogonal ensemble,
/// `beta = 1`).
pub fn sample_coe<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    let w = sample_cue(dim, rng)?;
    let wt = w.as_array().t().to_owned();
    UnitaryMatrix::new(wt.dot(w.as_array()))
}

/// The symplectic unit `J = [[0, I], [-I, 0]]` in dimension `2n`.
fn symplectic_unit(half: usize) -> Array2<C64> {
    let dim = 2 * half;
    let mut j = Array2::zeros((dim, dim));
    for i in 0..half {
        j[(i, half + i)] = C64::new(1.0, 0.0);
        j[(half + i, i)] = C64::new(-1.0, 0.0);
    }
    j
}

/// Self-dual unitary `W^R W` with `W` Haar (circular symplectic ensemble,
/// `beta = 4`).
///
/// `doublets` counts Kramers pairs: the returned matrix is
/// `2 * doublets` dimensional and every eigenphase appears exactly twice.
/// `W^R = J W^T J^T` is the dual of `W` with respect to the symplectic
/// unit `J`.
pub fn sample_cse<R: Rng + ?Sized>(doublets: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if doublets == 0 || 2 * doublets > MAX_DIM {
        return Err(Error::Dimension(format!(
            "CSE doublet count must be in 1..={}, got {doublets}",
            MAX_DIM / 2
        )));
    }
    let dim = 2 * doublets;
    let w = sample_cue(dim, rng)?;
    let j = symplectic_unit(doublets);
    let w_dual = j.dot(&w.as_array().t()).dot(&j.t());
    UnitaryMatrix::new(w_dual.dot(w.as_array()))
}

/// Which spectrum generator to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Poisson,
    Cue,
    Coe,
    Cse,
}

impl Ensemble {
    /// Dyson index of the ensemble (0 marks the Poissonian case).
    pub fn beta(self) -> Beta {
        match self {
            Ensemble::Poisson => Beta::Poisson,
            Ensemble::Cue => Beta::Unitary,
            Ensemble::Coe => Beta::Orthogonal,
            Ensemble::Cse => Beta::Symplectic,
        }
    }

    pub fn from_beta(beta: Beta) -> Ensemble {
        match beta {
            Beta::Poisson => Ensemble::Poisson,
            Beta::Orthogonal => Ensemble::Coe,
            Beta::Unitary => Ensemble::Cue,
            Beta::Symplectic => Ensemble::Cse,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ensemble::Poisson => "poisson",
            Ensemble::Cue => "cue",
            Ensemble::Coe => "coe",
            Ensemble::Cse => "cse",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "poisson" => Ok(Ensemble::Poisson),
            "cue" => Ok(Ensemble::Cue),
            "coe" => Ok(Ensemble::Coe),
            "cse" => Ok(Ensemble::Cse),
            other => Err(Error::Parse(format!(
                "unknown ensemble {other:?}, expected poisson, cue, coe or cse"
            ))),
        }
    }
}

/// An ensemble together with its level count.
///
/// `dim` counts spectral levels: for the symplectic class that is the
/// number of Kramers doublets and the sampled matrix is `2 * dim`
/// dimensional; for every other ensemble matrix and level dimensions
/// coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub ensemble: Ensemble,
    pub dim: usize,
}

impl EnsembleSpec {
    pub fn new(ensemble: Ensemble, dim: usize) -> Result<Self> {
        let spec = Self { ensemble, dim };
        check_dim(spec.matrix_dim())?;
        Ok(spec)
    }

    /// Dimension of the sampled matrix.
    pub fn matrix_dim(&self) -> usize {
        match self.ensemble {
            Ensemble::Cse => 2 * self.dim,
            _ => self.dim,
        }
    }

    /// Number of distinct spectral levels (doublets counted once).
    pub fn level_count(&self) -> usize {
        self.dim
    }

    /// Draws one matrix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitaryMatrix> {
        match self.ensemble {
            Ensemble::Poisson => sample_poisson(self.dim, rng),
            Ensemble::Cue => sample_cue(self.dim, rng),
            Ensemble::Coe => sample_coe(self.dim, rng),
            Ensemble::Cse => sample_cse(self.dim, rng),
        }
    }

    /// Draws one matrix and returns the spectrum its statistics refer to:
    /// the eigenphases, with Kramers doublets collapsed for the symplectic
    /// class.
    pub fn sample_spectrum<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EigenphaseSpectrum> {
        let matrix = self.sample(rng)?;
        let spectrum = matrix.eigenphases()?;
        match self.ensemble {
            Ensemble::Cse => deduplicate_kramers(&spectrum, KRAMERS_PAIR_TOL),
            _ => Ok(spectrum),
        }
    }
}
