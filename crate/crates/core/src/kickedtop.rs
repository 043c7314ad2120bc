//! The kicked top, a spin-j Floquet system with a regular-to-chaotic
//! transition.
//!
//! One period of the dynamics is
//!
//! ```text
//! F = U_z U_y U_x,    U_k = exp{ -i tau_k J_k^2 / (2j + 1) - i alpha_k J_k }
//! ```
//!
//! built from the angular momentum operators of a spin `j`. The Hilbert
//! space dimension is `N = 2j + 1`. Parameters are collected in the vector
//! `p = (alpha_x, alpha_y, alpha_z, tau_x, tau_y, tau_z)`; two reference
//! points are provided, a regular top (pure rotation plus torsion about
//! `z`, hence diagonal in the `J_z` basis) and a strongly chaotic top with
//! all antiunitary symmetries broken, along with the straight-line
//! interpolation between them.
//!
//! Basis convention: index `i` holds `|j, m>` with `m = j - i`, i.e. `m`
//! runs from `+j` down to `-j`.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::linalg::UnitaryMatrix;
use crate::{C64, MAX_DIM};

/// Parameter point of the regular top, `p_r = (0, 0, 1, 0, 0, 10)`.
pub const REGULAR_PARAMS: [f64; 6] = [0.0, 0.0, 1.0, 0.0, 0.0, 10.0];

/// Parameter point of the chaotic top, `p_c = (1.1, 1, 1, 4, 0, 10)`.
pub const CHAOTIC_PARAMS: [f64; 6] = [1.1, 1.0, 1.0, 4.0, 0.0, 10.0];

/// Checks that `j` is a nonnegative integer or half-integer small enough
/// for the dense backend, and returns `N = 2j + 1`.
fn dimension_of_spin(j: f64) -> Result<usize> {
    if !j.is_finite() || j < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "spin j must be a nonnegative (half-)integer, got {j}"
        )));
    }
    let two_j = 2.0 * j;
    if (two_j - two_j.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "spin j must be integer or half-integer, got {j}"
        )));
    }
    let dim = two_j.round() as usize + 1;
    if dim > MAX_DIM {
        return Err(Error::Dimension(format!(
            "spin j = {j} needs N = {dim} > {MAX_DIM} dimensions"
        )));
    }
    Ok(dim)
}

/// The three angular momentum matrices of a spin `j`.
#[derive(Debug, Clone)]
pub struct AngularMomentumOps {
    pub jx: Array2<C64>,
    pub jy: Array2<C64>,
    pub jz: Array2<C64>,
}

/// Builds `J_x`, `J_y`, `J_z` for spin `j` in the `|j, m>` basis with `m`
/// descending from `+j` to `-j`.
///
/// `J_z` is diagonal with entries `m`; the transverse components follow
/// from the ladder operators, `J_+ |j, m> = sqrt(j(j+1) - m(m+1)) |j, m+1>`.
pub fn angular_momentum(j: f64) -> Result<AngularMomentumOps> {
    let dim = dimension_of_spin(j)?;
    let mut jz = Array2::zeros((dim, dim));
    let mut jp = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        let m = j - i as f64;
        jz[(i, i)] = C64::new(m, 0.0);
        if i > 0 {
            // J_+ sends |j, m> (row index i) to |j, m + 1> (row index i - 1).
            let amp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            jp[(i - 1, i)] = C64::new(amp, 0.0);
        }
    }
    let jm = jp.t().mapv(|z| z.conj());
    let jx = (&jp + &jm).mapv(|z| z * 0.5);
    let jy = (&jp - &jm).mapv(|z| z * C64::new(0.0, -0.5));
    Ok(AngularMomentumOps { jx, jy, jz })
}

/// A spin value with the six Floquet parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopParams {
    j: f64,
    /// Rotation angles `(alpha_x, alpha_y, alpha_z)`.
    pub alpha: [f64; 3],
    /// Torsion strengths `(tau_x, tau_y, tau_z)`.
    pub tau: [f64; 3],
}

impl TopParams {
    pub fn new(j: f64, alpha: [f64; 3], tau: [f64; 3]) -> Result<Self> {
        dimension_of_spin(j)?;
        if alpha.iter().chain(tau.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("top parameters must be finite".into()));
        }
        Ok(Self { j, alpha, tau })
    }

    /// The regular reference top at spin `j`.
    pub fn regular(j: f64) -> Result<Self> {
        Self::from_param_vector(j, REGULAR_PARAMS)
    }

    /// The chaotic reference top at spin `j`.
    pub fn chaotic(j: f64) -> Result<Self> {
        Self::from_param_vector(j, CHAOTIC_PARAMS)
    }

    pub fn from_param_vector(j: f64, p: [f64; 6]) -> Result<Self> {
        Self::new(j, [p[0], p[1], p[2]], [p[3], p[4], p[5]])
    }

    /// The parameters as `p = (alpha_x, alpha_y, alpha_z, tau_x, tau_y, tau_z)`.
    pub fn param_vector(&self) -> [f64; 6] {
        [self.alpha[0], self.alpha[1], self.alpha[2], self.tau[0], self.tau[1], self.tau[2]]
    }

    pub fn spin(&self) -> f64 {
        self.j
    }

    /// Hilbert space dimension `N = 2j + 1`.
    pub fn dim(&self) -> usize {
        (2.0 * self.j).round() as usize + 1
    }
}

/// The straight-line interpolation `p = (1 - eps) p_r + eps p_c` between
/// two parameter points at the same spin.
///
/// `eps = 0` returns `p_r`, `eps = 1` returns `p_c`. The usual transition
/// family interpolates [`TopParams::regular`] into [`TopParams::chaotic`].
pub fn interpolate_params(p_r: &TopParams, p_c: &TopParams, eps: f64) -> Result<TopParams> {
    if p_r.spin() != p_c.spin() {
        return Err(Error::InvalidParameter(format!(
            "interpolation endpoints must share the spin, got j = {} and j = {}",
            p_r.spin(),
            p_c.spin()
        )));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "interpolation parameter must lie in [0, 1], got {eps}"
        )));
    }
    let a = p_r.param_vector();
    let b = p_c.param_vector();
    let mut p = [0.0; 6];
    for i in 0..6 {
        p[i] = (1.0 - eps) * a[i] + eps * b[i];
    }
    TopParams::from_param_vector(p_r.spin(), p)
}

/// Fixes the eigenvector orientation returned by the Hermitian solver.
///
/// Depending on how the LAPACK wrapper maps row-major storage onto the
/// column-major routine, the returned columns can be eigenvectors of the
/// conjugated matrix instead of the matrix itself; the two cases are
/// indistinguishable for real symmetric input but not for a complex
/// Hermitian one. Probe the eigenvalue equation on the column with the
/// most imaginary content and conjugate everything if that fits better.
fn orient_eigenvectors(h: &Array2<C64>, vals: &[f64], vecs: Array2<C64>) -> Array2<C64> {
    let n = h.nrows();
    let (mut probe, mut most_imag) = (0usize, -1.0f64);
    for k in 0..n {
        let imag: f64 = (0..n).map(|r| vecs[(r, k)].im.abs()).sum();
        if imag > most_imag {
            most_imag = imag;
            probe = k;
        }
    }
    let lambda = vals[probe];
    let (mut res_plain, mut res_conj) = (0.0f64, 0.0f64);
    for r in 0..n {
        let (mut hv, mut hv_conj) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for c in 0..n {
            hv += h[(r, c)] * vecs[(c, probe)];
            hv_conj += h[(r, c)] * vecs[(c, probe)].conj();
        }
        res_plain = res_plain.max((hv - lambda * vecs[(r, probe)]).norm());
        res_conj = res_conj.max((hv_conj - lambda * vecs[(r, probe)].conj()).norm());
    }
    if res_conj < res_plain {
        vecs.mapv(|z| z.conj())
    } else {
        vecs
    }
}

/// `exp(-i H)` for Hermitian `H`, via the spectral decomposition.
///
/// The result is unitary to machine precision because the eigenvector
/// matrix returned by the Hermitian solver is orthonormal.
pub fn expm_minus_i_hermitian(h: &Array2<C64>) -> Result<Array2<C64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "matrix exponential needs a square matrix, got {} x {}",
            h.nrows(),
            h.ncols()
        )));
    }
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigen(format!("hermitian eigendecomposition failed: {e}")))?;
    let vecs = orient_eigenvectors(h, vals.as_slice().expect("contiguous"), vecs);
    let n = h.nrows();
    let mut rotated = vecs.clone();
    for (k, &lambda) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda);
        for r in 0..n {
            rotated[(r, k)] *= phase;
        }
    }
    Ok(rotated.dot(&vecs.t().mapv(|z| z.conj())))
}

/// One axis factor `U_k = exp{-i tau J_k^2 / (2j+1) - i alpha J_k}`.
///
/// Returns `None` when `tau = alpha = 0`, so callers can skip the factor
/// entirely instead of multiplying by a numerically fuzzy identity. The
/// `z` factor is evaluated exactly on the diagonal.
fn axis_factor(
    jk: &Array2<C64>,
    tau: f64,
    alpha: f64,
    dim: usize,
    diagonal: bool,
) -> Result<Option<Array2<C64>>> {
    if tau == 0.0 && alpha == 0.0 {
        return Ok(None);
    }
    let scale = tau / dim as f64;
    if diagonal {
        let mut u = Array2::zeros((dim, dim));
        for i in 0..dim {
            let m = jk[(i, i)].re;
            u[(i, i)] = C64::from_polar(1.0, -(scale * m * m + alpha * m));
        }
        return Ok(Some(u));
    }
    let h = jk.dot(jk).mapv(|z| z * scale) + jk.mapv(|z| z * alpha);
    expm_minus_i_hermitian(&h).map(Some)
}

/// Builds the Floquet operator `F = U_z U_y U_x` for the given parameters.
///
/// Inactive axes are skipped, so the regular reference top comes out
/// exactly diagonal and downstream spectral code can use its fast paths.
pub fn floquet(params: &TopParams) -> Result<UnitaryMatrix> {
    let dim = params.dim();
    let ops = angular_momentum(params.spin())?;
    let factors = [
        axis_factor(&ops.jx, params.tau[0], params.alpha[0], dim, false)?,
        axis_factor(&ops.jy, params.tau[1], params.alpha[1], dim, false)?,
        axis_factor(&ops.jz, params.tau[2], params.alpha[2], dim, true)?,
    ];
    // Apply in the order U_z U_y U_x: fold from x upward, multiplying each
    // new factor from the left.
    let mut acc: Option<Array2<C64>> = None;
    for factor in factors.into_iter().flatten() {
        acc = Some(match acc {
            None => factor,
            Some(prev) => factor.dot(&prev),
        });
    }
    UnitaryMatrix::new(acc.unwrap_or_else(|| Array2::eye(dim)))
}
