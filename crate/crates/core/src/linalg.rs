//! Unitary matrices and their eigenphase spectra.
//!
//! Conventions used throughout the crate:
//!
//! * Eigenvalues of a unitary are written `lambda_j = exp(-i phi_j)`, so the
//!   eigenphase is `phi = -arg(lambda)`.
//! * Phases live in the half-open interval `(-pi, pi]`; a value landing
//!   exactly on `-pi` is mapped to `+pi`.
//! * [`EigenphaseSpectrum`] stores phases sorted ascending.
//!
//! [`UnitaryMatrix::new`] is the only public way to bring a matrix into the
//! crate and it enforces unitarity to [`UNITARITY_TOL`] in the max norm.
//! Internal code may use the unchecked constructor for matrices that are
//! unitary by algebra (adjoints, products of unitaries, direct sums), which
//! keeps hot loops free of O(N^3) re-verification.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, EigVals};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::{C64, MAX_DIM};

/// Maximum allowed `|U^H U - I|` entry for a matrix to count as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Wraps an angle into `(-pi, pi]`, sending exact `-pi` to `+pi`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::Dimension(format!(
            "dimension {dim} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    Ok(())
}

/// True when every off-diagonal entry is exactly zero.
///
/// Samplers of diagonal ensembles and diagonal Floquet operators write
/// literal zeros off the diagonal, so an exact comparison is meaningful and
/// unlocks O(N) fast paths for the check and the eigendecomposition.
pub(crate) fn is_exactly_diagonal(a: &Array2<C64>) -> bool {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && (a[(i, j)].re != 0.0 || a[(i, j)].im != 0.0) {
                return false;
            }
        }
    }
    true
}

fn unitarity_residual_of(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    if is_exactly_diagonal(a) {
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((a[(i, i)].norm_sqr() - 1.0).abs());
        }
        return worst;
    }
    let gram = a.t().mapv(|z| z.conj()).dot(a);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[(i, j)] - expected).norm());
        }
    }
    worst
}

/// A square complex matrix verified (or guaranteed by construction) to be
/// unitary.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    data: Array2<C64>,
}

impl UnitaryMatrix {
    /// Validates and wraps `data`.
    ///
    /// Fails if the matrix is not square, its dimension is 0 or above
    /// [`MAX_DIM`], any entry is non-finite, or `|U^H U - I|` exceeds
    /// [`UNITARITY_TOL`] in the max norm.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Dimension(format!(
                "matrix must be square, got {} x {}",
                data.nrows(),
                data.ncols()
            )));
        }
        check_dim(data.nrows())?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotUnitary { residual: f64::NAN, tolerance: UNITARITY_TOL });
        }
        let residual = unitarity_residual_of(&data);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual, tolerance: UNITARITY_TOL });
        }
        Ok(Self { data })
    }

    /// Wraps `data` without the unitarity check.
    ///
    /// Callers must guarantee unitarity by algebra. Not exported: outside
    /// the crate every matrix goes through [`UnitaryMatrix::new`].
    pub(crate) fn new_unchecked(data: Array2<C64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Self { data }
    }

    /// The identity operator on an `dim`-dimensional space.
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::new_unchecked(Array2::eye(dim)))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    /// Consumes the wrapper and returns the raw matrix.
    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    /// Recomputes `max |U^H U - I|`, mostly useful in tests.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual_of(&self.data)
    }

    /// Conjugate transpose. Exactly unitary whenever `self` is.
    pub fn adjoint(&self) -> UnitaryMatrix {
        Self::new_unchecked(self.data.t().mapv(|z| z.conj()))
    }

    /// Matrix product `self * other`.
    pub fn mat_mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot multiply {} x {} by {} x {}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(Self::new_unchecked(self.data.dot(&other.data)))
    }

    /// Applies the matrix to a state vector.
    pub fn mat_vec(&self, v: &Array1<C64>) -> Result<Array1<C64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector length {} does not match dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self.data.dot(v))
    }

    /// `self^n` by repeated multiplication; `n = 0` gives the identity.
    pub fn matrix_power(&self, n: u32) -> UnitaryMatrix {
        if n == 0 {
            return Self::new_unchecked(Array2::eye(self.dim()));
        }
        let mut acc = self.data.clone();
        for _ in 1..n {
            acc = acc.dot(&self.data);
        }
        Self::new_unchecked(acc)
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    /// Block-diagonal direct sum `self (+) other`.
    pub fn direct_sum(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        let total = self.dim() + other.dim();
        check_dim(total)?;
        let mut out = Array2::zeros((total, total));
        out.slice_mut(s![..self.dim(), ..self.dim()]).assign(&self.data);
        out.slice_mut(s![self.dim().., self.dim()..]).assign(&other.data);
        Ok(Self::new_unchecked(out))
    }

    /// The sorted eigenphase spectrum, without eigenvectors.
    ///
    /// Exactly diagonal matrices bypass LAPACK; everything else goes through
    /// the general complex eigensolver.
    pub fn eigenphases(&self) -> Result<EigenphaseSpectrum> {
        if is_exactly_diagonal(&self.data) {
            let phases = self.data.diag().iter().map(|z| phase_of_eigenvalue(*z)).collect();
            return EigenphaseSpectrum::new(phases);
        }
        let eigenvalues = self
            .data
            .eigvals()
            .map_err(|e| Error::Eigen(format!("eigenvalue computation failed: {e}")))?;
        EigenphaseSpectrum::new(eigenvalues.iter().map(|z| phase_of_eigenvalue(*z)).collect())
    }

    /// Sorted eigenphases together with the matching eigenvector matrix.
    ///
    /// Column `j` of the returned matrix is the eigenvector for phase `j`
    /// of the returned spectrum, i.e. `U v_j = exp(-i phi_j) v_j`. A unitary
    /// matrix is normal, so the eigenbasis can always be chosen orthonormal;
    /// the general solver does not guarantee that inside degenerate
    /// eigenspaces (Kramers doublets, identical direct-sum blocks), so
    /// clusters of equal phases are re-orthonormalized before returning.
    pub fn eigen_decomposition(&self) -> Result<(EigenphaseSpectrum, Array2<C64>)> {
        if is_exactly_diagonal(&self.data) {
            let n = self.dim();
            let mut order: Vec<usize> = (0..n).collect();
            let phases: Vec<f64> =
                self.data.diag().iter().map(|z| phase_of_eigenvalue(*z)).collect();
            order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
            let mut vectors = Array2::zeros((n, n));
            let mut sorted = Vec::with_capacity(n);
            for (col, &idx) in order.iter().enumerate() {
                vectors[(idx, col)] = C64::new(1.0, 0.0);
                sorted.push(phases[idx]);
            }
            return Ok((EigenphaseSpectrum::new_sorted(sorted)?, vectors));
        }
        let (eigenvalues, vectors) = self
            .data
            .eig()
            .map_err(|e| Error::Eigen(format!("eigendecomposition failed: {e}")))?;
        let phases: Vec<f64> = eigenvalues.iter().map(|z| phase_of_eigenvalue(*z)).collect();
        let mut order: Vec<usize> = (0..phases.len()).collect();
        order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
        let n = self.dim();
        let mut sorted_vectors = Array2::zeros((n, n));
        let mut sorted_phases = Vec::with_capacity(n);
        for (col, &idx) in order.iter().enumerate() {
            sorted_vectors.column_mut(col).assign(&vectors.column(idx));
            sorted_phases.push(phases[idx]);
        }
        for cluster in degenerate_clusters(&sorted_phases) {
            orthonormalize_columns(&mut sorted_vectors, &cluster);
        }
        Ok((EigenphaseSpectrum::new_sorted(sorted_phases)?, sorted_vectors))
    }
}

/// Eigenphases closer than this are treated as one degenerate eigenspace.
const DEGENERACY_PHASE_TOL: f64 = 1e-10;

/// Groups of column indices whose sorted phases coincide within
/// [`DEGENERACY_PHASE_TOL`], only returning groups of two or more. The
/// first and last group merge when the spectrum wraps across the branch
/// cut at phase pi.
fn degenerate_clusters(sorted_phases: &[f64]) -> Vec<Vec<usize>> {
    let n = sorted_phases.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0];
    for i in 1..n {
        if sorted_phases[i] - sorted_phases[i - 1] < DEGENERACY_PHASE_TOL {
            current.push(i);
        } else {
            groups.push(std::mem::replace(&mut current, vec![i]));
        }
    }
    groups.push(current);
    if groups.len() > 1 {
        let wrap_gap = sorted_phases[0] + 2.0 * std::f64::consts::PI - sorted_phases[n - 1];
        if wrap_gap < DEGENERACY_PHASE_TOL {
            let tail = groups.pop().expect("non-empty");
            groups[0].splice(0..0, tail);
        }
    }
    groups.retain(|g| g.len() > 1);
    groups
}

/// Modified Gram-Schmidt over the given columns, two passes for
/// numerical orthogonality. The columns must be linearly independent,
/// which LAPACK guarantees for an eigenvector set.
fn orthonormalize_columns(vectors: &mut Array2<C64>, cols: &[usize]) {
    let rows = vectors.nrows();
    for _ in 0..2 {
        for (i, &col) in cols.iter().enumerate() {
            for &prev in &cols[..i] {
                let mut proj = C64::new(0.0, 0.0);
                for r in 0..rows {
                    proj += vectors[(r, prev)].conj() * vectors[(r, col)];
                }
                for r in 0..rows {
                    let shift = proj * vectors[(r, prev)];
                    vectors[(r, col)] -= shift;
                }
            }
            let norm: f64 = (0..rows).map(|r| vectors[(r, col)].norm_sqr()).sum::<f64>().sqrt();
            for r in 0..rows {
                vectors[(r, col)] /= norm;
            }
        }
    }
}

/// Phase of an eigenvalue under the `lambda = exp(-i phi)` convention.
fn phase_of_eigenvalue(lambda: C64) -> f64 {
    wrap_phase(-lambda.arg())
}

/// A sorted list of eigenphases in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenphaseSpectrum {
    phases: Vec<f64>,
}

impl EigenphaseSpectrum {
    /// Builds a spectrum from arbitrary finite angles.
    ///
    /// Values are wrapped into `(-pi, pi]` and sorted ascending, so the
    /// stored representation is canonical regardless of input order.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Dimension("spectrum must contain at least one phase".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("eigenphases must be finite".into()));
        }
        let mut wrapped: Vec<f64> = phases.into_iter().map(wrap_phase).collect();
        wrapped.sort_by(f64::total_cmp);
        Ok(Self { phases: wrapped })
    }

    /// Internal shortcut for phases already wrapped and sorted.
    fn new_sorted(phases: Vec<f64>) -> Result<Self> {
        debug_assert!(phases.windows(2).all(|w| w[0] <= w[1]));
        if phases.is_empty() {
            return Err(Error::Dimension("spectrum must contain at least one phase".into()));
        }
        Ok(Self { phases })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }
}
