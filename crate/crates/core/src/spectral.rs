//! Spectral form factors and the ergodicity-based hypothesis test.
//!
//! The central object is the form factor `T_n = |Tr F^n|^2` of a Floquet
//! operator `F`. Averaged over an ensemble, `T_n` distinguishes the two
//! universality classes:
//!
//! * regular (Poissonian) spectra: `E T_n = N`, time independent;
//! * chaotic (RMT) spectra: `E T_n` follows the Wigner surmise of the
//!   matching circular ensemble, which is `n` for `beta = 2` and close to
//!   linear in `n` for `beta = 1, 4` when `n` is small against `N`.
//!
//! A single spectrum has wildly fluctuating `T_n` (the standard deviation
//! is comparable to the mean), so the test works with ergodic averages
//! over a window of `delta_n` consecutive powers:
//!
//! ```text
//! t0 = (1 / delta_n) sum_{n=1}^{delta_n} T_n / N     (regular hypothesis)
//! t1 = (1 / delta_n) sum_{n=1}^{delta_n} T_n / n     (chaotic hypothesis)
//! ```
//!
//! Whichever statistic converges to 1 (the variance of the window average
//! is bounded by `1 / delta_n`) identifies the class. A chaotic dynamics
//! with `k` identical invariant subspaces shifts the mean form factor to
//! `k^2 n`, which the test detects through `t1 / k^2` landing near 1 for
//! an integer `k >= 2`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::EigenphaseSpectrum;

/// Dyson symmetry index of a circular ensemble, with `beta = 0` standing
/// for the Poissonian (regular) case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Beta {
    /// Regular spectra, no level repulsion.
    Poisson,
    /// Circular orthogonal ensemble.
    Orthogonal,
    /// Circular unitary ensemble.
    Unitary,
    /// Circular symplectic ensemble.
    Symplectic,
}

impl Beta {
    /// The numeric Dyson index: 0, 1, 2 or 4.
    pub fn index(self) -> u8 {
        match self {
            Beta::Poisson => 0,
            Beta::Orthogonal => 1,
            Beta::Unitary => 2,
            Beta::Symplectic => 4,
        }
    }

    pub fn from_index(index: u8) -> Result<Beta> {
        match index {
            0 => Ok(Beta::Poisson),
            1 => Ok(Beta::Orthogonal),
            2 => Ok(Beta::Unitary),
            4 => Ok(Beta::Symplectic),
            other => Err(Error::InvalidParameter(format!(
                "beta must be one of 0, 1, 2, 4, got {other}"
            ))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(beta: Beta) -> u8 {
        beta.index()
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(index: u8) -> Result<Beta> {
        Beta::from_index(index)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let index: u8 = s
            .parse()
            .map_err(|_| Error::Parse(format!("beta must be an integer, got {s:?}")))?;
        Beta::from_index(index)
    }
}

/// Form factor `T_n = |sum_j exp(-i n phi_j)|^2`.
///
/// Defined for `n >= 1`; `n = 0` degenerates to `N^2` and is accepted for
/// convenience.
pub fn form_factor(spectrum: &EigenphaseSpectrum, n: u32) -> f64 {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for &phi in spectrum.phases() {
        let (s, c) = (-(n as f64) * phi).sin_cos();
        re += c;
        im += s;
    }
    re * re + im * im
}

/// The form factors `T_1 .. T_{n_max}` of one spectrum, together with the
/// dimension used to normalize them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFactorSeries {
    values: Vec<f64>,
    dim: usize,
}

impl FormFactorSeries {
    /// Wraps externally produced values (estimates, fixtures).
    ///
    /// Every value must be finite and inside `[0, N^2]`, up to a small
    /// relative slack for rounding in upstream arithmetic.
    pub fn from_values(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("series dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "series must contain at least one value".into(),
            ));
        }
        let cap = (dim as f64).powi(2) * (1.0 + 1e-9);
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 || v > cap {
                return Err(Error::InvalidParameter(format!(
                    "T_{} = {v} outside [0, N^2] for N = {dim}",
                    i + 1
                )));
            }
        }
        Ok(Self { values, dim })
    }

    /// `T_n` values for `n = 1..=n_max`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `T_n` for one-based `n`, if inside the series.
    pub fn value(&self, n: u32) -> Option<f64> {
        if n == 0 {
            return None;
        }
        self.values.get(n as usize - 1).copied()
    }

    pub fn n_max(&self) -> u32 {
        self.values.len() as u32
    }

    /// The Hilbert-space dimension `N` behind the spectrum.
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Computes `T_1 .. T_{n_max}` in `O(N n_max)` by incrementally rotating
/// each eigenphase factor, instead of re-summing `exp(-i n phi)` from
/// scratch at every `n`.
pub fn form_factor_series(spectrum: &EigenphaseSpectrum, n_max: u32) -> FormFactorSeries {
    let dim = spectrum.dim();
    let steps: Vec<(f64, f64)> = spectrum
        .phases()
        .iter()
        .map(|&phi| {
            let (s, c) = (-phi).sin_cos();
            (c, s)
        })
        .collect();
    let mut rotors = steps.clone();
    let mut values = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for &(c, s) in &rotors {
            re += c;
            im += s;
        }
        values.push(re * re + im * im);
        for (rotor, &(sc, ss)) in rotors.iter_mut().zip(&steps) {
            let (rc, rs) = *rotor;
            *rotor = (rc * sc - rs * ss, rc * ss + rs * sc);
        }
    }
    FormFactorSeries { values, dim }
}

/// Wigner surmise evaluated without the domain guard. Used internally
/// where the formula is needed as a normalization curve beyond `n < N`.
pub(crate) fn surmise_raw(beta: Beta, n: u32, dim: usize) -> f64 {
    let nf = n as f64;
    let big_n = dim as f64;
    match beta {
        Beta::Poisson => big_n,
        Beta::Unitary => nf,
        Beta::Orthogonal => {
            let half = (big_n + 1.0) / 2.0;
            let sum: f64 = (1..=n).map(|m| 1.0 / (m as f64 + half)).sum();
            2.0 * nf - nf * sum
        }
        Beta::Symplectic => {
            // Symplectic spectra are deduplicated before any statistics
            // (one phase per Kramers doublet), so the mean quoted here is
            // for that spectrum. The textbook row for this class keeps the
            // doubled trace and divides |Tr|^2 by a single Kramers factor,
            // which is exactly twice this value.
            let sum: f64 = (1..=n).map(|m| 1.0 / (big_n + 0.5 - m as f64)).sum();
            0.5 * nf + 0.25 * nf * sum
        }
    }
}

/// Ensemble mean of `T_n` for Dyson index `beta`: `N` for the Poissonian
/// case (`beta = 0`), the Wigner surmise of the matching circular ensemble
/// otherwise.
///
/// `dim` counts the levels of the spectrum the statistic is computed on.
/// For the symplectic class that is the deduplicated spectrum, one level
/// per Kramers doublet, and the returned mean refers to the form factor
/// of that spectrum (half the doubled-trace convention).
///
/// The surmises hold in the regime `1 <= n < N`, which is enforced here.
pub fn wigner_surmise(beta: Beta, n: u32, dim: usize) -> Result<f64> {
    if n == 0 || (n as usize) >= dim {
        return Err(Error::InvalidParameter(format!(
            "surmise requires 1 <= n < N, got n = {n}, N = {dim}"
        )));
    }
    Ok(surmise_raw(beta, n, dim))
}

/// Reference mean used to normalize a form-factor window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// Regular spectra: `E T_n = N` for every `n`.
    Regular,
    /// Chaotic spectra: `E T_n` follows the Wigner surmise of this index.
    Chaotic(Beta),
}

impl Hypothesis {
    fn mean(self, n: u32, dim: usize) -> f64 {
        match self {
            Hypothesis::Regular => dim as f64,
            Hypothesis::Chaotic(beta) => surmise_raw(beta, n, dim),
        }
    }
}

/// Mean of `T_n / E T_n` over the inclusive window `[n_lo, n_hi]`.
///
/// Converges to 1 when the hypothesis matches the spectrum, with a
/// variance bounded by `1 / delta_n` where `delta_n` is the window length.
/// The surmise is evaluated as a formula even where `n` approaches or
/// exceeds `N`, so wide windows on small test spectra stay well defined.
pub fn ergodic_average(
    series: &FormFactorSeries,
    hypothesis: Hypothesis,
    window: (u32, u32),
) -> Result<f64> {
    let (n_lo, n_hi) = window;
    if n_lo < 1 || n_lo > n_hi || n_hi > series.n_max() {
        return Err(Error::Window(format!(
            "window [{n_lo}, {n_hi}] invalid for a series with n_max = {}",
            series.n_max()
        )));
    }
    let delta_n = (n_hi - n_lo + 1) as f64;
    let mut sum = 0.0;
    for n in n_lo..=n_hi {
        sum += series.value(n).expect("window checked") / hypothesis.mean(n, series.dim());
    }
    Ok(sum / delta_n)
}

/// Outcome of the spectral hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Chaotic,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Regular => "regular",
            Verdict::Chaotic => "chaotic",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Result of [`hypothesis_test`]: the two ergodic statistics and the
/// decision derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    /// `(1/delta_n) sum T_n / N`; near 1 for regular spectra.
    pub t0: f64,
    /// `(1/delta_n) sum T_n / n`; near 1 for chaotic spectra, near `k^2`
    /// for `k` identical chaotic subspaces.
    pub t1: f64,
    pub delta_n: u32,
    pub threshold_c: f64,
    pub decision: Verdict,
    /// Number of identical invariant subspaces when the decision is
    /// chaotic: `Some(1)` for a plain chaotic verdict, `Some(k)` when the
    /// `k^2 n` branch fired.
    pub k_estimate: Option<u32>,
}

/// Applies the decision rule to precomputed statistics.
///
/// Branches are checked in order: regular (`t0` within `c / sqrt(delta_n)`
/// of 1 while `t1` fails), plain chaotic (`t1` passes while `t0` fails),
/// then the subspace branch (`t1 / round(sqrt(t1))^2` passes with an
/// integer estimate of at least 2). Anything else, including both
/// statistics passing at once or non-finite inputs, is inconclusive.
fn decide(t0: f64, t1: f64, delta_n: u32, threshold_c: f64) -> (Verdict, Option<u32>) {
    let tol = threshold_c / (delta_n as f64).sqrt();
    let t0_pass = (t0 - 1.0).abs() <= tol;
    let t1_pass = (t1 - 1.0).abs() <= tol;
    if t0_pass && !t1_pass {
        return (Verdict::Regular, None);
    }
    if t1_pass && !t0_pass {
        return (Verdict::Chaotic, Some(1));
    }
    if !t1_pass && t1.is_finite() && t1 > 0.0 {
        let k = t1.sqrt().round();
        if k >= 2.0 && k <= u32::MAX as f64 && (t1 / (k * k) - 1.0).abs() <= tol {
            return (Verdict::Chaotic, Some(k as u32));
        }
    }
    (Verdict::Inconclusive, None)
}

/// The t0/t1 hypothesis test over the window `n = 1..=delta_n`, with the
/// default window guard `delta_n <= N / 10`.
pub fn hypothesis_test(
    series: &FormFactorSeries,
    delta_n: u32,
    threshold_c: f64,
) -> Result<HypothesisVerdict> {
    hypothesis_test_with_guard(series, delta_n, threshold_c, 0.1)
}

/// [`hypothesis_test`] with an explicit bound on `delta_n / N`.
///
/// The window must be small against the dimension for the surmise means to
/// apply; the default guard is one tenth. Studies on small spectra can
/// relax the fraction deliberately.
pub fn hypothesis_test_with_guard(
    series: &FormFactorSeries,
    delta_n: u32,
    threshold_c: f64,
    max_window_fraction: f64,
) -> Result<HypothesisVerdict> {
    if delta_n == 0 || delta_n > series.n_max() {
        return Err(Error::Window(format!(
            "delta_n = {delta_n} outside 1..={} supported by the series",
            series.n_max()
        )));
    }
    if !(max_window_fraction > 0.0) {
        return Err(Error::InvalidParameter("max_window_fraction must be positive".into()));
    }
    if delta_n as f64 > max_window_fraction * series.dim() as f64 {
        return Err(Error::Window(format!(
            "delta_n = {delta_n} too large for N = {}: the test requires delta_n <= {:.1} \
             (window fraction {max_window_fraction})",
            series.dim(),
            max_window_fraction * series.dim() as f64
        )));
    }
    if !threshold_c.is_finite() || threshold_c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold_c must be positive and finite, got {threshold_c}"
        )));
    }
    let t0 = ergodic_average(series, Hypothesis::Regular, (1, delta_n))?;
    let t1 = ergodic_average(series, Hypothesis::Chaotic(Beta::Unitary), (1, delta_n))?;
    let (decision, k_estimate) = decide(t0, t1, delta_n, threshold_c);
    Ok(HypothesisVerdict { t0, t1, delta_n, threshold_c, decision, k_estimate })
}

/// Planar random walk built from a spectrum: unit steps
/// `(cos phi_j, sin phi_j)` over the ascending-sorted eigenphases.
///
/// Regular spectra behave like a true random walk and wander a distance of
/// order `sqrt(N)`; the level repulsion of chaotic spectra spreads the
/// phases nearly uniformly, so the steps almost close a circle and the
/// walk ends near the origin. The endpoint length squared equals `T_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    points: Vec<(f64, f64)>,
}

impl WalkPath {
    /// The `N + 1` partial sums, starting at the origin.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn endpoint(&self) -> (f64, f64) {
        *self.points.last().expect("walk always has an origin")
    }

    /// Number of steps, equal to the spectrum dimension.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Builds the eigenphase walk of a spectrum.
pub fn eigenphase_walk(spectrum: &EigenphaseSpectrum) -> WalkPath {
    let mut points = Vec::with_capacity(spectrum.dim() + 1);
    let (mut x, mut y) = (0.0f64, 0.0f64);
    points.push((x, y));
    for &phi in spectrum.phases() {
        let (s, c) = phi.sin_cos();
        x += c;
        y += s;
        points.push((x, y));
    }
    WalkPath { points }
}

/// Collapses the doubly degenerate spectrum of a self-dual (CSE) matrix to
/// one phase per Kramers doublet.
///
/// Phases are paired greedily along the sorted spectrum; a doublet may
/// straddle the branch point at `pi`, so the two ends of the circle are
/// compared as well. Fails if any phase cannot be paired within
/// `pair_tol`, which signals a spectrum that is not doubly degenerate.
pub fn deduplicate_kramers(
    spectrum: &EigenphaseSpectrum,
    pair_tol: f64,
) -> Result<EigenphaseSpectrum> {
    let phases = spectrum.phases();
    if phases.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "Kramers deduplication needs an even level count, got {}",
            phases.len()
        )));
    }
    if !(pair_tol > 0.0) {
        return Err(Error::InvalidParameter("pair tolerance must be positive".into()));
    }
    let mut kept = Vec::with_capacity(phases.len() / 2);
    let mut leftovers: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < phases.len() {
        if i + 1 < phases.len() && phases[i + 1] - phases[i] <= pair_tol {
            kept.push(0.5 * (phases[i] + phases[i + 1]));
            i += 2;
        } else {
            leftovers.push(phases[i]);
            i += 1;
        }
    }
    // A doublet at the branch point shows up as one leftover near -pi and
    // one near +pi: the same level seen across the cut.
    if leftovers.len() == 2 {
        let gap_across = (leftovers[0] + PI) + (PI - leftovers[1]);
        if gap_across.abs() <= pair_tol {
            kept.push(leftovers[1] + 0.5 * gap_across);
            leftovers.clear();
        }
    }
    if !leftovers.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} eigenphase(s) had no Kramers partner within {pair_tol:e}; first: {:.6}",
            leftovers.len(),
            leftovers[0]
        )));
    }
    EigenphaseSpectrum::new(kept)
}
