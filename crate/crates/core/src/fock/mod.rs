//! Truncated Fock-space linear algebra for one and two optical modes.
//!
//! A cutoff `N` keeps the number states `|0> ..= |N>`. Two-mode states keep
//! the full `(N+1) x (N+1)` grid, but the beam splitter only retains
//! amplitudes with total photon number `n + m <= N`.

mod hermite;
mod splitter;

pub use hermite::{hermite_functions, hermite_sequence, quadrature_wavefunction, quadrature_wavefunctions};
pub(crate) use hermite::{i_pow, ln_binomial, ln_factorials, powers};
pub use splitter::{beam_splitter_apply, BeamSplitter, PhaseConvention};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{INPUT_NORM_TOL, TAIL_WINDOW};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure single-mode state as amplitudes over `|0> ..= |cutoff>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    /// Wraps raw amplitudes; the cutoff is `amps.len() - 1`.
    ///
    /// # Panics
    /// If `amps` is empty.
    pub fn new(amps: Vec<Complex64>) -> Self {
        assert!(!amps.is_empty(), "a Fock vector needs at least |0>");
        Self { amps }
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self { amps: vec![ZERO; cutoff + 1] }
    }

    /// The number state `|n>`.
    pub fn basis(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::InvalidParameter(format!("|{n}> exceeds cutoff {cutoff}")));
        }
        let mut v = Self::zeros(cutoff);
        v.amps[n] = ONE;
        Ok(v)
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut v = Self::zeros(cutoff);
        v.amps[0] = ONE;
        v
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        check_cutoffs(self.cutoff(), other.cutoff())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Scales to unit norm.
    pub fn normalized(&self) -> Result<FockVector> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { amps: self.amps.iter().map(|a| a * s).collect() })
    }

    /// Probability mass on the top [`TAIL_WINDOW`] retained levels.
    pub fn tail_mass(&self) -> f64 {
        let start = self.amps.len().saturating_sub(TAIL_WINDOW);
        self.amps[start..].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Same state embedded at a different cutoff; levels above the new cutoff
    /// are dropped.
    pub fn resized(&self, cutoff: usize) -> FockVector {
        let mut amps = vec![ZERO; cutoff + 1];
        for (dst, src) in amps.iter_mut().zip(&self.amps) {
            *dst = *src;
        }
        Self { amps }
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }
}

/// Which mode of a two-mode state an operation acts on. `First` is the row
/// index of [`TwoModeState`] (mode 3 after the beam splitter), `Second` the
/// column index (mode 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::First => Mode::Second,
            Mode::Second => Mode::First,
        }
    }
}

/// Pure two-mode state, `amps[(n, m)]` is the amplitude of `|n>|m>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: DMatrix<Complex64>,
}

impl TwoModeState {
    pub fn zeros(cutoff: usize) -> Self {
        Self { amps: DMatrix::zeros(cutoff + 1, cutoff + 1) }
    }

    /// # Panics
    /// If the matrix is not square.
    pub fn from_matrix(amps: DMatrix<Complex64>) -> Self {
        assert_eq!(amps.nrows(), amps.ncols(), "two-mode amplitude grid must be square");
        assert!(amps.nrows() > 0);
        Self { amps }
    }

    pub fn cutoff(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn amps(&self) -> &DMatrix<Complex64> {
        &self.amps
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.amps[(n, m)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Mass sitting on total photon number above the cutoff.
    pub fn mass_above_total(&self, total: usize) -> f64 {
        let d = self.cutoff() + 1;
        let mut acc = 0.0;
        for n in 0..d {
            for m in 0..d {
                if n + m > total {
                    acc += self.amps[(n, m)].norm_sqr();
                }
            }
        }
        acc
    }
}

/// `amps[(n, m)] = a[n] b[m]`.
pub fn tensor(a: &FockVector, b: &FockVector) -> Result<TwoModeState> {
    check_cutoffs(a.cutoff(), b.cutoff())?;
    let d = a.cutoff() + 1;
    Ok(TwoModeState { amps: DMatrix::from_fn(d, d, |n, m| a.amps[n] * b.amps[m]) })
}

/// Projects `measured` onto `|n>`. Returns the unnormalized state of the
/// other mode and its squared norm, the probability of the outcome.
pub fn project_fock(s: &TwoModeState, measured: Mode, n: usize) -> Result<(FockVector, f64)> {
    if n > s.cutoff() {
        return Err(Error::InvalidParameter(format!("outcome {n} exceeds cutoff {}", s.cutoff())));
    }
    let amps: Vec<Complex64> = match measured {
        Mode::First => s.amps.row(n).iter().copied().collect(),
        Mode::Second => s.amps.column(n).iter().copied().collect(),
    };
    let v = FockVector::new(amps);
    let p = v.norm_sqr();
    Ok((v, p))
}

/// Contracts `measured` with `<x|_lambda`. Returns the unnormalized state of
/// the other mode and the probability density of the outcome `x`.
pub fn project_quadrature(s: &TwoModeState, measured: Mode, x: f64, lambda: f64) -> (FockVector, f64) {
    let psi = quadrature_wavefunctions(x, lambda, s.cutoff());
    project_onto(s, measured, &psi)
}

/// Contracts `measured` with the bra whose components are `bra[p] = <b|p>`.
pub(crate) fn project_onto(s: &TwoModeState, measured: Mode, bra: &[Complex64]) -> (FockVector, f64) {
    let d = s.cutoff() + 1;
    let mut out = vec![ZERO; d];
    for p in 0..d {
        let w = bra[p];
        if w == ZERO {
            continue;
        }
        for (q, o) in out.iter_mut().enumerate() {
            let a = match measured {
                Mode::First => s.amps[(p, q)],
                Mode::Second => s.amps[(q, p)],
            };
            *o += w * a;
        }
    }
    let v = FockVector::new(out);
    let density = v.norm_sqr();
    (v, density)
}

/// Reduced state of the mode that is kept after tracing out `traced`.
pub fn partial_trace(s: &TwoModeState, traced: Mode) -> DensityMatrix {
    let rho = match traced {
        Mode::Second => &s.amps * s.amps.adjoint(),
        Mode::First => s.amps.transpose() * s.amps.map(|a| a.conj()),
    };
    DensityMatrix { rho }
}

/// Hermitian density operator over the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// # Panics
    /// If the matrix is not square.
    pub fn from_matrix(rho: DMatrix<Complex64>) -> Self {
        assert_eq!(rho.nrows(), rho.ncols(), "density matrix must be square");
        assert!(rho.nrows() > 0);
        Self { rho }
    }

    pub fn pure(v: &FockVector) -> Self {
        let d = v.cutoff() + 1;
        Self { rho: DMatrix::from_fn(d, d, |i, j| v.amps[i] * v.amps[j].conj()) }
    }

    /// `sum_k p_k |k><k|` over number states.
    pub fn diagonal_mixture(probs: &[f64], cutoff: usize) -> Result<Self> {
        if probs.len() > cutoff + 1 {
            return Err(Error::InvalidParameter("more weights than levels".into()));
        }
        let mut rho = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for (k, p) in probs.iter().enumerate() {
            rho[(k, k)] = Complex64::new(*p, 0.0);
        }
        Ok(Self { rho })
    }

    pub fn cutoff(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|c| c.re).collect()
    }

    pub fn normalized(&self) -> Result<DensityMatrix> {
        let t = self.trace();
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self { rho: self.rho.map(|c| c / t) })
    }

    /// `<v|rho|v>`.
    pub fn expectation(&self, v: &FockVector) -> Result<f64> {
        check_cutoffs(self.cutoff(), v.cutoff())?;
        let d = self.cutoff() + 1;
        let mut acc = ZERO;
        for i in 0..d {
            let vi = v.amps[i].conj();
            if vi == ZERO {
                continue;
            }
            for j in 0..d {
                acc += vi * self.rho[(i, j)] * v.amps[j];
            }
        }
        Ok(acc.re)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.cutoff() + 1;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.rho + self.rho.adjoint()).map(|c| c * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Frobenius distance to another density matrix.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        check_cutoffs(self.cutoff(), other.cutoff())?;
        Ok((&self.rho - &other.rho).norm())
    }
}

/// Borrowed pure or mixed state, the second argument of [`fidelity`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a FockVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a FockVector> for StateRef<'a> {
    fn from(v: &'a FockVector) -> Self {
        StateRef::Pure(v)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

/// `|<target|out>|^2` for pure `out`, `<target|rho|target>` for mixed.
/// Both arguments must be normalized.
pub fn fidelity<'a>(target: &FockVector, out: impl Into<StateRef<'a>>) -> Result<f64> {
    let tn = target.norm_sqr();
    if (tn - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr: tn });
    }
    match out.into() {
        StateRef::Pure(v) => {
            let n = v.norm_sqr();
            if (n - 1.0).abs() > INPUT_NORM_TOL {
                return Err(Error::NotNormalized { norm_sqr: n });
            }
            Ok(target.inner(v)?.norm_sqr())
        }
        StateRef::Mixed(rho) => {
            let t = rho.trace();
            if (t - 1.0).abs() > INPUT_NORM_TOL {
                return Err(Error::NotNormalized { norm_sqr: t });
            }
            rho.expectation(target)
        }
    }
}

pub(crate) fn check_cutoffs(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::CutoffMismatch { left, right });
    }
    Ok(())
}
