//! Input squeezed coherent states and the target-state families.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{hermite_sequence, ln_factorials, powers, FockVector};
use crate::tolerances::{MAX_SQUEEZE_MATRIX, MAX_TAIL_MASS, R_MIN};

/// `|zeta, alpha> = D(alpha) S(zeta) |0>` with `zeta = r e^{i theta}` and
/// `alpha = alpha_abs e^{i phi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedCoherentParams {
    pub r: f64,
    pub theta: f64,
    pub alpha_abs: f64,
    pub phi: f64,
}

impl SqueezedCoherentParams {
    pub fn new(r: f64, theta: f64, alpha_abs: f64, phi: f64) -> Self {
        Self { r, theta, alpha_abs, phi }
    }

    pub fn vacuum() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn zeta(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.alpha_abs, self.phi)
    }

    /// `beta = alpha cosh r + alpha^* e^{i theta} sinh r`.
    pub fn beta(&self) -> Complex64 {
        let a = self.alpha();
        a * self.r.cosh() + a.conj() * Complex64::from_polar(1.0, self.theta) * self.r.sinh()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("squeezing r = {} must be >= 0", self.r)));
        }
        if !(self.alpha_abs >= 0.0 && self.alpha_abs.is_finite()) {
            return Err(Error::InvalidParameter(format!("|alpha| = {} must be >= 0", self.alpha_abs)));
        }
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::InvalidParameter("non-finite phase".into()));
        }
        Ok(())
    }
}

/// Exact number-basis amplitudes of `|zeta, alpha>` up to `cutoff`, not
/// renormalized. The second value is the retained probability.
///
/// For `r < R_MIN` the coherent-state series is used; otherwise
/// `c_n = e^{-|a|^2/2 - a*^2 e^{i theta} tanh(r)/2} / sqrt(cosh r)
///        (e^{i theta} tanh(r)/2)^{n/2} H_n(beta / sqrt(e^{i theta} sinh 2r)) / sqrt(n!)`
/// with both square roots of `e^{i theta}` taken as `e^{i theta/2}`.
pub fn squeezed_coherent_amplitudes(p: &SqueezedCoherentParams, cutoff: usize) -> Result<(Vec<Complex64>, f64)> {
    p.validate()?;
    let alpha = p.alpha();
    let mut amps = Vec::with_capacity(cutoff + 1);
    if p.r < R_MIN {
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        amps.push(c);
        for n in 1..=cutoff {
            c = c * alpha / (n as f64).sqrt();
            amps.push(c);
        }
    } else {
        let half_phase = Complex64::from_polar(1.0, 0.5 * p.theta);
        let e_theta = half_phase * half_phase;
        let tanh = p.r.tanh();
        let z = p.beta() / (half_phase * (2.0 * p.r).sinh().sqrt());
        let h = hermite_sequence(z, cutoff)?;
        let prefactor = (-0.5 * alpha.norm_sqr() - 0.5 * alpha.conj() * alpha.conj() * e_theta * tanh).exp()
            / p.r.cosh().sqrt();
        let w = half_phase * (0.5 * tanh).sqrt();
        let mut wn = prefactor;
        let mut inv_sqrt_fact = 1.0;
        for (n, hn) in h.iter().enumerate() {
            if n > 0 {
                wn *= w;
                inv_sqrt_fact /= (n as f64).sqrt();
            }
            let c = wn * hn * inv_sqrt_fact;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::HermiteOverflow { index: n });
            }
            amps.push(c);
        }
    }
    let retained = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok((amps, retained))
}

/// Normalized squeezed coherent state. Fails if more than
/// [`MAX_TAIL_MASS`] of the probability lies above the cutoff.
pub fn squeezed_coherent(p: &SqueezedCoherentParams, cutoff: usize) -> Result<FockVector> {
    let (amps, retained) = squeezed_coherent_amplitudes(p, cutoff)?;
    let tail = (1.0 - retained).max(0.0);
    if tail > MAX_TAIL_MASS {
        return Err(Error::TailMass { mass: tail, cutoff, limit: MAX_TAIL_MASS });
    }
    FockVector::new(amps).normalized()
}

/// `|p, M>_B`: amplitudes `sqrt(C(M,n) p^n (1-p)^{M-n})` for `n <= M`.
pub fn binomial_state(p: f64, m: usize, cutoff: usize) -> Result<FockVector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("binomial p = {p} outside [0, 1]")));
    }
    if m > cutoff {
        return Err(Error::InvalidParameter(format!("binomial M = {m} exceeds cutoff {cutoff}")));
    }
    let lnf = ln_factorials(m);
    let sp = powers(p.sqrt(), m);
    let sq = powers((1.0 - p).sqrt(), m);
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    for n in 0..=m {
        let c = (0.5 * (lnf[m] - lnf[n] - lnf[m - n])).exp() * sp[n] * sq[m - n];
        amps[n] = Complex64::new(c, 0.0);
    }
    FockVector::new(amps).normalized()
}

/// `|eta, M, varphi>_NB`: amplitudes `sqrt(C(M+n-1, n)) (eta e^{i varphi})^n`,
/// normalized over the retained levels.
pub fn negative_binomial_state(eta: f64, m: usize, varphi: f64, cutoff: usize) -> Result<FockVector> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("negative binomial eta = {eta} outside [0, 1)")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("negative binomial M must be >= 1".into()));
    }
    let lnf = ln_factorials(m + cutoff);
    let eta_pow = powers(eta, cutoff);
    let amps: Vec<Complex64> = (0..=cutoff)
        .map(|n| {
            let mag = (0.5 * (lnf[m + n - 1] - lnf[n] - lnf[m - 1])).exp() * eta_pow[n];
            Complex64::from_polar(mag, n as f64 * varphi)
        })
        .collect();
    // sum_n C(M+n-1, n) eta^{2n} = (1 - eta^2)^{-M}
    let retained: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * (1.0 - eta * eta).powi(m as i32);
    let tail = (1.0 - retained).max(0.0);
    if tail > MAX_TAIL_MASS {
        return Err(Error::TailMass { mass: tail, cutoff, limit: MAX_TAIL_MASS });
    }
    FockVector::new(amps).normalized()
}

/// `|alpha0, u, delta>_AS`: amplitudes proportional to
/// `alpha0^n / sqrt(n!) exp(-(delta - n)^2 / (2 u^2))`.
pub fn amplitude_squeezed_state(alpha0: f64, u: f64, delta: f64, cutoff: usize) -> Result<FockVector> {
    if !(alpha0 > 0.0 && u > 0.0 && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude squeezed parameters need alpha0 > 0, u > 0, delta >= 0 (got {alpha0}, {u}, {delta})"
        )));
    }
    let lnf = ln_factorials(cutoff);
    let ln_c: Vec<f64> = (0..=cutoff)
        .map(|n| {
            let nf = n as f64;
            nf * alpha0.ln() - 0.5 * lnf[n] - (delta - nf).powi(2) / (2.0 * u * u)
        })
        .collect();
    let peak = ln_c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v = FockVector::new(ln_c.iter().map(|l| Complex64::new((l - peak).exp(), 0.0)).collect()).normalized()?;
    let tail = v.tail_mass();
    if tail > MAX_TAIL_MASS {
        return Err(Error::TailMass { mass: tail, cutoff, limit: MAX_TAIL_MASS });
    }
    Ok(v)
}

/// Number-basis matrix `<m|S(zeta)|n>` of `S(zeta) = exp((zeta^* a^2 - zeta a'^2)/2)`
/// from the disentangled form
/// `exp(-e^{i theta} tanh(r) a'^2/2) cosh(r)^{-(a'a + 1/2)} exp(e^{-i theta} tanh(r) a^2/2)`.
///
/// Entries are exact; only the column norms suffer from truncation.
pub fn squeeze_operator_matrix(zeta: Complex64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let r = zeta.norm();
    if !(r <= MAX_SQUEEZE_MATRIX) {
        return Err(Error::Truncation(format!("|zeta| = {r} exceeds {MAX_SQUEEZE_MATRIX}")));
    }
    let theta = zeta.arg();
    let d = cutoff + 1;
    let lnf = ln_factorials(cutoff);
    let half_tanh = powers(0.5 * r.tanh(), cutoff);
    let sech = powers(1.0 / r.cosh(), cutoff);
    let root_sech = (1.0 / r.cosh()).sqrt();
    let mut s = DMatrix::<Complex64>::zeros(d, d);
    for m in 0..d {
        for n in (m % 2..d).step_by(2) {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (m % 2..=m.min(n)).step_by(2) {
                let i = (m - k) / 2;
                let j = (n - k) / 2;
                let ln_mag = 0.5 * (lnf[m] + lnf[n]) - lnf[k] - lnf[i] - lnf[j];
                let mag = ln_mag.exp() * half_tanh[i + j] * sech[k];
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += Complex64::from_polar(sign * mag, theta * (i as f64 - j as f64));
            }
            s[(m, n)] = acc * root_sech;
        }
    }
    Ok(s)
}

/// Number-basis matrix of `D(alpha) = exp(alpha a' - alpha^* a)` from the
/// normal-ordered form `e^{-|alpha|^2/2} e^{alpha a'} e^{-alpha^* a}`.
pub fn displacement_operator_matrix(alpha: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let lnf = ln_factorials(cutoff);
    let gauss = (-0.5 * alpha.norm_sqr()).exp();
    let minus_conj = -alpha.conj();
    DMatrix::from_fn(d, d, |m, n| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=m.min(n) {
            let mag = (0.5 * (lnf[m] + lnf[n]) - lnf[j] - lnf[m - j] - lnf[n - j]).exp();
            acc += mag * alpha.powu((m - j) as u32) * minus_conj.powu((n - j) as u32);
        }
        acc * gauss
    })
}

/// `S(zeta) (|0> + chi' 3/(2 sqrt 2) |1> + chi' sqrt(3)/2 |3>)`, normalized.
pub fn resource_state(zeta: Complex64, chi: Complex64, cutoff: usize) -> Result<FockVector> {
    if cutoff < 3 {
        return Err(Error::InvalidParameter("resource state needs cutoff >= 3".into()));
    }
    let mut seed = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    seed[0] = Complex64::new(1.0, 0.0);
    seed[1] = chi * (3.0 / (2.0 * 2f64.sqrt()));
    seed[3] = chi * (3f64.sqrt() / 2.0);
    let seed = FockVector::new(seed).normalized()?;
    let s = squeeze_operator_matrix(zeta, cutoff)?;
    let squeezed: Vec<Complex64> = (0..=cutoff)
        .map(|m| [0usize, 1, 3].iter().map(|&n| s[(m, n)] * seed.amps()[n]).sum())
        .collect();
    let out = FockVector::new(squeezed);
    let tail = (1.0 - out.norm_sqr()).max(0.0);
    if tail > MAX_TAIL_MASS {
        return Err(Error::TailMass { mass: tail, cutoff, limit: MAX_TAIL_MASS });
    }
    out.normalized()
}

/// Normalized superposition with the given amplitudes for `|0>, |1>, ...`.
pub fn adhoc_superposition(coeffs: &[Complex64], cutoff: usize) -> Result<FockVector> {
    if coeffs.len() > cutoff + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients do not fit under cutoff {cutoff}",
            coeffs.len()
        )));
    }
    if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::InvalidParameter("ad hoc superposition needs a nonzero coefficient".into()));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    amps[..coeffs.len()].copy_from_slice(coeffs);
    FockVector::new(amps).normalized()
}

/// Target-state family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Binomial {
        p: f64,
        m: usize,
    },
    NegativeBinomial {
        eta_nb: f64,
        m: usize,
        varphi: f64,
    },
    AmplitudeSqueezed {
        alpha0: f64,
        u: f64,
        delta_as: f64,
    },
    /// `zeta` and `chi_prime` are `[re, im]` pairs.
    Resource {
        zeta: [f64; 2],
        chi_prime: [f64; 2],
    },
    AdHoc {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl TargetSpec {
    pub fn build(&self, cutoff: usize) -> Result<FockVector> {
        match self {
            TargetSpec::Binomial { p, m } => binomial_state(*p, *m, cutoff),
            TargetSpec::NegativeBinomial { eta_nb, m, varphi } => negative_binomial_state(*eta_nb, *m, *varphi, cutoff),
            TargetSpec::AmplitudeSqueezed { alpha0, u, delta_as } => {
                amplitude_squeezed_state(*alpha0, *u, *delta_as, cutoff)
            }
            TargetSpec::Resource { zeta, chi_prime } => resource_state(
                Complex64::new(zeta[0], zeta[1]),
                Complex64::new(chi_prime[0], chi_prime[1]),
                cutoff,
            ),
            TargetSpec::AdHoc { re, im } => {
                if im.len() > re.len() {
                    return Err(Error::InvalidParameter("ad hoc `im` longer than `re`".into()));
                }
                let coeffs: Vec<Complex64> = re
                    .iter()
                    .enumerate()
                    .map(|(k, r)| Complex64::new(*r, im.get(k).copied().unwrap_or(0.0)))
                    .collect();
                adhoc_superposition(&coeffs, cutoff)
            }
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Binomial { p, m } => write!(f, "|{p},{m}>_B"),
            TargetSpec::NegativeBinomial { eta_nb, m, varphi } => write!(f, "|{eta_nb},{m},{varphi:.4}>_NB"),
            TargetSpec::AmplitudeSqueezed { alpha0, u, delta_as } => write!(f, "|{alpha0:.4},{u},{delta_as}>_AS"),
            TargetSpec::Resource { zeta, chi_prime } => {
                let z = Complex64::new(zeta[0], zeta[1]);
                let c = Complex64::new(chi_prime[0], chi_prime[1]);
                write!(f, "|Psi({z},{c})>_RS")
            }
            TargetSpec::AdHoc { re, im } => {
                write!(f, "adhoc(")?;
                for (k, r) in re.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    match im.get(k) {
                        Some(i) if *i != 0.0 => write!(f, "{}", Complex64::new(*r, *i))?,
                        _ => write!(f, "{r}")?,
                    }
                }
                write!(f, ")")
            }
        }
    }
}
