//! The conditional-preparation scheme: two squeezed coherent inputs meet on
//! a beam splitter of transmittance `T`, one output port is measured (single
//! photon detection or rotated-quadrature homodyne detection) and the other
//! port carries the heralded state.
//!
//! Two independent routes compute the heralded state:
//!
//! * the closed-form photon-number expansions ([`output_spd_closed_form`],
//!   [`output_hm_closed_form`]), summed directly over input photon numbers;
//! * the explicit pipeline ([`output_oracle`]): build both inputs, tensor,
//!   apply the beam-splitter unitary, project the measured mode.
//!
//! Both truncate identically: inputs are renormalized on `|0>..|N>` and only
//! two-mode amplitudes with total photon number `n + m <= N` survive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_apply, fidelity, hermite_functions, i_pow, ln_binomial, ln_factorials, powers, project_fock,
    project_quadrature, tensor, BeamSplitter, FockVector, Mode, PhaseConvention, StateRef, TwoModeState,
};
use crate::quadrature;
use crate::states::{squeezed_coherent_amplitudes, SqueezedCoherentParams};
use crate::tolerances::{DEFAULT_CUTOFF, MAX_CUTOFF, MAX_TAIL_MASS, R_MIN};

/// Measurement performed on the first output port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement {
    /// Heralding on exactly one detected photon.
    Spd,
    /// Heralding on the quadrature `X_lambda` reading `x`; outcomes within
    /// `x +- window_halfwidth` are accepted.
    Hm { x: f64, lambda: f64, window_halfwidth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    Spd,
    Hm,
}

impl Measurement {
    pub fn kind(&self) -> MeasurementKind {
        match self {
            Measurement::Spd => MeasurementKind::Spd,
            Measurement::Hm { .. } => MeasurementKind::Hm,
        }
    }
}

/// Physical settings of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub in1: SqueezedCoherentParams,
    pub in2: SqueezedCoherentParams,
    pub transmittance: f64,
    pub measurement: Measurement,
}

/// Search ranges of the optimizer; phases are free on `[0, 2 pi)`.
pub mod bounds {
    pub const R: (f64, f64) = (0.0, 1.7);
    pub const ALPHA: (f64, f64) = (0.0, 4.0);
    pub const T: (f64, f64) = (0.1, 0.9);
    pub const X: (f64, f64) = (0.0, 4.0);
}

impl SchemeParams {
    pub fn spd(in1: SqueezedCoherentParams, in2: SqueezedCoherentParams, transmittance: f64) -> Self {
        Self { in1, in2, transmittance, measurement: Measurement::Spd }
    }

    pub fn hm(
        in1: SqueezedCoherentParams,
        in2: SqueezedCoherentParams,
        transmittance: f64,
        x: f64,
        lambda: f64,
        window_halfwidth: f64,
    ) -> Self {
        Self { in1, in2, transmittance, measurement: Measurement::Hm { x, lambda, window_halfwidth } }
    }

    /// Physical validity: what every evaluation requires.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.transmittance) {
            return Err(Error::InvalidParameter(format!("T = {} outside [0, 1]", self.transmittance)));
        }
        for p in [&self.in1, &self.in2] {
            if !(p.r >= 0.0 && p.alpha_abs >= 0.0) || ![p.r, p.theta, p.alpha_abs, p.phi].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter(format!("invalid input state {p:?}")));
            }
        }
        if let Measurement::Hm { x, lambda, window_halfwidth } = self.measurement {
            if !(x.is_finite() && lambda.is_finite() && window_halfwidth >= 0.0 && window_halfwidth.is_finite()) {
                return Err(Error::InvalidParameter("invalid homodyne settings".into()));
            }
        }
        Ok(())
    }

    /// The optimizer's search box: `0 <= r <= 1.7`, `0 <= |alpha| <= 4`,
    /// `0.1 <= T <= 0.9`, `0 <= x <= 4`.
    pub fn check_search_bounds(&self) -> Result<()> {
        self.validate()?;
        let inside = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
        for (k, p) in [(1, &self.in1), (2, &self.in2)] {
            if !inside(p.r, bounds::R) {
                return Err(Error::InvalidParameter(format!("r{k} = {} outside [0, 1.7]", p.r)));
            }
            if !inside(p.alpha_abs, bounds::ALPHA) {
                return Err(Error::InvalidParameter(format!("alpha{k} = {} outside [0, 4]", p.alpha_abs)));
            }
        }
        if !inside(self.transmittance, bounds::T) {
            return Err(Error::InvalidParameter(format!("T = {} outside [0.1, 0.9]", self.transmittance)));
        }
        if let Measurement::Hm { x, window_halfwidth, .. } = self.measurement {
            if !inside(x, bounds::X) {
                return Err(Error::InvalidParameter(format!("x = {x} outside [0, 4]")));
            }
            if !(window_halfwidth > 0.0) {
                return Err(Error::InvalidParameter("window half-width must be > 0".into()));
            }
        }
        Ok(())
    }

    fn min_squeezing(&self) -> f64 {
        self.in1.r.min(self.in2.r)
    }
}

/// Cutoff plus the largest truncated probability mass accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub cutoff: usize,
    pub max_tail_mass: f64,
}

impl Truncation {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, max_tail_mass: MAX_TAIL_MASS }
    }

    /// Same cutoff, any tail accepted. For comparing two routes that
    /// truncate identically.
    pub fn unchecked(cutoff: usize) -> Self {
        Self { cutoff, max_tail_mass: f64::INFINITY }
    }

    pub fn with_tolerance(cutoff: usize, max_tail_mass: f64) -> Self {
        Self { cutoff, max_tail_mass }
    }

    fn validate(&self) -> Result<()> {
        if self.cutoff < 1 || self.cutoff > MAX_CUTOFF {
            return Err(Error::InvalidParameter(format!("cutoff {} outside [1, {MAX_CUTOFF}]", self.cutoff)));
        }
        Ok(())
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self::new(DEFAULT_CUTOFF)
    }
}

/// Which beam-splitter phase convention and which output port is measured.
/// The default is the pairing that the closed forms correspond to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub splitter: PhaseConvention,
    pub measured: Mode,
}

impl Default for Conventions {
    fn default() -> Self {
        Self { splitter: PhaseConvention::Symmetric, measured: Mode::First }
    }
}

/// Heralded state of the unmeasured port.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOutput {
    /// Normalized heralded state.
    pub state: FockVector,
    /// Squared norm before normalization: outcome probability for SPD,
    /// probability density at `x` for HM.
    pub raw_weight: f64,
    /// Fraction of the two-mode input state not represented at this cutoff.
    pub truncation_loss: f64,
}

struct Inputs {
    c1: Vec<Complex64>,
    c2: Vec<Complex64>,
    loss: f64,
}

/// Truncated, renormalized input amplitudes and the overall truncation loss
/// `1 - M1 M2 R`, with `M_j` the retained single-mode masses and `R` the
/// joint mass on `n + m <= N` after renormalization.
fn prepare_inputs(p: &SchemeParams, trunc: &Truncation) -> Result<Inputs> {
    p.validate()?;
    trunc.validate()?;
    let n = trunc.cutoff;
    let (mut c1, m1) = squeezed_coherent_amplitudes(&p.in1, n)?;
    let (mut c2, m2) = squeezed_coherent_amplitudes(&p.in2, n)?;
    for (c, m) in [(&mut c1, m1), (&mut c2, m2)] {
        if !(m > 0.0) {
            return Err(Error::ZeroVector);
        }
        let s = 1.0 / m.sqrt();
        c.iter_mut().for_each(|a| *a *= s);
    }
    // joint mass on n1 + n2 <= N via the cumulative mass of input 2
    let mut cum2 = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    for a in &c2 {
        acc += a.norm_sqr();
        cum2.push(acc);
    }
    let joint: f64 = c1.iter().enumerate().map(|(k, a)| a.norm_sqr() * cum2[n - k]).sum();
    let loss = (1.0 - m1.min(1.0) * m2.min(1.0) * joint.min(1.0)).max(0.0);
    if loss > trunc.max_tail_mass {
        return Err(Error::TailMass { mass: loss, cutoff: n, limit: trunc.max_tail_mass });
    }
    Ok(Inputs { c1, c2, loss })
}

/// Truncation loss of the inputs at `cutoff`, without building any output.
pub fn truncation_loss(p: &SchemeParams, cutoff: usize) -> Result<f64> {
    prepare_inputs(p, &Truncation::unchecked(cutoff)).map(|i| i.loss)
}

/// Smallest cutoff from `start` upward (steps of 10) at which the truncation
/// loss is at most `max_tail_mass`.
pub fn required_cutoff(p: &SchemeParams, start: usize, max_tail_mass: f64) -> Result<usize> {
    let mut cutoff = start.max(1);
    loop {
        let loss = truncation_loss(p, cutoff)?;
        if loss <= max_tail_mass {
            return Ok(cutoff);
        }
        if cutoff + 10 > MAX_CUTOFF {
            return Err(Error::TailMass { mass: loss, cutoff, limit: max_tail_mass });
        }
        cutoff += 10;
    }
}

fn finish(amps: Vec<Complex64>, loss: f64) -> Result<ConditionalOutput> {
    let raw = FockVector::new(amps);
    let raw_weight = raw.norm_sqr();
    if !raw_weight.is_finite() {
        return Err(Error::HermiteOverflow { index: raw.cutoff() });
    }
    let state = raw.normalized()?;
    Ok(ConditionalOutput { state, raw_weight, truncation_loss: loss })
}

fn require_closed_form_squeezing(p: &SchemeParams) -> Result<()> {
    let r = p.min_squeezing();
    if r < R_MIN {
        return Err(Error::SingularSqueezing { r });
    }
    Ok(())
}

/// Heralded state for single-photon detection from the closed-form
/// expansion
///
/// `sum_{n,m,k} i^{2k-n+1} c1_n/sqrt(n!) c2_m/sqrt(m!) B_k^n(T) B_{n+m-k-1}^m(1-T) sqrt((n+m-1)!) |n+m-1>`
///
/// with `B_p^q(x) = C(q,p) sqrt(x)^{q-p} sqrt(1-x)^p`. Only `k = n-1` and
/// `k = n` give in-range binomials, so the sum is quadratic in the cutoff.
pub fn output_spd_closed_form(p: &SchemeParams, trunc: &Truncation) -> Result<ConditionalOutput> {
    if p.measurement != Measurement::Spd {
        return Err(Error::InvalidParameter("SPD closed form needs an SPD measurement".into()));
    }
    require_closed_form_squeezing(p)?;
    let inputs = prepare_inputs(p, trunc)?;
    let cutoff = trunc.cutoff;
    let lnf = ln_factorials(cutoff);
    let t = powers(p.transmittance.sqrt(), cutoff);
    let r = powers((1.0 - p.transmittance).max(0.0).sqrt(), cutoff);
    let mut out = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    for n in 0..=cutoff {
        for m in 0..=(cutoff - n) {
            if n + m == 0 {
                continue;
            }
            let q = n + m - 1;
            let c = inputs.c1[n] * inputs.c2[m];
            for k in n.saturating_sub(1)..=n {
                // photons of input 2 reaching the heralded port
                let j = match (n + m).checked_sub(k + 1) {
                    Some(j) if j <= m => j,
                    _ => continue,
                };
                let ln_mag = ln_binomial(&lnf, n, k) + ln_binomial(&lnf, m, j) + 0.5 * (lnf[q] - lnf[n] - lnf[m]);
                let b = t[n - k] * r[k] * r[m - j] * t[j];
                out[q] += c * i_pow(2 * k as i64 - n as i64 + 1) * (ln_mag.exp() * b);
            }
        }
    }
    finish(out, inputs.loss)
}

/// Heralded state for homodyne detection from the closed-form quadruple sum
/// over input photon numbers `n, m` and heralded-port contributions `k, l`:
///
/// `c1_n c2_m / sqrt(n! m!) B_k^n(T) B_l^m(1-T) i^{m+k+l} (-1)^l e^{-i lambda p} sqrt(p!) <x|p> sqrt(q!) |q>`
///
/// where `p = n + m - k - l` photons hit the detector and `q = k + l` the
/// heralded port. `sqrt(p!) <x|p>` collects the `pi^{-1/4} e^{-x^2/2} H_p(x)`
/// and power-of-two factors of the textbook form.
pub fn output_hm_closed_form(p: &SchemeParams, trunc: &Truncation) -> Result<ConditionalOutput> {
    let Measurement::Hm { x, lambda, .. } = p.measurement else {
        return Err(Error::InvalidParameter("HM closed form needs an HM measurement".into()));
    };
    require_closed_form_squeezing(p)?;
    let inputs = prepare_inputs(p, trunc)?;
    let cutoff = trunc.cutoff;
    let lnf = ln_factorials(cutoff);
    let t = powers(p.transmittance.sqrt(), cutoff);
    let r = powers((1.0 - p.transmittance).max(0.0).sqrt(), cutoff);
    let psi = hermite_functions(x, cutoff);
    let sqrt_fact: Vec<f64> = lnf.iter().map(|l| (0.5 * l).exp()).collect();
    // detector factor sqrt(p!) <x|p> e^{-i lambda p}
    let det: Vec<Complex64> = (0..=cutoff)
        .map(|k| Complex64::from_polar(psi[k] * sqrt_fact[k], -(k as f64) * lambda))
        .collect();

    // per-input factors indexed [photons to detector][photons to heralded port]
    let d = cutoff + 1;
    let mut f1 = vec![Complex64::new(0.0, 0.0); d * d];
    let mut f2 = vec![Complex64::new(0.0, 0.0); d * d];
    for n in 0..d {
        for k in 0..=n {
            let mag = (ln_binomial(&lnf, n, k) - 0.5 * lnf[n]).exp() * t[n - k] * r[k];
            f1[(n - k) * d + k] = inputs.c1[n] * i_pow(k as i64) * mag;
        }
    }
    for m in 0..d {
        for l in 0..=m {
            let mag = (ln_binomial(&lnf, m, l) - 0.5 * lnf[m]).exp() * r[m - l] * t[l];
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            f2[(m - l) * d + l] = inputs.c2[m] * i_pow((m + l) as i64) * (sign * mag);
        }
    }

    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for j1 in 0..d {
        for k in 0..(d - j1) {
            let a = f1[j1 * d + k];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let room = cutoff - j1 - k;
            for j2 in 0..=room {
                let ad = a * det[j1 + j2];
                let row = &f2[j2 * d..j2 * d + (room - j2) + 1];
                for (l, b) in row.iter().enumerate() {
                    out[k + l] += ad * b;
                }
            }
        }
    }
    for (q, o) in out.iter_mut().enumerate() {
        *o *= sqrt_fact[q];
    }
    finish(out, inputs.loss)
}

/// Closed-form output for whichever measurement `p` carries.
pub fn output_closed_form(p: &SchemeParams, trunc: &Truncation) -> Result<ConditionalOutput> {
    match p.measurement {
        Measurement::Spd => output_spd_closed_form(p, trunc),
        Measurement::Hm { .. } => output_hm_closed_form(p, trunc),
    }
}

/// Two-mode state after the beam splitter, with the truncation loss.
pub fn two_mode_output(p: &SchemeParams, trunc: &Truncation, conv: &Conventions) -> Result<(TwoModeState, f64)> {
    let inputs = prepare_inputs(p, trunc)?;
    let a = FockVector::new(inputs.c1);
    let b = FockVector::new(inputs.c2);
    let s = tensor(&a, &b)?;
    let bs = BeamSplitter::new(p.transmittance, conv.splitter)?;
    let (out, _dropped) = beam_splitter_apply(&s, &bs);
    Ok((out, inputs.loss))
}

/// Heralded state from first principles: inputs, tensor product, beam
/// splitter, projection of the measured port. Handles `r = 0` exactly.
pub fn output_oracle(p: &SchemeParams, trunc: &Truncation) -> Result<ConditionalOutput> {
    output_oracle_with(p, trunc, &Conventions::default())
}

pub fn output_oracle_with(p: &SchemeParams, trunc: &Truncation, conv: &Conventions) -> Result<ConditionalOutput> {
    let (s, loss) = two_mode_output(p, trunc, conv)?;
    let (v, _) = match p.measurement {
        Measurement::Spd => project_fock(&s, conv.measured, 1)?,
        Measurement::Hm { x, lambda, .. } => project_quadrature(&s, conv.measured, x, lambda),
    };
    finish(v.into_amps(), loss)
}

/// Closed form when it applies, the oracle pipeline below `R_MIN`.
pub fn output(p: &SchemeParams, trunc: &Truncation) -> Result<ConditionalOutput> {
    if p.min_squeezing() < R_MIN {
        output_oracle(p, trunc)
    } else {
        output_closed_form(p, trunc)
    }
}

/// `1 - |<out|target>|^2`, or `1 - <target|rho|target>` for mixed outputs.
pub fn misfit<'a>(out: impl Into<StateRef<'a>>, target: &FockVector) -> Result<f64> {
    Ok((1.0 - fidelity(target, out)?).clamp(0.0, 1.0))
}

/// `Tr(rho_3 |1><1|)`.
pub fn success_prob_spd(p: &SchemeParams, trunc: &Truncation) -> Result<f64> {
    if p.measurement != Measurement::Spd {
        return Err(Error::InvalidParameter("SPD success probability needs an SPD measurement".into()));
    }
    let conv = Conventions::default();
    let (s, _) = two_mode_output(p, trunc, &conv)?;
    Ok(project_fock(&s, conv.measured, 1)?.1)
}

/// Probability density `<x|rho_3|x>` of the measured quadrature.
pub fn quadrature_density(s: &TwoModeState, measured: Mode, x: f64, lambda: f64) -> f64 {
    project_quadrature(s, measured, x, lambda).1
}

fn window_probability(s: &TwoModeState, measured: Mode, lambda: f64, lo: f64, hi: f64) -> Result<f64> {
    quadrature::integrate(lo, hi, |x| quadrature_density(s, measured, x, lambda))
}

/// Probability of a quadrature reading inside `x +- window_halfwidth`.
pub fn success_prob_hm(p: &SchemeParams, trunc: &Truncation) -> Result<f64> {
    let Measurement::Hm { x, lambda, window_halfwidth } = p.measurement else {
        return Err(Error::InvalidParameter("HM success probability needs an HM measurement".into()));
    };
    let conv = Conventions::default();
    let (s, _) = two_mode_output(p, trunc, &conv)?;
    Ok(window_probability(&s, conv.measured, lambda, x - window_halfwidth, x + window_halfwidth)?.clamp(0.0, 1.0))
}

/// Probability of a quadrature reading anywhere in `[lo, hi]`.
pub fn window_prob_hm(p: &SchemeParams, trunc: &Truncation, lo: f64, hi: f64) -> Result<f64> {
    let Measurement::Hm { lambda, .. } = p.measurement else {
        return Err(Error::InvalidParameter("window probability needs an HM measurement".into()));
    };
    let conv = Conventions::default();
    let (s, _) = two_mode_output(p, trunc, &conv)?;
    window_probability(&s, conv.measured, lambda, lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subrange {
    pub lo: f64,
    pub hi: f64,
    pub misfit: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageMisfit {
    pub value: f64,
    pub subranges: Vec<Subrange>,
}

/// Probability-weighted misfit over the accepted homodyne window, split
/// into `n_subranges` equal pieces; each piece is scored at its midpoint.
pub fn average_misfit(
    p: &SchemeParams,
    target: &FockVector,
    n_subranges: usize,
    trunc: &Truncation,
) -> Result<AverageMisfit> {
    let Measurement::Hm { x, lambda, window_halfwidth } = p.measurement else {
        return Err(Error::InvalidParameter("average misfit needs an HM measurement".into()));
    };
    if n_subranges == 0 {
        return Err(Error::InvalidParameter("need at least one subrange".into()));
    }
    let conv = Conventions::default();
    let (s, _) = two_mode_output(p, trunc, &conv)?;
    let lo = x - window_halfwidth;
    let width = 2.0 * window_halfwidth / n_subranges as f64;
    let mut subranges = Vec::with_capacity(n_subranges);
    for j in 0..n_subranges {
        let a = lo + j as f64 * width;
        let b = a + width;
        let (v, _) = project_quadrature(&s, conv.measured, 0.5 * (a + b), lambda);
        let eps = misfit(&v.normalized()?, target)?;
        let prob = window_probability(&s, conv.measured, lambda, a, b)?;
        subranges.push(Subrange { lo: a, hi: b, misfit: eps, probability: prob });
    }
    let total: f64 = subranges.iter().map(|s| s.probability).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroVector);
    }
    let value = subranges.iter().map(|s| s.misfit * s.probability).sum::<f64>() / total;
    Ok(AverageMisfit { value, subranges })
}

/// Figures of merit of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub output: ConditionalOutput,
    pub misfit: f64,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
}

pub fn evaluate(p: &SchemeParams, target: &FockVector, n_subranges: usize, trunc: &Truncation) -> Result<Evaluation> {
    let output = output(p, trunc)?;
    let eps = misfit(&output.state, target)?;
    let (success_prob, eps_avg) = match p.measurement {
        Measurement::Spd => (success_prob_spd(p, trunc)?, None),
        Measurement::Hm { .. } => {
            (success_prob_hm(p, trunc)?, Some(average_misfit(p, target, n_subranges, trunc)?.value))
        }
    };
    Ok(Evaluation { output, misfit: eps, success_prob, eps_avg })
}
