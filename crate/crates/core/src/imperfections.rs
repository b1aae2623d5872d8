//! Photon loss and detector inefficiency, modeled as a beam splitter of
//! transmittance `eta` with vacuum in the unused port, and the sensitivity
//! sweeps built on top of it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_apply, ln_binomial, ln_factorials, partial_trace, powers, quadrature_wavefunctions, tensor,
    BeamSplitter, DensityMatrix, FockVector, Mode, StateRef,
};
use crate::scheme::{self, misfit, two_mode_output, Conventions, Measurement, SchemeParams, Truncation};

/// Efficiencies of the measured path and of the heralded (signal) path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImperfectionSpec {
    pub eta_det: f64,
    pub eta_signal: f64,
}

impl ImperfectionSpec {
    pub fn ideal() -> Self {
        Self { eta_det: 1.0, eta_signal: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta_det)?;
        check_eta(self.eta_signal)
    }
}

impl Default for ImperfectionSpec {
    fn default() -> Self {
        Self::ideal()
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("efficiency {eta} outside [0, 1]")));
    }
    Ok(())
}

/// `<n-k| E_k |n> = sqrt(C(n,k) eta^{n-k} (1-eta)^k)`, indexed `[k][n]`.
fn kraus_elements(eta: f64, cutoff: usize) -> Vec<Vec<f64>> {
    let lnf = ln_factorials(cutoff);
    let keep = powers(eta.sqrt(), cutoff);
    let lose = powers((1.0 - eta).sqrt(), cutoff);
    (0..=cutoff)
        .map(|k| {
            (0..=cutoff)
                .map(|n| if n < k { 0.0 } else { (0.5 * ln_binomial(&lnf, n, k)).exp() * keep[n - k] * lose[k] })
                .collect()
        })
        .collect()
}

/// Kraus operators of the loss channel as matrices.
pub fn loss_kraus_operators(eta: f64, cutoff: usize) -> Result<Vec<DMatrix<Complex64>>> {
    check_eta(eta)?;
    let el = kraus_elements(eta, cutoff);
    Ok((0..=cutoff)
        .map(|k| {
            DMatrix::from_fn(cutoff + 1, cutoff + 1, |a, b| {
                if b == a + k {
                    Complex64::new(el[k][b], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect())
}

/// Loss of transmittance `eta`.
///
/// Pure inputs are dilated: tensored with vacuum, sent through the beam
/// splitter and the ancilla traced out. Mixed inputs use the Kraus sum of
/// the same dilation.
pub fn loss_channel<'a>(input: impl Into<StateRef<'a>>, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    match input.into() {
        StateRef::Pure(v) => dilate_and_trace(v, eta),
        StateRef::Mixed(rho) => Ok(kraus_sum(rho, eta)),
    }
}

fn dilate_and_trace(v: &FockVector, eta: f64) -> Result<DensityMatrix> {
    let joint = tensor(v, &FockVector::vacuum(v.cutoff()))?;
    let (out, _) = beam_splitter_apply(&joint, &BeamSplitter::symmetric(eta)?);
    Ok(partial_trace(&out, Mode::Second))
}

fn kraus_sum(rho: &DensityMatrix, eta: f64) -> DensityMatrix {
    let cutoff = rho.cutoff();
    let d = cutoff + 1;
    let el = kraus_elements(eta, cutoff);
    let m = rho.matrix();
    let out = DMatrix::from_fn(d, d, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, ek) in el.iter().enumerate() {
            if a + k >= d || b + k >= d {
                break;
            }
            acc += m[(a + k, b + k)] * (ek[a + k] * ek[b + k]);
        }
        acc
    });
    DensityMatrix::from_matrix(out)
}

/// Mixed heralded state with imperfections.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyOutput {
    /// Normalized heralded state.
    pub state: DensityMatrix,
    /// Herald probability (SPD) or probability density at `x` (HM).
    pub herald_weight: f64,
    pub truncation_loss: f64,
}

/// Loss `eta_det` on the measured port before the projection and loss
/// `eta_signal` on the heralded port afterwards.
pub fn conditional_output_lossy(p: &SchemeParams, imp: &ImperfectionSpec, trunc: &Truncation) -> Result<LossyOutput> {
    imp.validate()?;
    let conv = Conventions::default();
    let (s, loss) = two_mode_output(p, trunc, &conv)?;
    let cutoff = trunc.cutoff;
    let d = cutoff + 1;
    let el = kraus_elements(imp.eta_det, cutoff);
    // <outcome| on the measured port, after E_k: bra_k[p] = <outcome|E_k|p>
    let outcome: Vec<Complex64> = match p.measurement {
        Measurement::Spd => {
            let mut b = vec![Complex64::new(0.0, 0.0); d];
            b[1] = Complex64::new(1.0, 0.0);
            b
        }
        Measurement::Hm { x, lambda, .. } => quadrature_wavefunctions(x, lambda, cutoff),
    };
    let amps = s.amps();
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for (k, ek) in el.iter().enumerate() {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        let mut any = false;
        for pp in k..d {
            let w = outcome[pp - k] * ek[pp];
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            any = true;
            for (q, vq) in v.iter_mut().enumerate() {
                *vq += w * amps[(pp, q)];
            }
        }
        if !any {
            continue;
        }
        for i in 0..d {
            if v[i].re == 0.0 && v[i].im == 0.0 {
                continue;
            }
            for j in 0..d {
                rho[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let unnormalized = DensityMatrix::from_matrix(rho);
    let herald_weight = unnormalized.trace();
    let conditioned = unnormalized.normalized()?;
    let state = if imp.eta_signal == 1.0 { conditioned } else { loss_channel(&conditioned, imp.eta_signal)? };
    Ok(LossyOutput { state, herald_weight, truncation_loss: loss })
}

/// One point of a sensitivity curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_var: f64,
    pub misfit_mean: f64,
    pub misfit_max: f64,
    pub herald_weight: f64,
}

/// How relative deviations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Each of the eight input parameters gets an independent factor in `[-1, 1]`.
    SignedUniform,
    /// Each parameter sits at a random end of its range, `+-1`.
    WorstCase,
}

fn perturb(p: &SchemeParams, u: &[f64; 8], d: f64) -> SchemeParams {
    let mut q = *p;
    for (input, u) in [(&mut q.in1, &u[0..4]), (&mut q.in2, &u[4..8])] {
        input.r = (input.r * (1.0 + d * u[0])).max(0.0);
        input.theta += 2.0 * PI * d * u[1];
        input.alpha_abs = (input.alpha_abs * (1.0 + d * u[2])).max(0.0);
        input.phi += 2.0 * PI * d * u[3];
    }
    q
}

/// Mean that returns the common value exactly when all entries agree.
fn stable_mean(values: &[f64]) -> f64 {
    let first = values[0];
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

/// Misfit under relative deviations of the eight input-state parameters.
///
/// Magnitudes `r`, `|alpha|` are scaled by `1 + d u`, phases shifted by
/// `2 pi d u`, with one draw `u` per sample shared by every `d`. The maximum
/// column is the running maximum over all grid points up to `d`: every such
/// perturbation lies inside the range allowed at `d`.
pub fn sweep_parameter_deviation(
    p: &SchemeParams,
    target: &FockVector,
    rel_devs: &[f64],
    sampling: Sampling,
    n_samples: usize,
    seed: u64,
    trunc: &Truncation,
) -> Result<Vec<SweepPoint>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be > 0".into()));
    }
    if rel_devs.iter().any(|d| !(0.0..=0.2).contains(d)) {
        return Err(Error::InvalidParameter("relative deviations must lie in [0, 0.2]".into()));
    }
    if rel_devs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("relative deviations must be sorted ascending".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<[f64; 8]> = (0..n_samples)
        .map(|_| {
            let mut u = [0.0; 8];
            for v in u.iter_mut() {
                *v = match sampling {
                    Sampling::SignedUniform => rng.gen_range(-1.0..=1.0),
                    Sampling::WorstCase => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
            }
            u
        })
        .collect();

    let mut envelope = f64::NEG_INFINITY;
    let mut points = Vec::with_capacity(rel_devs.len());
    for &d in rel_devs {
        let results: Result<Vec<(f64, f64)>> = draws
            .par_iter()
            .map(|u| {
                let q = perturb(p, u, d);
                let out = scheme::output(&q, trunc)?;
                Ok((misfit(&out.state, target)?, out.raw_weight))
            })
            .collect();
        let results = results?;
        let misfits: Vec<f64> = results.iter().map(|r| r.0).collect();
        let weights: Vec<f64> = results.iter().map(|r| r.1).collect();
        let local_max = misfits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        envelope = envelope.max(local_max);
        points.push(SweepPoint {
            sweep_var: d,
            misfit_mean: stable_mean(&misfits),
            misfit_max: envelope,
            herald_weight: stable_mean(&weights),
        });
    }
    Ok(points)
}

/// Which path an efficiency sweep degrades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyPath {
    #[default]
    Det,
    Signal,
    Both,
}

/// Misfit of the lossy heralded state for each efficiency in `eta_grid`.
pub fn sweep_efficiency(
    p: &SchemeParams,
    target: &FockVector,
    eta_grid: &[f64],
    which: EfficiencyPath,
    trunc: &Truncation,
) -> Result<Vec<SweepPoint>> {
    eta_grid
        .par_iter()
        .map(|&eta| {
            let imp = match which {
                EfficiencyPath::Det => ImperfectionSpec { eta_det: eta, eta_signal: 1.0 },
                EfficiencyPath::Signal => ImperfectionSpec { eta_det: 1.0, eta_signal: eta },
                EfficiencyPath::Both => ImperfectionSpec { eta_det: eta, eta_signal: eta },
            };
            let out = conditional_output_lossy(p, &imp, trunc)?;
            let eps = misfit(&out.state, target)?;
            Ok(SweepPoint { sweep_var: eta, misfit_mean: eps, misfit_max: eps, herald_weight: out.herald_weight })
        })
        .collect()
}
