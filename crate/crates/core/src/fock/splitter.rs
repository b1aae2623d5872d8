use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{i_pow, ln_binomial, ln_factorials, powers, TwoModeState};
use crate::error::{Error, Result};

/// Phase convention of the lossless two-port.
///
/// With `t = sqrt(T)` and `r = sqrt(1 - T)` the input creation operators map to
///
/// * `Symmetric`: `a1' -> t a3' + i r a4'`, `a2' -> i r a3' + t a4'`
/// * `Real`: `a1' -> t a3' + r a4'`, `a2' -> -r a3' + t a4'`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    #[default]
    Symmetric,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmittance: f64,
    pub convention: PhaseConvention,
}

impl BeamSplitter {
    pub fn new(transmittance: f64, convention: PhaseConvention) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::InvalidParameter(format!(
                "transmittance {transmittance} outside [0, 1]"
            )));
        }
        Ok(Self { transmittance, convention })
    }

    pub fn symmetric(transmittance: f64) -> Result<Self> {
        Self::new(transmittance, PhaseConvention::Symmetric)
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }
}

/// Applies the beam splitter to a two-mode state. Photon number is conserved
/// term by term; input amplitudes with `n + m` above the cutoff have nowhere
/// to go and are dropped. Returns the output and the dropped mass.
pub fn beam_splitter_apply(s: &TwoModeState, bs: &BeamSplitter) -> (TwoModeState, f64) {
    let cutoff = s.cutoff();
    let d = cutoff + 1;
    let lnf = ln_factorials(cutoff);
    let t_pow = powers(bs.transmittance.sqrt(), cutoff);
    let r_pow = powers((1.0 - bs.transmittance).max(0.0).sqrt(), cutoff);

    let mut out = DMatrix::<Complex64>::zeros(d, d);
    let mut dropped = 0.0;
    for n in 0..d {
        for m in 0..d {
            let amp = s.get(n, m);
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            if n + m > cutoff {
                dropped += amp.norm_sqr();
                continue;
            }
            let ln_in = -0.5 * (lnf[n] + lnf[m]);
            for k in 0..=n {
                // k photons of input 1 leave through port 4
                let c1 = ln_binomial(&lnf, n, k);
                for l in 0..=m {
                    // l photons of input 2 leave through port 4
                    let p = n - k + m - l;
                    let q = k + l;
                    let ln_mag = ln_in + c1 + ln_binomial(&lnf, m, l) + 0.5 * (lnf[p] + lnf[q]);
                    let mag = ln_mag.exp() * t_pow[n - k] * t_pow[l] * r_pow[k] * r_pow[m - l];
                    let phase = match bs.convention {
                        PhaseConvention::Symmetric => i_pow((k + m - l) as i64),
                        PhaseConvention::Real => i_pow(2 * (m - l) as i64),
                    };
                    out[(p, q)] += amp * phase * mag;
                }
            }
        }
    }
    (TwoModeState::from_matrix(out), dropped)
}
