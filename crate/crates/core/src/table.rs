//! Built-in regression dataset of published optimization results, and
//! the rounding-aware check that re-derives them.
//!
//! Parameters are given to two decimals, so re-evaluating them only lands
//! near the published misfit; a short simplex polish recovers the rest.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optimizer::{self, FixedMask, OptimizationResult, SearchSpace, MAX_DIMS, PARAM_NAMES};
use crate::scheme::{MeasurementKind, SchemeParams};
use crate::states::TargetSpec;
use crate::tolerances::{AVG_SUBRANGES, DEFAULT_CUTOFF};

/// Dataset version; bump when rows change.
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub label: String,
    pub target: TargetSpec,
    pub misfit: f64,
    pub params: SchemeParams,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
    /// Parameters that were held fixed in the published search.
    pub fixed: Vec<String>,
    /// Part of the acceptance subset.
    pub designated: bool,
}

impl PublishedRow {
    pub fn kind(&self) -> MeasurementKind {
        self.params.measurement.kind()
    }

    pub fn mask(&self) -> FixedMask {
        let v = optimizer::encode(&self.params);
        let mut mask = FixedMask::none();
        for name in &self.fixed {
            let i = optimizer::param_index(name).expect("known parameter name");
            mask.pinned[i] = Some(v[i]);
        }
        mask
    }

    pub fn search_space(&self) -> SearchSpace {
        let space = match self.params.measurement {
            crate::scheme::Measurement::Spd => SearchSpace::spd(),
            crate::scheme::Measurement::Hm { window_halfwidth, .. } => SearchSpace::hm(window_halfwidth),
        };
        space.with_mask(self.mask())
    }
}

fn binomial(p: f64, m: usize) -> TargetSpec {
    TargetSpec::Binomial { p, m }
}

fn neg_binomial(eta_nb: f64, m: usize, varphi: f64) -> TargetSpec {
    TargetSpec::NegativeBinomial { eta_nb, m, varphi }
}

fn amp_squeezed(alpha0: f64, u: f64, delta_as: f64) -> TargetSpec {
    TargetSpec::AmplitudeSqueezed { alpha0, u, delta_as }
}

fn resource(zeta: [f64; 2], chi: f64) -> TargetSpec {
    TargetSpec::Resource { zeta, chi_prime: [chi, 0.0] }
}

fn adhoc(re: &[f64]) -> TargetSpec {
    TargetSpec::AdHoc { re: re.to_vec(), im: Vec::new() }
}

const BINOMIAL_PINS: &[&str] = &["r1", "alpha1", "r2", "alpha2"];
const NB_PINS: &[&str] = &["r1", "theta1", "alpha1", "phi1", "r2"];
const EQUAL_R_PINS: &[&str] = &["r1", "r2"];

struct Raw {
    label: &'static str,
    target: TargetSpec,
    misfit: f64,
    v: [f64; 9],
    /// x, lambda, delta, eps_avg
    hm: Option<[f64; 4]>,
    p: f64,
    fixed: &'static [&'static str],
    designated: bool,
}

#[allow(clippy::too_many_arguments)]
fn spd(label: &'static str, target: TargetSpec, misfit: f64, v: [f64; 9], p: f64, fixed: &'static [&'static str], designated: bool) -> Raw {
    Raw { label, target, misfit, v, hm: None, p, fixed, designated }
}

#[allow(clippy::too_many_arguments)]
fn hm(
    label: &'static str,
    target: TargetSpec,
    misfit: f64,
    v: [f64; 9],
    hm: [f64; 4],
    p: f64,
    fixed: &'static [&'static str],
    designated: bool,
) -> Raw {
    Raw { label, target, misfit, v, hm: Some(hm), p, fixed, designated }
}

impl Raw {
    fn into_row(self) -> PublishedRow {
        let v = self.v;
        let in1 = crate::states::SqueezedCoherentParams::new(v[0], v[1], v[2], v[3]);
        let in2 = crate::states::SqueezedCoherentParams::new(v[4], v[5], v[6], v[7]);
        let (params, eps_avg) = match self.hm {
            None => (SchemeParams::spd(in1, in2, v[8]), None),
            Some([x, lambda, delta, eps_avg]) => (SchemeParams::hm(in1, in2, v[8], x, lambda, delta), Some(eps_avg)),
        };
        PublishedRow {
            label: self.label.to_string(),
            target: self.target,
            misfit: self.misfit,
            params,
            success_prob: self.p,
            eps_avg,
            fixed: self.fixed.iter().map(|s| s.to_string()).collect(),
            designated: self.designated,
        }
    }
}

/// Every published row, in table order.
pub fn builtin_rows() -> Vec<PublishedRow> {
    let s3 = 3f64.sqrt();
    let rows = vec![
        hm("|0.3,7>_B", binomial(0.3, 7), 1.14e-4, [0.60, 3.90, 1.00, 4.26, 0.75, 3.62, 0.70, 0.48, 0.59], [0.60, 2.17, 0.17, 0.008], 0.125, BINOMIAL_PINS, false),
        spd("|0.3,7>_B", binomial(0.3, 7), 1.26e-4, [0.74, 3.50, 0.10, 2.14, 0.16, 4.43, 1.97, 0.08, 0.69], 0.318, &[], true),
        hm("|0.45,8>_B", binomial(0.45, 8), 8.06e-4, [0.45, 0.74, 0.34, 1.01, 0.45, 0.28, 1.97, 0.06, 0.90], [0.61, 0.04, 0.30, 0.008], 0.275, &[], true),
        spd("|0.45,8>_B", binomial(0.45, 8), 8.15e-4, [0.51, 3.22, 2.44, 4.95, 0.22, 6.18, 0.54, 5.58, 0.65], 0.079, &[], false),
        hm("|0.2,10>_B", binomial(0.2, 10), 1.66e-5, [0.60, 1.95, 1.00, 4.77, 0.75, 2.86, 0.70, 6.10, 0.49], [0.25, 0.56, 0.17, 0.009], 0.132, BINOMIAL_PINS, false),
        spd("|0.2,10>_B", binomial(0.2, 10), 1.88e-5, [0.16, 3.39, 0.49, 4.70, 0.09, 5.68, 1.51, 6.27, 0.47], 0.369, &[], true),
        hm("|0.4,15>_B", binomial(0.4, 15), 1.91e-4, [1.54, 1.08, 0.93, 3.06, 0.27, 0.28, 2.36, 0.09, 0.90], [0.73, 2.57, 0.30, 0.003], 0.527, &[], false),
        hm("|0.65,1,0>_NB", neg_binomial(0.65, 1, 0.0), 7.83e-4, [0.62, 0.13, 0.09, 0.25, 0.21, 0.90, 0.98, 0.02, 0.70], [0.23, 0.03, 0.20, 0.008], 0.265, &[], true),
        hm("|0.5,5,pi/4>_NB", neg_binomial(0.5, 5, FRAC_PI_4), 3.36e-5, [0.56, 0.72, 0.58, 0.34, 0.10, 0.07, 1.34, 0.59, 0.80], [0.24, 0.03, 0.30, 0.006], 0.362, &[], false),
        hm("|0.5,5,pi/4>_NB", neg_binomial(0.5, 5, FRAC_PI_4), 3.37e-5, [0.60, 1.57, 0.80, 3.14, 0.60, 2.36, 2.47, 0.69, 0.63], [1.55, 3.79, 0.18, 0.008], 0.065, NB_PINS, false),
        spd("|0.5,5,pi/4>_NB", neg_binomial(0.5, 5, FRAC_PI_4), 3.40e-5, [0.06, 1.17, 2.11, 5.44, 0.19, 4.78, 0.08, 3.16, 0.65], 0.159, &[], true),
        hm("|0.75,6,pi/2>_NB", neg_binomial(0.75, 6, FRAC_PI_2), 3.53e-4, [0.60, 1.57, 0.80, 3.14, 0.60, 0.46, 3.04, 1.53, 0.86], [2.60, 3.67, 0.23, 0.009], 0.146, NB_PINS, false),
        spd("|0.75,6,pi/2>_NB", neg_binomial(0.75, 6, FRAC_PI_2), 4.96e-4, [0.43, 2.45, 0.12, 5.57, 0.45, 0.32, 3.21, 1.63, 0.72], 0.200, &[], false),
        hm("|0.45,10,0>_NB", neg_binomial(0.45, 10, 0.0), 8.84e-6, [0.60, 6.14, 1.00, 4.44, 0.75, 4.98, 0.70, 5.57, 0.58], [0.76, 3.27, 0.16, 0.008], 0.080, BINOMIAL_PINS, false),
        spd("|0.45,10,0>_NB", neg_binomial(0.45, 10, 0.0), 9.15e-6, [0.08, 5.54, 0.07, 2.35, 0.12, 3.23, 1.69, 0.00, 0.88], 0.246, &[], false),
        spd("|1,0.5,1>_AS", amp_squeezed(1.0, 0.5, 1.0), 2.45e-7, [0.60, 2.32, 0.09, 5.89, 0.60, 2.30, 0.20, 5.86, 0.50], 0.210, EQUAL_R_PINS, false),
        spd("|1,0.5,1>_AS", amp_squeezed(1.0, 0.5, 1.0), 2.40e-7, [0.37, 0.68, 0.14, 5.02, 0.71, 0.67, 0.09, 4.98, 0.37], 0.167, &[], true),
        spd("|1,1,1>_AS", amp_squeezed(1.0, 1.0, 1.0), 2.07e-4, [0.45, 1.05, 0.76, 5.22, 0.50, 0.86, 0.42, 5.18, 0.51], 0.258, &[], false),
        spd("|1,1,1>_AS", amp_squeezed(1.0, 1.0, 1.0), 2.21e-4, [0.60, 3.91, 0.48, 3.51, 0.60, 4.06, 1.06, 0.46, 0.47], 0.270, EQUAL_R_PINS, false),
        hm("|1,2,1>_AS", amp_squeezed(1.0, 2.0, 1.0), 1.22e-3, [0.37, 1.61, 1.29, 2.40, 0.23, 0.86, 1.78, 0.36, 0.70], [1.71, 3.10, 0.40, 0.007], 0.366, &[], false),
        spd("|1,2,1>_AS", amp_squeezed(1.0, 2.0, 1.0), 1.18e-3, [0.26, 4.08, 0.12, 2.74, 0.34, 5.53, 1.44, 0.16, 0.47], 0.378, &[], false),
        hm("|sqrt3,5,3>_AS", amp_squeezed(s3, 5.0, 3.0), 5.78e-5, [0.60, 5.14, 1.00, 4.53, 0.75, 4.61, 0.70, 4.72, 0.68], [0.79, 2.83, 0.16, 0.008], 0.097, BINOMIAL_PINS, false),
        spd("|sqrt3,5,3>_AS", amp_squeezed(s3, 5.0, 3.0), 1.65e-4, [0.56, 3.81, 0.02, 3.15, 0.17, 4.64, 2.05, 0.07, 0.74], 0.389, &[], false),
        hm("|1,6,1>_AS", amp_squeezed(1.0, 6.0, 1.0), 7.25e-7, [0.60, 2.49, 1.00, 4.22, 0.75, 3.09, 0.70, 0.47, 0.70], [0.87, 4.25, 0.17, 0.009], 0.081, BINOMIAL_PINS, false),
        spd("|1,6,1>_AS", amp_squeezed(1.0, 6.0, 1.0), 1.49e-4, [0.36, 2.12, 0.40, 2.53, 0.35, 1.63, 1.67, 6.28, 0.50], 0.271, &[], false),
        hm("|Psi(0.6,0.03)>_RS", resource([0.6, 0.0], 0.03), 6.69e-4, [0.46, 2.99, 0.07, 6.26, 1.15, 0.28, 0.02, 1.35, 0.30], [0.23, 6.13, 0.55, 0.006], 0.222, &[], false),
        spd("|Psi(0.6,0.03)>_RS", resource([0.6, 0.0], 0.03), 2.85e-4, [1.02, 2.70, 0.76, 5.27, 0.61, 0.23, 0.36, 4.02, 0.79], 0.329, &[], true),
        hm("|Psi(0.15,0.1)>_RS", resource([0.15, 0.0], 0.1), 7.28e-3, [0.89, 3.31, 0.89, 3.44, 0.03, 5.52, 0.09, 1.63, 0.75], [0.00, 3.19, 0.30, 0.009], 0.122, &[], false),
        spd("|Psi(0.15,0.1)>_RS", resource([0.15, 0.0], 0.1), 1.80e-3, [1.35, 2.78, 0.85, 0.3, 0.11, 2.81, 0.11, 3.77, 0.89], 0.165, &[], false),
        spd("|Psi(0.1i,0.15)>_RS", resource([0.0, 0.1], 0.15), 4.32e-3, [0.36, 1.64, 0.58, 0.60, 0.55, 2.30, 0.45, 5.23, 0.62], 0.314, &[], false),
        spd("|Psi(0.1i,0.15)>_RS", resource([0.0, 0.1], 0.15), 4.74e-3, [0.60, 0.92, 0.77, 5.83, 0.60, 1.79, 0.53, 4.56, 0.59], 0.318, EQUAL_R_PINS, false),
        spd("|Psi(0.4,0.166)>_RS", resource([0.4, 0.0], 0.166), 5.31e-3, [0.54, 5.66, 1.34, 4.31, 1.17, 5.93, 1.31, 1.85, 0.50], 0.148, &[], false),
        spd("|Psi(0.4,0.166)>_RS", resource([0.4, 0.0], 0.166), 5.37e-3, [0.60, 1.72, 1.14, 5.86, 0.60, 1.00, 0.96, 4.78, 0.54], 0.209, EQUAL_R_PINS, false),
        spd("(|0>+|1>)/sqrt2", adhoc(&[1.0, 1.0]), 1.40e-6, [0.41, 2.52, 0.252, 0.63, 0.61, 2.52, 0.74, 5.88, 0.41], 0.236, &[], false),
        spd("(|0>+|1>)/sqrt2", adhoc(&[1.0, 1.0]), 5.70e-6, [0.60, 0.00, 0.82, 4.71, 0.60, 6.28, 0.25, 3.16, 0.50], 0.274, EQUAL_R_PINS, false),
        spd("(2|1>+|2>)/sqrt5", adhoc(&[0.0, 2.0, 1.0]), 2.74e-3, [0.35, 6.05, 0.41, 4.66, 1.39, 6.13, 0.21, 0.95, 0.35], 0.159, &[], true),
        spd("(4|1>+|3>)/sqrt17", adhoc(&[0.0, 4.0, 0.0, 1.0]), 2.68e-3, [0.71, 5.16, 0.01, 1.00, 0.79, 4.56, 0.00, 0.74, 0.46], 0.229, &[], false),
        spd("(4|1>+|3>)/sqrt17", adhoc(&[0.0, 4.0, 0.0, 1.0]), 2.69e-3, [0.60, 1.85, 0.00, 4.86, 0.60, 2.44, 0.00, 2.79, 0.60], 0.190, EQUAL_R_PINS, false),
        spd("(2|0>+2|1>+|2>)/3", adhoc(&[2.0, 2.0, 1.0]), 3.36e-3, [0.19, 5.74, 0.76, 4.58, 0.27, 6.23, 0.22, 0.45, 0.72], 0.207, &[], false),
        spd("N(|1>+0.3|3>+0.1|5>)", adhoc(&[0.0, 1.0, 0.0, 0.3, 0.0, 0.1]), 7.36e-4, [1.08, 0.00, 0.00, 0.00, 0.12, 0.00, 0.00, 0.00, 0.60], 0.131, &[], true),
    ];
    rows.into_iter().map(Raw::into_row).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceProfile {
    /// Largest misfit accepted at the rounded parameters.
    pub rounded_max_misfit: f64,
    /// Polished misfit may exceed the published one by this factor.
    pub polish_factor: f64,
    /// Absolute tolerance on the success probability.
    pub prob_abs: f64,
    /// Largest average misfit accepted for HM rows.
    pub eps_avg_max: f64,
    /// Evaluation budget of the polish.
    pub polish_iters: usize,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self { rounded_max_misfit: 5e-2, polish_factor: 10.0, prob_abs: 0.05, eps_avg_max: 1e-2, polish_iters: 6000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub row: PublishedRow,
    pub cutoff: usize,
    pub misfit: f64,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
    pub polished: Option<OptimizationResult>,
    pub checks: Vec<Check>,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, value: f64, limit: f64) -> Check {
    Check { name: name.to_string(), value, limit, passed: value <= limit }
}

/// Re-evaluates one row at its rounded parameters and, when `polish` is
/// set, polishes its free parameters. The cutoff starts at `start_cutoff`
/// and is raised until the row fits.
pub fn reproduce_row(row: &PublishedRow, profile: &ToleranceProfile, polish: bool, start_cutoff: usize) -> Result<RowReport> {
    let start = OptimizationResult::at_point(&row.params, &row.target, start_cutoff, AVG_SUBRANGES)?;
    let mut checks = vec![
        check("misfit", start.best_misfit, profile.rounded_max_misfit),
        check("success_prob_error", (start.success_prob - row.success_prob).abs(), profile.prob_abs),
    ];
    if let Some(e) = start.eps_avg {
        checks.push(check("eps_avg", e, profile.eps_avg_max));
    }
    let polished = if polish {
        let out = optimizer::local_polish(&start, &row.search_space(), start.cutoff, profile.polish_iters)?;
        checks.push(check("polished_misfit", out.best_misfit, profile.polish_factor * row.misfit));
        Some(out)
    } else {
        None
    };
    Ok(RowReport {
        row: row.clone(),
        cutoff: start.cutoff,
        misfit: start.best_misfit,
        success_prob: start.success_prob,
        eps_avg: start.eps_avg,
        polished,
        checks,
    })
}

pub fn reproduce(rows: &[PublishedRow], profile: &ToleranceProfile, polish: bool) -> Result<Vec<RowReport>> {
    rows.iter().map(|r| reproduce_row(r, profile, polish, DEFAULT_CUTOFF)).collect()
}

/// Parameter vector of a row in table column order, blanks as `None`.
pub fn columns(p: &SchemeParams) -> [Option<f64>; MAX_DIMS] {
    let v = optimizer::encode(p);
    let n = optimizer::dims_for(p.measurement.kind());
    let mut out = [None; MAX_DIMS];
    for i in 0..n {
        out[i] = Some(v[i]);
    }
    out
}

/// Header of the table columns, in published order.
pub fn header() -> Vec<&'static str> {
    let mut h = vec!["state", "eps"];
    h.extend_from_slice(&PARAM_NAMES);
    h.extend_from_slice(&["delta", "p", "eps_avg"]);
    h
}
