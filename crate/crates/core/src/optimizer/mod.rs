//! Seeded genetic-algorithm search over scheme parameters, with pinned
//! dimensions and a simplex polish.

mod ga;
mod polish;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::scheme::{self, bounds, Measurement, MeasurementKind, SchemeParams, Truncation};
use crate::states::{SqueezedCoherentParams, TargetSpec};
use crate::tolerances::{AVG_SUBRANGES, DEFAULT_CUTOFF, MAX_CUTOFF, MAX_TAIL_MASS, SEARCH_CUTOFF};

pub use ga::optimize;
pub use polish::local_polish;

/// Number of search dimensions for HM; SPD uses the first nine.
pub const MAX_DIMS: usize = 11;

/// Dimension names in vector order.
pub const PARAM_NAMES: [&str; MAX_DIMS] =
    ["r1", "theta1", "alpha1", "phi1", "r2", "theta2", "alpha2", "phi2", "t", "x", "lambda"];

pub fn dims_for(kind: MeasurementKind) -> usize {
    match kind {
        MeasurementKind::Spd => 9,
        MeasurementKind::Hm => 11,
    }
}

pub fn param_index(name: &str) -> Option<usize> {
    PARAM_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Interval {
    fn linear((lo, hi): (f64, f64)) -> Self {
        Self { lo, hi, periodic: false }
    }

    fn angle() -> Self {
        Self { lo: 0.0, hi: TAU, periodic: true }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// Maps a value back into the interval: wrapped for angles, reflected
    /// once otherwise.
    pub fn project(&self, v: f64) -> f64 {
        if self.periodic {
            let w = self.lo + (v - self.lo).rem_euclid(self.width());
            // rem_euclid can round up to the width itself
            if w >= self.hi {
                self.lo
            } else {
                w
            }
        } else {
            // a reflection that overshoots the far side lands on the near bound
            if v < self.lo {
                let r = 2.0 * self.lo - v;
                if r <= self.hi {
                    r
                } else {
                    self.lo
                }
            } else if v > self.hi {
                let r = 2.0 * self.hi - v;
                if r >= self.lo {
                    r
                } else {
                    self.hi
                }
            } else {
                v
            }
        }
    }
}

/// Search box, one interval per dimension in [`PARAM_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub dims: [Interval; MAX_DIMS],
}

impl Default for Bounds {
    fn default() -> Self {
        let r = Interval::linear(bounds::R);
        let a = Interval::linear(bounds::ALPHA);
        let ang = Interval::angle();
        Self {
            dims: [r, ang, a, ang, r, ang, a, ang, Interval::linear(bounds::T), Interval::linear(bounds::X), ang],
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in PARAM_NAMES.iter().zip(&self.dims) {
            if !(d.lo.is_finite() && d.hi.is_finite() && d.lo < d.hi) {
                return Err(Error::Config(format!("bounds for {name}: need finite lo < hi")));
            }
        }
        Ok(())
    }
}

/// Per-dimension pinned values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedMask {
    pub pinned: [Option<f64>; MAX_DIMS],
}

impl FixedMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn pin(mut self, name: &str, value: f64) -> Result<Self> {
        let i = param_index(name).ok_or_else(|| Error::Config(format!("unknown parameter `{name}`")))?;
        self.pinned[i] = Some(value);
        Ok(self)
    }

    /// Every dimension pinned to `p`.
    pub fn all(p: &SchemeParams) -> Self {
        let v = encode(p);
        let n = dims_for(p.measurement.kind());
        let mut pinned = [None; MAX_DIMS];
        for i in 0..n {
            pinned[i] = Some(v[i]);
        }
        Self { pinned }
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i].is_some()
    }

    pub fn free_dims(&self, kind: MeasurementKind) -> Vec<usize> {
        (0..dims_for(kind)).filter(|i| !self.is_pinned(*i)).collect()
    }

    pub fn validate(&self, bounds: &Bounds, kind: MeasurementKind) -> Result<()> {
        for i in 0..dims_for(kind) {
            if let Some(v) = self.pinned[i] {
                if !bounds.dims[i].contains(v) {
                    let d = bounds.dims[i];
                    return Err(Error::Config(format!(
                        "pinned {} = {v} outside [{}, {}]",
                        PARAM_NAMES[i], d.lo, d.hi
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Measurement kind, box and pins of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub kind: MeasurementKind,
    /// Accepted half-width around `x`; HM only.
    pub window_halfwidth: f64,
    pub bounds: Bounds,
    pub mask: FixedMask,
}

impl SearchSpace {
    pub fn spd() -> Self {
        Self { kind: MeasurementKind::Spd, window_halfwidth: 0.0, bounds: Bounds::default(), mask: FixedMask::none() }
    }

    pub fn hm(window_halfwidth: f64) -> Self {
        Self { kind: MeasurementKind::Hm, window_halfwidth, bounds: Bounds::default(), mask: FixedMask::none() }
    }

    pub fn with_mask(mut self, mask: FixedMask) -> Self {
        self.mask = mask;
        self
    }

    pub fn dims(&self) -> usize {
        dims_for(self.kind)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.mask.validate(&self.bounds, self.kind)?;
        if self.kind == MeasurementKind::Hm && !(self.window_halfwidth > 0.0 && self.window_halfwidth.is_finite()) {
            return Err(Error::Config("window_halfwidth must be > 0 for HM".into()));
        }
        Ok(())
    }

    pub fn decode(&self, v: &[f64; MAX_DIMS]) -> SchemeParams {
        decode(v, self.kind, self.window_halfwidth)
    }

    /// Projects free dimensions into the box and restores pinned values.
    pub(crate) fn project(&self, v: &mut [f64; MAX_DIMS]) {
        for i in 0..self.dims() {
            v[i] = match self.mask.pinned[i] {
                Some(p) => p,
                None => self.bounds.dims[i].project(v[i]),
            };
        }
    }
}

pub fn encode(p: &SchemeParams) -> [f64; MAX_DIMS] {
    let (x, lambda) = match p.measurement {
        Measurement::Spd => (0.0, 0.0),
        Measurement::Hm { x, lambda, .. } => (x, lambda),
    };
    [
        p.in1.r,
        p.in1.theta,
        p.in1.alpha_abs,
        p.in1.phi,
        p.in2.r,
        p.in2.theta,
        p.in2.alpha_abs,
        p.in2.phi,
        p.transmittance,
        x,
        lambda,
    ]
}

pub fn decode(v: &[f64; MAX_DIMS], kind: MeasurementKind, window_halfwidth: f64) -> SchemeParams {
    let in1 = SqueezedCoherentParams::new(v[0], v[1], v[2], v[3]);
    let in2 = SqueezedCoherentParams::new(v[4], v[5], v[6], v[7]);
    match kind {
        MeasurementKind::Spd => SchemeParams::spd(in1, in2, v[8]),
        MeasurementKind::Hm => SchemeParams::hm(in1, in2, v[8], v[9], v[10], window_halfwidth),
    }
}

/// Misfit of the heralded state against `target`, closed form when the
/// squeezing allows it.
pub fn objective(p: &SchemeParams, target: &FockVector, trunc: &Truncation) -> Result<f64> {
    scheme::misfit(&scheme::output(p, trunc)?.state, target)
}

/// Objective used inside searches: never fails. Points whose inputs do not
/// fit the cutoff score `1 + tail`, anything else unevaluable scores 2.
pub(crate) fn penalized(p: &SchemeParams, target: &FockVector, trunc: &Truncation) -> f64 {
    match objective(p, target, trunc) {
        Ok(v) if v.is_finite() => v,
        Err(Error::TailMass { mass, .. }) => 1.0 + mass.clamp(0.0, 1.0),
        _ => 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_sigma_fraction: f64,
    pub elitism_count: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Cutoff used while searching.
    pub search_cutoff: usize,
    /// Largest tail mass accepted while searching.
    pub search_tail_tolerance: f64,
    /// Starting cutoff of the final re-scoring, raised until the tail fits.
    pub final_cutoff: usize,
    /// Subranges of the homodyne window for `eps_avg`.
    pub n_subranges: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            generations: 500,
            tournament_size: 4,
            crossover_rate: 0.9,
            mutation_sigma_fraction: 0.05,
            elitism_count: 2,
            restarts: 4,
            seed: 1,
            search_cutoff: SEARCH_CUTOFF,
            search_tail_tolerance: 1e-6,
            final_cutoff: DEFAULT_CUTOFF,
            n_subranges: AVG_SUBRANGES,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.into()));
        if self.population_size == 0 {
            return err("population_size must be positive");
        }
        if self.generations == 0 {
            return err("generations must be positive");
        }
        if self.restarts == 0 {
            return err("restarts must be positive");
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return err("tournament_size must be in [1, population_size]");
        }
        if self.elitism_count >= self.population_size {
            return err("elitism_count must be below population_size");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return err("crossover_rate must be in [0, 1]");
        }
        if !(self.mutation_sigma_fraction > 0.0 && self.mutation_sigma_fraction.is_finite()) {
            return err("mutation_sigma_fraction must be positive");
        }
        if !(self.search_tail_tolerance > 0.0) {
            return err("search_tail_tolerance must be positive");
        }
        for (name, c) in [("search_cutoff", self.search_cutoff), ("final_cutoff", self.final_cutoff)] {
            if c < 1 || c > MAX_CUTOFF {
                return Err(Error::Config(format!("{name} must be in [1, {MAX_CUTOFF}]")));
            }
        }
        if self.n_subranges == 0 {
            return err("n_subranges must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub target: TargetSpec,
    pub best_params: SchemeParams,
    pub best_misfit: f64,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
    /// Best-so-far search objective after every generation, restarts
    /// concatenated.
    pub trace: Vec<f64>,
    pub seed: u64,
    pub evaluations_count: u64,
    /// Cutoff of the final scores.
    pub cutoff: usize,
}

impl OptimizationResult {
    /// Scores a fixed point, as if it came out of a search with an empty
    /// trace.
    pub fn at_point(p: &SchemeParams, target: &TargetSpec, start_cutoff: usize, n_subranges: usize) -> Result<Self> {
        let scored = rescore(p, target, start_cutoff, n_subranges)?;
        Ok(Self {
            target: target.clone(),
            best_params: *p,
            best_misfit: scored.misfit,
            success_prob: scored.success_prob,
            eps_avg: scored.eps_avg,
            trace: Vec::new(),
            seed: 0,
            evaluations_count: 1,
            cutoff: scored.cutoff,
        })
    }
}

pub(crate) struct Rescored {
    pub misfit: f64,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
    pub cutoff: usize,
}

/// Smallest cutoff from `start` (steps of 10) at which both the inputs and
/// the target fit within [`MAX_TAIL_MASS`].
pub fn scoring_cutoff(p: &SchemeParams, target: &TargetSpec, start: usize) -> Result<usize> {
    let mut cutoff = scheme::required_cutoff(p, start, MAX_TAIL_MASS)?;
    loop {
        match target.build(cutoff) {
            Ok(_) => return Ok(cutoff),
            Err(Error::TailMass { .. }) if cutoff + 10 <= MAX_CUTOFF => cutoff += 10,
            Err(e) => return Err(e),
        }
    }
}

/// Cutoff at which `target` itself fits, from `start` upward.
pub(crate) fn target_cutoff(target: &TargetSpec, start: usize) -> Result<(usize, FockVector)> {
    let mut cutoff = start;
    loop {
        match target.build(cutoff) {
            Ok(v) => return Ok((cutoff, v)),
            Err(Error::TailMass { .. }) if cutoff + 10 <= MAX_CUTOFF => cutoff += 10,
            Err(e) => return Err(e),
        }
    }
}

pub(crate) fn rescore(p: &SchemeParams, target: &TargetSpec, start: usize, n_subranges: usize) -> Result<Rescored> {
    let cutoff = scoring_cutoff(p, target, start)?;
    let t = target.build(cutoff)?;
    let e = scheme::evaluate(p, &t, n_subranges, &Truncation::new(cutoff))?;
    Ok(Rescored { misfit: e.misfit, success_prob: e.success_prob, eps_avg: e.eps_avg, cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::binomial_state;

    fn table_spd() -> SchemeParams {
        SchemeParams::spd(
            SqueezedCoherentParams::new(0.74, 3.50, 0.10, 2.14),
            SqueezedCoherentParams::new(0.16, 4.43, 1.97, 0.08),
            0.69,
        )
    }

    fn small_cfg(seed: u64) -> GaConfig {
        GaConfig { population_size: 24, generations: 12, restarts: 2, seed, ..GaConfig::default() }
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = SchemeParams::hm(
            SqueezedCoherentParams::new(0.45, 0.74, 0.34, 1.01),
            SqueezedCoherentParams::new(0.45, 0.28, 1.97, 0.06),
            0.9,
            0.61,
            0.04,
            0.3,
        );
        assert_eq!(decode(&encode(&p), MeasurementKind::Hm, 0.3), p);
        assert_eq!(decode(&encode(&table_spd()), MeasurementKind::Spd, 0.0), table_spd());
    }

    #[test]
    fn objective_cases() {
        let trunc = Truncation::new(40);
        let out = scheme::output(&table_spd(), &trunc).unwrap().state;
        assert!(objective(&table_spd(), &out, &trunc).unwrap() < 1e-14);

        let target = binomial_state(0.3, 7, 40).unwrap();
        let eps = objective(&table_spd(), &target, &trunc).unwrap();
        assert!(eps > 1.26e-4 && eps < 5e-2);

        let trunc = Truncation::new(50);
        let target = binomial_state(0.3, 7, 50).unwrap();
        let mut p = table_spd();
        p.in1.r += 0.013;
        p.transmittance -= 0.02;
        let direct = scheme::misfit(&scheme::output(&p, &trunc).unwrap().state, &target).unwrap();
        assert_eq!(objective(&p, &target, &trunc).unwrap(), direct);
    }

    #[test]
    fn interval_projection() {
        let a = Interval::angle();
        assert_eq!(a.project(TAU), 0.0);
        assert!((a.project(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        let t = Interval::linear(bounds::T);
        assert!((t.project(0.95) - 0.85).abs() < 1e-15);
        assert_eq!(t.project(5.0), 0.9);
        assert_eq!(t.project(0.5), 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        for bad in [
            GaConfig { population_size: 0, ..GaConfig::default() },
            GaConfig { generations: 0, ..GaConfig::default() },
            GaConfig { elitism_count: 200, ..GaConfig::default() },
            GaConfig { crossover_rate: 1.5, ..GaConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
        let target = TargetSpec::Binomial { p: 0.3, m: 7 };
        let cfg = GaConfig { population_size: 0, ..GaConfig::default() };
        assert!(optimize(&target, &SearchSpace::spd(), &cfg).is_err());
        let mask = FixedMask::none().pin("t", 0.95).unwrap();
        assert!(optimize(&target, &SearchSpace::spd().with_mask(mask), &small_cfg(1)).is_err());
        assert!(FixedMask::none().pin("nope", 1.0).is_err());
    }

    #[test]
    fn deterministic_and_monotone() {
        let target = TargetSpec::Binomial { p: 0.3, m: 7 };
        let a = optimize(&target, &SearchSpace::spd(), &small_cfg(7)).unwrap();
        let b = optimize(&target, &SearchSpace::spd(), &small_cfg(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 24);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        let c = optimize(&target, &SearchSpace::spd(), &small_cfg(8)).unwrap();
        assert_ne!(a.best_params, c.best_params);
    }

    #[test]
    fn pinned_dimensions_are_untouched() {
        let target = TargetSpec::Binomial { p: 0.3, m: 7 };
        let mask = FixedMask::none().pin("r1", 0.6).unwrap().pin("alpha2", 0.7).unwrap().pin("theta1", 6.2).unwrap();
        let r = optimize(&target, &SearchSpace::spd().with_mask(mask), &small_cfg(3)).unwrap();
        assert_eq!(r.best_params.in1.r, 0.6);
        assert_eq!(r.best_params.in2.alpha_abs, 0.7);
        assert_eq!(r.best_params.in1.theta, 6.2);
        let v = encode(&r.best_params);
        let b = Bounds::default();
        assert!((0..9).all(|i| b.dims[i].contains(v[i])));
    }

    #[test]
    fn fully_pinned_search_is_flat() {
        let target = TargetSpec::Binomial { p: 0.3, m: 7 };
        let space = SearchSpace::spd().with_mask(FixedMask::all(&table_spd()));
        let r = optimize(&target, &space, &small_cfg(5)).unwrap();
        assert_eq!(r.best_params, table_spd());
        assert!(r.trace.windows(2).all(|w| w[0] == w[1]));
        let direct = objective(&table_spd(), &binomial_state(0.3, 7, 40).unwrap(), &Truncation::new(40)).unwrap();
        assert_eq!(r.best_misfit, direct);
    }

    #[test]
    fn polish_never_increases_misfit() {
        let target = TargetSpec::Binomial { p: 0.3, m: 7 };
        let start = OptimizationResult::at_point(&table_spd(), &target, 40, AVG_SUBRANGES).unwrap();
        let polished = local_polish(&start, &SearchSpace::spd(), 40, 6000).unwrap();
        assert!(polished.best_misfit <= start.best_misfit);
        assert!(polished.best_misfit < 1.26e-4);

        // a converged point stays put
        let again = local_polish(&polished, &SearchSpace::spd(), 40, 200).unwrap();
        assert!((again.best_misfit - polished.best_misfit).abs() <= 1e-12);

        let random = SchemeParams::spd(
            SqueezedCoherentParams::new(0.3, 1.0, 1.2, 2.0),
            SqueezedCoherentParams::new(0.5, 4.0, 0.4, 0.3),
            0.4,
        );
        let start = OptimizationResult::at_point(&random, &target, 40, AVG_SUBRANGES).unwrap();
        let polished = local_polish(&start, &SearchSpace::spd(), 40, 300).unwrap();
        assert!(polished.best_misfit <= start.best_misfit);
    }
}
