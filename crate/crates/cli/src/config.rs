//! Experiment configuration files (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use herald_core::imperfections::{EfficiencyPath, ImperfectionSpec, Sampling};
use herald_core::optimizer::{self, Bounds, FixedMask, GaConfig, SearchSpace, PARAM_NAMES};
use herald_core::scheme::{MeasurementKind, SchemeParams};
use herald_core::states::{SqueezedCoherentParams, TargetSpec};
use herald_core::table::{PublishedRow, ToleranceProfile};
use herald_core::tolerances::{AVG_SUBRANGES, MAX_CUTOFF};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: Option<TargetSpec>,
    pub measurement: Option<MeasurementConfig>,
    pub params: Option<ParamsConfig>,
    pub imperfections: Option<ImperfectionSpec>,
    pub optimize: Option<OptimizeConfig>,
    pub sweep: Option<SweepConfig>,
    pub table: Option<TableConfig>,
    /// Fixed cutoff; chosen automatically from 40 upward when absent.
    pub cutoff: Option<usize>,
    pub seed: Option<u64>,
    pub n_subranges: Option<usize>,
    /// Output directory.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementConfig {
    Spd {},
    Hm { window_halfwidth: f64 },
}

impl MeasurementConfig {
    pub fn kind(&self) -> MeasurementKind {
        match self {
            MeasurementConfig::Spd {} => MeasurementKind::Spd,
            MeasurementConfig::Hm { .. } => MeasurementKind::Hm,
        }
    }

    pub fn window_halfwidth(&self) -> f64 {
        match self {
            MeasurementConfig::Spd {} => 0.0,
            MeasurementConfig::Hm { window_halfwidth } => *window_halfwidth,
        }
    }

    pub fn search_space(&self) -> SearchSpace {
        match self {
            MeasurementConfig::Spd {} => SearchSpace::spd(),
            MeasurementConfig::Hm { window_halfwidth } => SearchSpace::hm(*window_halfwidth),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub r1: f64,
    pub theta1: f64,
    pub alpha1: f64,
    pub phi1: f64,
    pub r2: f64,
    pub theta2: f64,
    pub alpha2: f64,
    pub phi2: f64,
    pub t: f64,
    pub x: Option<f64>,
    pub lambda: Option<f64>,
}

impl ParamsConfig {
    pub fn to_scheme(&self, m: &MeasurementConfig) -> Result<SchemeParams, CliError> {
        let in1 = SqueezedCoherentParams::new(self.r1, self.theta1, self.alpha1, self.phi1);
        let in2 = SqueezedCoherentParams::new(self.r2, self.theta2, self.alpha2, self.phi2);
        let p = match m {
            MeasurementConfig::Spd {} => {
                if self.x.is_some() || self.lambda.is_some() {
                    return Err(CliError::validation("params: x and lambda only apply to kind = \"hm\""));
                }
                SchemeParams::spd(in1, in2, self.t)
            }
            MeasurementConfig::Hm { window_halfwidth } => {
                let (Some(x), Some(lambda)) = (self.x, self.lambda) else {
                    return Err(CliError::validation("params: kind = \"hm\" needs x and lambda"));
                };
                SchemeParams::hm(in1, in2, self.t, x, lambda, *window_halfwidth)
            }
        };
        p.validate().map_err(|e| CliError::validation(format!("params: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default)]
    pub ga: GaConfig,
    /// Per-parameter `[lo, hi]` overrides of the default box.
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    /// Pinned parameter values.
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    /// Simplex polish budget after the search; 0 disables it.
    #[serde(default)]
    pub polish_iters: usize,
}

impl OptimizeConfig {
    pub fn search_space(&self, m: &MeasurementConfig) -> Result<SearchSpace, CliError> {
        let mut bounds = Bounds::default();
        let dims = optimizer::dims_for(m.kind());
        let index = |name: &str, what: &str| -> Result<usize, CliError> {
            match optimizer::param_index(name) {
                Some(i) if i < dims => Ok(i),
                _ => Err(CliError::validation(format!(
                    "optimize.{what}: unknown parameter `{name}` (expected one of {})",
                    PARAM_NAMES[..dims].join(", ")
                ))),
            }
        };
        for (name, [lo, hi]) in &self.bounds {
            let i = index(name, "bounds")?;
            bounds.dims[i].lo = *lo;
            bounds.dims[i].hi = *hi;
        }
        let mut mask = FixedMask::none();
        for (name, v) in &self.fixed {
            mask.pinned[index(name, "fixed")?] = Some(*v);
        }
        let space = SearchSpace { bounds, mask, ..m.search_space() };
        space.validate().map_err(|e| CliError::validation(format!("optimize: {e}")))?;
        Ok(space)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Relative deviation of the input-state parameters.
    Deviation {
        grid: Vec<f64>,
        #[serde(default = "default_sampling")]
        sampling: Sampling,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Detection and/or signal efficiency.
    Efficiency {
        grid: Vec<f64>,
        #[serde(default)]
        path: EfficiencyPath,
    },
}

fn default_sampling() -> Sampling {
    Sampling::SignedUniform
}

fn default_samples() -> usize {
    100
}

impl SweepConfig {
    fn validate(&self) -> Result<(), CliError> {
        match self {
            SweepConfig::Deviation { grid, samples, .. } => {
                if grid.is_empty() {
                    return Err(CliError::validation("sweep.grid must not be empty"));
                }
                if grid.iter().any(|d| !(0.0..=0.2).contains(d)) || grid.windows(2).any(|w| w[1] < w[0]) {
                    return Err(CliError::validation("sweep.grid: deviations must be ascending within [0, 0.2]"));
                }
                if *samples == 0 {
                    return Err(CliError::validation("sweep.samples must be positive"));
                }
            }
            SweepConfig::Efficiency { grid, .. } => {
                if grid.is_empty() {
                    return Err(CliError::validation("sweep.grid must not be empty"));
                }
                if grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return Err(CliError::validation("sweep.grid: efficiencies must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSelection {
    #[default]
    Designated,
    All,
    None,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    #[serde(default)]
    pub rows: RowSelection,
    #[serde(default = "default_true")]
    pub polish: bool,
    #[serde(default)]
    pub tolerance: ToleranceProfile,
    /// Extra rows checked alongside the built-in ones.
    #[serde(default)]
    pub custom: Vec<CustomRow>,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { rows: RowSelection::default(), polish: true, tolerance: ToleranceProfile::default(), custom: Vec::new() }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomRow {
    pub label: String,
    pub target: TargetSpec,
    pub measurement: MeasurementConfig,
    pub params: ParamsConfig,
    pub misfit: f64,
    pub success_prob: f64,
    pub eps_avg: Option<f64>,
    #[serde(default)]
    pub fixed: Vec<String>,
}

impl CustomRow {
    pub fn to_row(&self) -> Result<PublishedRow, CliError> {
        let params = self.params.to_scheme(&self.measurement)?;
        let dims = optimizer::dims_for(self.measurement.kind());
        if let Some(bad) = self.fixed.iter().find(|n| optimizer::param_index(n).is_none_or(|i| i >= dims)) {
            return Err(CliError::validation(format!("table.custom `{}`: unknown fixed parameter `{bad}`", self.label)));
        }
        Ok(PublishedRow {
            label: self.label.clone(),
            target: self.target.clone(),
            misfit: self.misfit,
            params,
            success_prob: self.success_prob,
            eps_avg: self.eps_avg,
            fixed: self.fixed.clone(),
            designated: false,
        })
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.cutoff.is_some() {
            self.cutoff = o.cutoff;
        }
        if o.out.is_some() {
            self.output = o.out.clone();
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn n_subranges(&self) -> usize {
        self.n_subranges.unwrap_or(AVG_SUBRANGES)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    /// Checks common fields.
    pub fn validate_common(&self) -> Result<(), CliError> {
        if let Some(c) = self.cutoff {
            if c < 1 || c > MAX_CUTOFF {
                return Err(CliError::validation(format!("cutoff must be in [1, {MAX_CUTOFF}]")));
            }
        }
        if self.n_subranges == Some(0) {
            return Err(CliError::validation("n_subranges must be positive"));
        }
        if let Some(imp) = &self.imperfections {
            imp.validate().map_err(|e| CliError::validation(format!("imperfections: {e}")))?;
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn target(&self) -> Result<&TargetSpec, CliError> {
        let t = self.target.as_ref().ok_or_else(|| CliError::validation("missing [target] section"))?;
        // catches bad family parameters before any heavy work
        match t.build(MAX_CUTOFF) {
            Ok(_) | Err(herald_core::Error::TailMass { .. }) => Ok(t),
            Err(e) => Err(CliError::validation(format!("target: {e}"))),
        }
    }

    pub fn measurement(&self) -> Result<&MeasurementConfig, CliError> {
        let m = self.measurement.as_ref().ok_or_else(|| CliError::validation("missing [measurement] section"))?;
        if let MeasurementConfig::Hm { window_halfwidth } = m {
            if !(*window_halfwidth > 0.0 && window_halfwidth.is_finite()) {
                return Err(CliError::validation("measurement.window_halfwidth must be > 0"));
            }
        }
        Ok(m)
    }

    pub fn scheme_params(&self) -> Result<SchemeParams, CliError> {
        let m = self.measurement()?;
        self.params.as_ref().ok_or_else(|| CliError::validation("missing [params] section"))?.to_scheme(m)
    }

    pub fn ga_config(&self) -> Result<GaConfig, CliError> {
        let mut ga = self.optimize.as_ref().map(|o| o.ga.clone()).unwrap_or_default();
        if let Some(s) = self.seed {
            ga.seed = s;
        }
        if let Some(n) = self.n_subranges {
            ga.n_subranges = n;
        }
        if let Some(c) = self.cutoff {
            ga.final_cutoff = c;
        }
        ga.validate().map_err(|e| CliError::validation(format!("optimize.ga: {e}")))?;
        Ok(ga)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let c = ExperimentConfig::parse(
            r#"
            seed = 3
            [target]
            family = "binomial"
            p = 0.3
            m = 7
            [measurement]
            kind = "hm"
            window_halfwidth = 0.17
            [params]
            r1 = 0.6
            theta1 = 3.9
            alpha1 = 1.0
            phi1 = 4.26
            r2 = 0.75
            theta2 = 3.62
            alpha2 = 0.7
            phi2 = 0.48
            t = 0.59
            x = 0.6
            lambda = 2.17
            [optimize]
            polish_iters = 10
            [optimize.ga]
            generations = 5
            [optimize.fixed]
            r1 = 0.6
            [sweep]
            kind = "efficiency"
            grid = [0.9, 1.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.target, Some(TargetSpec::Binomial { p: 0.3, m: 7 }));
        assert_eq!(c.ga_config().unwrap().generations, 5);
        assert_eq!(c.ga_config().unwrap().seed, 3);
        c.validate_common().unwrap();
        c.scheme_params().unwrap();
        let space = c.optimize.as_ref().unwrap().search_space(c.measurement().unwrap()).unwrap();
        assert_eq!(space.mask.pinned[0], Some(0.6));
    }

    #[test]
    fn rejects_unknown_keys() {
        for text in [
            "bogus = 1",
            "[target]\nfamily = \"binomial\"\np = 0.3\nm = 7\nq = 1",
            "[measurement]\nkind = \"spd\"\nwindow_halfwidth = 0.1",
            "[optimize.ga]\npopulation = 10",
            "[sweep]\nkind = \"efficiency\"\ngrid = [1.0]\nsamples = 3",
            "[imperfections]\neta = 0.9",
        ] {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{text}");
        }
    }

    #[test]
    fn semantic_checks() {
        let c = ExperimentConfig::parse("[measurement]\nkind = \"spd\"\n[params]\nr1 = 0.1\ntheta1 = 0\nalpha1 = 0\nphi1 = 0\nr2 = 0.1\ntheta2 = 0\nalpha2 = 0\nphi2 = 0\nt = 0.5\nx = 1.0").unwrap();
        assert!(c.scheme_params().is_err());
        let c = ExperimentConfig::parse("[sweep]\nkind = \"deviation\"\ngrid = [0.1, 0.05]").unwrap();
        assert!(c.validate_common().is_err());
        let c = ExperimentConfig::parse("[optimize.fixed]\nlambda = 1.0\n[measurement]\nkind = \"spd\"").unwrap();
        assert!(c.optimize.as_ref().unwrap().search_space(c.measurement().unwrap()).is_err());
        let c = ExperimentConfig::parse("[target]\nfamily = \"binomial\"\np = 1.3\nm = 7").unwrap();
        assert!(c.target().is_err());
    }
}
