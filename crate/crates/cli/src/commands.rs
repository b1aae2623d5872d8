//! The four subcommands. Each returns the files to write and a summary;
//! nothing touches the disk here.

use herald_core::imperfections::{self, ImperfectionSpec};
use herald_core::optimizer::{self, OptimizationResult};
use herald_core::scheme::{self, Measurement, SchemeParams, Truncation};
use herald_core::states::TargetSpec;
use herald_core::table::{self, PublishedRow, RowReport};
use herald_core::tolerances::{DEFAULT_CUTOFF, MAX_TAIL_MASS};

use crate::config::{ExperimentConfig, RowSelection, SweepConfig, TableConfig};
use crate::error::CliError;
use crate::output::{self, num, OutputFile, TableRow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<OutputFile>,
    pub summary: String,
    /// Set when the run completed but failed its acceptance checks.
    pub failure: Option<String>,
}

/// The configured cutoff, or the smallest one from 40 upward at which both
/// the inputs and the target fit.
fn pick_cutoff(cfg: &ExperimentConfig, p: &SchemeParams, target: &TargetSpec) -> Result<usize, CliError> {
    match cfg.cutoff {
        Some(c) => Ok(c),
        None => Ok(optimizer::scoring_cutoff(p, target, DEFAULT_CUTOFF)?),
    }
}

pub fn evaluate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate_common()?;
    let target = cfg.target()?;
    let p = cfg.scheme_params()?;
    let cutoff = pick_cutoff(cfg, &p, target)?;
    let trunc = Truncation::new(cutoff);
    let target_vec = target.build(cutoff)?;
    let imp = cfg.imperfections.unwrap_or_default();

    let (row, state_file) = if imp == ImperfectionSpec::ideal() {
        let e = scheme::evaluate(&p, &target_vec, cfg.n_subranges(), &trunc)?;
        let row = TableRow {
            label: target.to_string(),
            misfit: e.misfit,
            params: p,
            success_prob: Some(e.success_prob),
            eps_avg: e.eps_avg,
        };
        (row, OutputFile::new("state.csv", output::state_csv(&e.output.state)))
    } else {
        let out = imperfections::conditional_output_lossy(&p, &imp, &trunc)?;
        let eps = scheme::misfit(&out.state, &target_vec)?;
        let prob = matches!(p.measurement, Measurement::Spd).then_some(out.herald_weight);
        let row = TableRow { label: target.to_string(), misfit: eps, params: p, success_prob: prob, eps_avg: None };
        (row, OutputFile::new("state.csv", output::density_csv(&out.state)))
    };
    let summary = format!(
        "{}: eps = {:.3e}, P = {}, cutoff {cutoff}",
        row.label,
        row.misfit,
        row.success_prob.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
    );
    Ok(Outcome { files: vec![OutputFile::new("evaluate.csv", output::table_csv(&[row])), state_file], summary, failure: None })
}

pub fn optimize(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate_common()?;
    let target = cfg.target()?;
    let m = cfg.measurement()?;
    let opt = cfg.optimize.clone().unwrap_or_default();
    let space = opt.search_space(m)?;
    let ga = cfg.ga_config()?;

    let mut result = optimizer::optimize(target, &space, &ga)?;
    if opt.polish_iters > 0 {
        result = optimizer::local_polish(&result, &space, result.cutoff, opt.polish_iters)?;
    }
    let trunc = Truncation::new(result.cutoff);
    let state = scheme::output(&result.best_params, &trunc)?.state;
    let row = result_row(&result);
    let json = serde_json::to_string_pretty(&result).expect("result serializes") + "\n";
    let summary = format!(
        "{}: eps = {:.3e}, P = {:.4}, {} evaluations, seed {}",
        row.label, result.best_misfit, result.success_prob, result.evaluations_count, result.seed
    );
    Ok(Outcome {
        files: vec![
            OutputFile::new("optimize.csv", output::table_csv(&[row])),
            OutputFile::new("result.json", json),
            OutputFile::new("state.csv", output::state_csv(&state)),
        ],
        summary,
        failure: None,
    })
}

fn result_row(r: &OptimizationResult) -> TableRow {
    TableRow {
        label: r.target.to_string(),
        misfit: r.best_misfit,
        params: r.best_params,
        success_prob: Some(r.success_prob),
        eps_avg: r.eps_avg,
    }
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate_common()?;
    let target = cfg.target()?;
    let p = cfg.scheme_params()?;
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::validation("missing [sweep] section"))?;

    let cutoff = match (cfg.cutoff, spec) {
        (Some(c), _) => c,
        (None, SweepConfig::Deviation { grid, .. }) => {
            // size for the largest deviation
            let d = grid.iter().copied().fold(0.0, f64::max);
            let mut q = p;
            for s in [&mut q.in1, &mut q.in2] {
                s.r *= 1.0 + d;
                s.alpha_abs *= 1.0 + d;
            }
            let c = scheme::required_cutoff(&q, DEFAULT_CUTOFF, MAX_TAIL_MASS)?;
            optimizer::scoring_cutoff(&p, target, c)?
        }
        (None, SweepConfig::Efficiency { .. }) => pick_cutoff(cfg, &p, target)?,
    };
    let trunc = Truncation::new(cutoff);
    let target_vec = target.build(cutoff)?;
    let points = match spec {
        SweepConfig::Deviation { grid, sampling, samples } => {
            imperfections::sweep_parameter_deviation(&p, &target_vec, grid, *sampling, *samples, cfg.seed(), &trunc)?
        }
        SweepConfig::Efficiency { grid, path } => imperfections::sweep_efficiency(&p, &target_vec, grid, *path, &trunc)?,
    };
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|s| vec![num(s.sweep_var), num(s.misfit_mean), num(s.misfit_max), num(s.herald_weight)])
        .collect();
    let csv = output::csv_string(&["sweep_var", "misfit_mean", "misfit_max", "herald_weight"], &rows);
    let summary = format!("{}: {} sweep points at cutoff {cutoff}", target, points.len());
    Ok(Outcome { files: vec![OutputFile::new("sweep.csv", csv)], summary, failure: None })
}

fn selected_rows(t: &TableConfig) -> Result<Vec<PublishedRow>, CliError> {
    let mut rows: Vec<PublishedRow> = match t.rows {
        RowSelection::All => table::builtin_rows(),
        RowSelection::Designated => table::builtin_rows().into_iter().filter(|r| r.designated).collect(),
        RowSelection::None => Vec::new(),
    };
    for c in &t.custom {
        rows.push(c.to_row()?);
    }
    Ok(rows)
}

fn report_record(r: &RowReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    vec![
        r.row.label.clone(),
        format!("{:?}", r.row.kind()).to_lowercase(),
        r.row.designated.to_string(),
        r.cutoff.to_string(),
        num(r.row.misfit),
        num(r.misfit),
        opt(r.polished.as_ref().map(|p| p.best_misfit)),
        num(r.row.success_prob),
        num(r.success_prob),
        opt(r.row.eps_avg),
        opt(r.eps_avg),
        if r.passed() { "pass" } else { "fail" }.to_string(),
        failed.join(";"),
    ]
}

const REPORT_HEADER: [&str; 13] = [
    "state",
    "kind",
    "designated",
    "cutoff",
    "eps_published",
    "eps",
    "eps_polished",
    "p_published",
    "p",
    "eps_avg_published",
    "eps_avg",
    "status",
    "failed_checks",
];

pub fn reproduce_table(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate_common()?;
    let t = cfg.table.clone().unwrap_or_default();
    let rows = selected_rows(&t)?;
    let start = cfg.cutoff.unwrap_or(DEFAULT_CUTOFF);

    let mut reports = Vec::with_capacity(rows.len());
    let mut errors = Vec::new();
    for row in &rows {
        match table::reproduce_row(row, &t.tolerance, t.polish, start) {
            Ok(r) => reports.push(r),
            Err(e) => errors.push(format!("{}: {e}", row.label)),
        }
    }

    let records: Vec<Vec<String>> = reports.iter().map(report_record).collect();
    let table_rows: Vec<TableRow> = reports
        .iter()
        .map(|r| match &r.polished {
            Some(p) => TableRow { label: r.row.label.clone(), ..result_row(p) },
            None => TableRow {
                label: r.row.label.clone(),
                misfit: r.misfit,
                params: r.row.params,
                success_prob: Some(r.success_prob),
                eps_avg: r.eps_avg,
            },
        })
        .collect();

    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.row.label.as_str()).collect();
    let mut summary = format!("{} rows checked, {} failed", reports.len() + errors.len(), failed.len() + errors.len());
    for e in &errors {
        summary.push_str(&format!("\nerror: {e}"));
    }
    let failure = (!failed.is_empty() || !errors.is_empty()).then(|| {
        let mut all: Vec<String> = failed.iter().map(|s| s.to_string()).collect();
        all.extend(errors.iter().cloned());
        format!("rows outside tolerance: {}", all.join(", "))
    });
    Ok(Outcome {
        files: vec![
            OutputFile::new("reproduce.csv", output::csv_string(&REPORT_HEADER, &records)),
            OutputFile::new("table.csv", output::table_csv(&table_rows)),
        ],
        summary,
        failure,
    })
}
