//! Rendering of result files and their all-or-nothing write.

use std::fs;
use std::path::{Path, PathBuf};

use herald_core::fock::{DensityMatrix, FockVector};
use herald_core::scheme::{Measurement, SchemeParams};
use herald_core::table;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    pub fn new(name: &str, contents: String) -> Self {
        Self { name: name.to_string(), contents }
    }
}

/// Writes every file or none: contents go to hidden temporaries first and
/// are renamed into place only after all of them were written.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut temps = Vec::with_capacity(files.len());
    for f in files {
        let tmp = dir.join(format!(".{}.partial", f.name));
        if let Err(e) = fs::write(&tmp, &f.contents) {
            for t in &temps {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(io(e, &tmp));
        }
        temps.push(tmp);
    }
    let mut written = Vec::with_capacity(files.len());
    for (f, tmp) in files.iter().zip(&temps) {
        let dest = dir.join(&f.name);
        fs::rename(tmp, &dest).map_err(|e| io(e, &dest))?;
        written.push(dest);
    }
    Ok(written)
}

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// 17 significant digits.
pub fn num17(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub misfit: f64,
    pub params: SchemeParams,
    pub success_prob: Option<f64>,
    pub eps_avg: Option<f64>,
}

impl TableRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.label.clone(), num(self.misfit)];
        r.extend(table::columns(&self.params).iter().map(|v| opt(*v)));
        let delta = match self.params.measurement {
            Measurement::Spd => None,
            Measurement::Hm { window_halfwidth, .. } => Some(window_halfwidth),
        };
        r.push(opt(delta));
        r.push(opt(self.success_prob));
        r.push(opt(self.eps_avg));
        r
    }
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let records: Vec<Vec<String>> = rows.iter().map(TableRow::record).collect();
    csv_string(&table::header(), &records)
}

pub fn state_csv(v: &FockVector) -> String {
    let rows: Vec<Vec<String>> =
        v.amps().iter().enumerate().map(|(n, a)| vec![n.to_string(), num17(a.re), num17(a.im)]).collect();
    csv_string(&["n", "re", "im"], &rows)
}

pub fn density_csv(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let mut rows = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let a = m[(i, j)];
            rows.push(vec![i.to_string(), j.to_string(), num17(a.re), num17(a.im)]);
        }
    }
    csv_string(&["n", "m", "re", "im"], &rows)
}
