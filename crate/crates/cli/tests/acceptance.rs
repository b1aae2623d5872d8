//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Run with `cargo test --release -p herald-cli --test acceptance`.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use herald_core::fock::{beam_splitter_apply, fidelity, tensor, BeamSplitter, DensityMatrix, FockVector};
use herald_core::imperfections::{
    conditional_output_lossy, loss_channel, sweep_parameter_deviation, ImperfectionSpec, Sampling,
};
use herald_core::optimizer::{optimize, GaConfig, SearchSpace};
use herald_core::scheme::{self, MeasurementKind, SchemeParams, Truncation};
use herald_core::states::{
    amplitude_squeezed_state, binomial_state, negative_binomial_state, resource_state, squeezed_coherent,
    SqueezedCoherentParams, TargetSpec,
};
use herald_core::table::{builtin_rows, reproduce_row, PublishedRow, ToleranceProfile};
use herald_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn overlap(a: &FockVector, b: &FockVector) -> f64 {
    a.inner(b).unwrap().norm_sqr()
}

fn random_params(rng: &mut ChaCha8Rng, hm: bool) -> SchemeParams {
    let mut input = || {
        SqueezedCoherentParams::new(
            rng.gen_range(0.05..=1.7),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..=4.0),
            rng.gen_range(0.0..TAU),
        )
    };
    let in1 = input();
    let in2 = input();
    let t = rng.gen_range(0.1..=0.9);
    if hm {
        SchemeParams::hm(in1, in2, t, rng.gen_range(0.0..=4.0), rng.gen_range(0.0..TAU), 0.2)
    } else {
        SchemeParams::spd(in1, in2, t)
    }
}

fn oracle_equivalence() -> Outcome {
    let trunc = Truncation::unchecked(30);
    let mut worst_overlap = 0.0f64;
    let mut worst_weight = 0.0f64;
    let mut failures = Vec::new();
    for (hm, seed) in [(false, 1001u64), (true, 1002)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..200 {
            let p = random_params(&mut rng, hm);
            let label = if hm { "hm" } else { "spd" };
            match (scheme::output_closed_form(&p, &trunc), scheme::output_oracle(&p, &trunc)) {
                (Ok(a), Ok(b)) => {
                    let gap = 1.0 - overlap(&a.state, &b.state);
                    let rel = (a.raw_weight - b.raw_weight).abs() / b.raw_weight;
                    worst_overlap = worst_overlap.max(gap);
                    worst_weight = worst_weight.max(rel);
                    if gap > 1e-10 || !(rel <= 1e-9) {
                        failures.push(format!("{label}#{k}"));
                    }
                }
                (Err(a), Err(b)) if a == b => {}
                (a, b) => failures.push(format!("{label}#{k}: {:?} vs {:?}", a.err(), b.err())),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "400 draws, max 1-overlap {worst_overlap:.2e} (<= 1e-10), max weight rel err {worst_weight:.2e} (<= 1e-9){}",
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn family(t: &TargetSpec) -> &'static str {
    match t {
        TargetSpec::Binomial { .. } => "binomial",
        TargetSpec::NegativeBinomial { .. } => "negative_binomial",
        TargetSpec::AmplitudeSqueezed { .. } => "amplitude_squeezed",
        TargetSpec::Resource { .. } => "resource",
        TargetSpec::AdHoc { .. } => "ad_hoc",
    }
}

fn designated() -> Vec<PublishedRow> {
    builtin_rows().into_iter().filter(|r| r.designated).collect()
}

fn table_reproduction() -> Outcome {
    let rows = designated();
    let profile = ToleranceProfile::default();
    let mut families = BTreeSet::new();
    let mut kinds = BTreeSet::new();
    let mut failed = Vec::new();
    for row in &rows {
        families.insert(family(&row.target));
        kinds.insert(format!("{:?}", row.kind()));
        match reproduce_row(row, &profile, true, 40) {
            Ok(r) => {
                let polished = r.polished.as_ref().map(|p| p.best_misfit).unwrap_or(f64::NAN);
                println!(
                    "    {:<22} {:<3?} eps {:.2e} -> {:.2e} (published {:.2e}), P {:.3} (published {:.3}){} {}",
                    row.label,
                    row.kind(),
                    r.misfit,
                    polished,
                    row.misfit,
                    r.success_prob,
                    row.success_prob,
                    r.eps_avg.map(|e| format!(", eps_avg {e:.4}")).unwrap_or_default(),
                    if r.passed() { "ok" } else { "FAIL" }
                );
                if !r.passed() {
                    failed.push(row.label.clone());
                }
            }
            Err(e) => failed.push(format!("{}: {e}", row.label)),
        }
    }
    let coverage = rows.len() >= 8 && families.len() == 5 && kinds.len() == 2;
    outcome(
        coverage && failed.is_empty(),
        format!(
            "{} rows, {} families, {} measurement kinds{}",
            rows.len(),
            families.len(),
            kinds.len(),
            if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
        ),
    )
}

fn ga_end_to_end() -> Outcome {
    let target = TargetSpec::Binomial { p: 0.3, m: 7 };
    let cfg = GaConfig { seed: 1, ..GaConfig::default() };
    match optimize(&target, &SearchSpace::hm(0.17), &cfg) {
        Ok(r) => {
            let monotone = r.trace.windows(2).all(|w| w[1] <= w[0]);
            outcome(
                r.best_misfit <= 1e-2 && monotone,
                format!(
                    "binomial(0.3,7) HM, seed 1: eps {:.3e} (<= 1e-2), trace monotone {monotone}, {} evaluations",
                    r.best_misfit, r.evaluations_count
                ),
            )
        }
        Err(e) => outcome(false, format!("optimize failed: {e}")),
    }
}

fn analytic_limits() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut expect = |name: &str, cond: bool| {
        if !cond {
            ok = false;
            notes.push(name.to_string());
        }
    };

    let fock3 = FockVector::basis(3, 10).unwrap();
    expect("binomial p=1", fidelity(&fock3, &binomial_state(1.0, 3, 10).unwrap()).unwrap() >= 1.0 - 1e-12);
    expect(
        "binomial p=0",
        fidelity(&FockVector::vacuum(10), &binomial_state(0.0, 3, 10).unwrap()).unwrap() >= 1.0 - 1e-12,
    );

    let eta = 0.6f64;
    let nb = negative_binomial_state(eta, 1, 0.0, 80).unwrap();
    let geometric = nb
        .amps()
        .iter()
        .enumerate()
        .all(|(n, a)| (a - Complex64::new((1.0 - eta * eta).sqrt() * eta.powi(n as i32), 0.0)).norm() <= 1e-12);
    expect("negative binomial M=1", geometric);

    let as_state = amplitude_squeezed_state(1.0, 0.01, 3.0, 20).unwrap();
    expect("amplitude squeezed u=0.01", overlap(&as_state, &FockVector::basis(3, 20).unwrap()) >= 1.0 - 1e-6);

    // zeta = 0: (1 + chi' x^3) |0> with x = (a + a')/sqrt 2
    let chi = 0.1;
    let rs = resource_state(Complex64::new(0.0, 0.0), Complex64::new(chi, 0.0), 10).unwrap();
    let raw = [1.0, chi * 3.0 / (2.0 * 2f64.sqrt()), 0.0, chi * 3f64.sqrt() / 2.0];
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    let closed = raw.iter().enumerate().all(|(k, r)| (rs.amps()[k] - Complex64::new(r / norm, 0.0)).norm() <= 1e-12);
    expect("resource zeta=0", closed && rs.amps()[4..].iter().all(|a| a.norm() <= 1e-12));

    let lossy_one = loss_channel(&FockVector::basis(1, 6).unwrap(), 0.7).unwrap();
    let expected = DensityMatrix::diagonal_mixture(&[0.3, 0.7], 6).unwrap();
    expect("loss of a single photon", lossy_one.distance(&expected).unwrap() <= 1e-10);

    let alpha = SqueezedCoherentParams::new(0.0, 0.0, 1.2, 0.4);
    let shrunk = SqueezedCoherentParams::new(0.0, 0.0, 1.2 * 0.8f64.sqrt(), 0.4);
    let lossy_coh = loss_channel(&squeezed_coherent(&alpha, 40).unwrap(), 0.8).unwrap();
    let pure = DensityMatrix::pure(&squeezed_coherent(&shrunk, 40).unwrap());
    expect("loss of a coherent state", lossy_coh.distance(&pure).unwrap() <= 1e-10);

    let one = FockVector::basis(1, 4).unwrap();
    let (hom, _) = beam_splitter_apply(&tensor(&one, &one).unwrap(), &BeamSplitter::symmetric(0.5).unwrap());
    expect("HOM dip", hom.get(1, 1) == Complex64::new(0.0, 0.0));

    outcome(
        ok,
        if ok { "binomial, NB, AS, resource, loss channel, HOM limits hold".to_string() } else { notes.join(", ") },
    )
}

fn imperfection_properties() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for row in designated() {
        let cutoff = match herald_core::optimizer::scoring_cutoff(&row.params, &row.target, 40) {
            Ok(c) => c,
            Err(e) => {
                ok = false;
                notes.push(format!("{}: {e}", row.label));
                continue;
            }
        };
        let trunc = Truncation::new(cutoff);
        let target = row.target.build(cutoff).unwrap();
        let ideal = scheme::output(&row.params, &trunc).unwrap().state;
        let ideal_eps = scheme::misfit(&ideal, &target).unwrap();
        let at = |eta: f64| conditional_output_lossy(&row.params, &ImperfectionSpec { eta_det: eta, eta_signal: 1.0 }, &trunc);
        let (full, lossy) = (at(1.0).unwrap(), at(0.9).unwrap());
        let f = fidelity(&ideal, &full.state).unwrap();
        let eps1 = scheme::misfit(&full.state, &target).unwrap();
        let eps09 = scheme::misfit(&lossy.state, &target).unwrap();
        if f < 1.0 - 1e-12 {
            ok = false;
            notes.push(format!("{}: eta=1 fidelity {f}", row.label));
        }
        if !(eps09 > eps1) {
            ok = false;
            notes.push(format!("{}: eps(0.9) {eps09:.3e} <= eps(1) {eps1:.3e}", row.label));
        }
        if row.kind() == MeasurementKind::Spd || row.label.contains("0.45,8") {
            let sweep = sweep_parameter_deviation(&row.params, &target, &[0.0], Sampling::SignedUniform, 8, 3, &trunc);
            match sweep {
                Ok(s) if s[0].misfit_mean == ideal_eps && s[0].misfit_max == ideal_eps => {}
                other => {
                    ok = false;
                    notes.push(format!("{}: d=0 sweep {:?} vs {ideal_eps}", row.label, other.map(|s| s[0])));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 9;
    let a: Vec<Complex64> = (0..d * 3).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let m = herald_core::fock::DensityMatrix::from_matrix({
        let a = nalgebra_free_outer(&a, d, 3);
        a
    })
    .normalized()
    .unwrap();
    let twice = loss_channel(&loss_channel(&m, 0.8).unwrap(), 0.7).unwrap();
    let once = loss_channel(&m, 0.56).unwrap();
    let composition = twice.distance(&once).unwrap();
    if composition > 1e-10 {
        ok = false;
        notes.push(format!("composition distance {composition:.2e}"));
    }
    outcome(
        ok,
        if ok {
            format!("eta=1 equals ideal, eta=0.9 worse on every regression row, composition {composition:.1e}, d=0 exact")
        } else {
            notes.join("; ")
        },
    )
}

/// `A A'` for a `d x k` column-major block.
fn nalgebra_free_outer(a: &[Complex64], d: usize, k: usize) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(d, d, |i, j| (0..k).map(|c| a[c * d + i] * a[c * d + j].conj()).sum())
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_herald"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let work = tempfile::tempdir().unwrap();
    let small_opt = work.path().join("optimize_small.toml");
    std::fs::write(
        &small_opt,
        "seed = 11\n[target]\nfamily = \"binomial\"\np = 0.3\nm = 7\n[measurement]\nkind = \"hm\"\nwindow_halfwidth = 0.17\n\
         [optimize]\npolish_iters = 200\n[optimize.ga]\npopulation_size = 40\ngenerations = 25\nrestarts = 2\n",
    )
    .unwrap();
    let designated_table = work.path().join("table.toml");
    std::fs::write(&designated_table, "[table]\nrows = \"designated\"\npolish = false\n").unwrap();

    let cases: Vec<(&str, std::path::PathBuf)> = vec![
        ("evaluate", root.join("evaluate_spd_binomial.toml")),
        ("evaluate", root.join("evaluate_hm_binomial.toml")),
        ("sweep", root.join("sweep_deviation.toml")),
        ("sweep", root.join("sweep_efficiency.toml")),
        ("optimize", small_opt),
        ("reproduce-table", designated_table),
    ];
    let mut notes = Vec::new();
    let mut files = 0;
    for (k, (cmd, cfg)) in cases.iter().enumerate() {
        let a = work.path().join(format!("run{k}a"));
        let b = work.path().join(format!("run{k}b"));
        let cfg = cfg.to_string_lossy().into_owned();
        for dir in [&a, &b] {
            if let Err(e) = run_cli(&[cmd, "--config", &cfg], dir) {
                notes.push(e);
            }
        }
        let (ra, rb) = (read_dir_sorted(&a), read_dir_sorted(&b));
        files += ra.len();
        if ra.is_empty() || ra != rb {
            notes.push(format!("{cmd} {cfg}: outputs differ"));
        }
    }
    outcome(notes.is_empty(), if notes.is_empty() { format!("{files} files byte-identical across reruns") } else { notes.join("; ") })
}

fn main() {
    // `cargo test -- --list` and similar probe the harness
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 oracle equivalence", oracle_equivalence),
        ("2 table reproduction", table_reproduction),
        ("3 GA end-to-end", ga_end_to_end),
        ("4 analytic limits", analytic_limits),
        ("5 imperfection properties", imperfection_properties),
        ("6 determinism", determinism),
    ];
    let mut all = true;
    for (name, f) in criteria {
        let start = Instant::now();
        let o = f();
        all &= o.passed;
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
