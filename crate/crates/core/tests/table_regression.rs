use herald_core::optimizer::{scoring_cutoff, OptimizationResult};
use herald_core::table::{builtin_rows, ToleranceProfile};
use herald_core::tolerances::AVG_SUBRANGES;

// Rounded published parameters, scored as given.
#[test]
fn designated_rows_at_published_parameters() {
    let profile = ToleranceProfile::default();
    let rows: Vec<_> = builtin_rows().into_iter().filter(|r| r.designated).collect();
    assert!(rows.len() >= 8);
    for row in rows {
        let cutoff = scoring_cutoff(&row.params, &row.target, 40).unwrap();
        let r = OptimizationResult::at_point(&row.params, &row.target, cutoff, AVG_SUBRANGES).unwrap();
        assert!(r.best_misfit <= profile.rounded_max_misfit, "{}: eps {}", row.label, r.best_misfit);
        assert!(
            (r.success_prob - row.success_prob).abs() <= profile.prob_abs,
            "{}: P {} vs {}",
            row.label,
            r.success_prob,
            row.success_prob
        );
        if let (Some(ours), Some(_)) = (r.eps_avg, row.eps_avg) {
            assert!(ours <= profile.eps_avg_max, "{}: eps_avg {ours}", row.label);
        }
    }
}

#[test]
fn rows_serialize_round_trip() {
    for row in builtin_rows() {
        let json = serde_json::to_string(&row).unwrap();
        let back: herald_core::table::PublishedRow = serde_json::from_str(&json).unwrap();
        assert_eq!(row, back);
    }
}
