use herald_core::optimizer::{
    encode, local_polish, optimize, Bounds, FixedMask, GaConfig, OptimizationResult, SearchSpace, MAX_DIMS,
};
use herald_core::scheme::SchemeParams;
use herald_core::states::{SqueezedCoherentParams, TargetSpec};
use proptest::prelude::*;

fn small(seed: u64) -> GaConfig {
    GaConfig { population_size: 24, generations: 12, restarts: 2, seed, ..GaConfig::default() }
}

fn target() -> TargetSpec {
    TargetSpec::Binomial { p: 0.3, m: 3 }
}

proptest! {
    #[test]
    fn projection_stays_in_bounds(v in -50.0..50.0f64, i in 0..MAX_DIMS) {
        let d = Bounds::default().dims[i];
        let p = d.project(v);
        prop_assert!(d.contains(p));
        if d.periodic {
            prop_assert!(p < d.hi);
        }
        prop_assert_eq!(d.project(p), p);
    }

    #[test]
    fn encode_decode_round_trip(r in 0.0..1.5f64, a in 0.0..4.0f64, t in 0.05..0.95f64, x in 0.0..4.0f64) {
        let s = SqueezedCoherentParams::new(r, 1.0, a, 2.0);
        let p = SchemeParams::hm(s, s, t, x, 0.5, 0.2);
        prop_assert_eq!(SearchSpace::hm(0.2).decode(&encode(&p)), p);
    }
}

#[test]
fn same_seed_same_result() {
    let a = optimize(&target(), &SearchSpace::spd(), &small(3)).unwrap();
    let b = optimize(&target(), &SearchSpace::spd(), &small(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trace.len(), 24);
    assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(a.evaluations_count, 2 * (24 + 11 * 22));
}

#[test]
fn pinned_dimensions_hold() {
    let space = SearchSpace::spd().with_mask(FixedMask::none().pin("t", 0.5).unwrap().pin("r2", 0.0).unwrap());
    let r = optimize(&target(), &space, &small(5)).unwrap();
    assert_eq!(r.best_params.transmittance, 0.5);
    assert_eq!(r.best_params.in2.r, 0.0);
}

#[test]
fn fully_pinned_search_scores_the_point() {
    let s = SqueezedCoherentParams::new(0.3, 0.2, 1.0, 0.0);
    let p = SchemeParams::spd(s, SqueezedCoherentParams::new(0.5, 3.0, 0.2, 1.0), 0.4);
    let space = SearchSpace::spd().with_mask(FixedMask::all(&p));
    let r = optimize(&target(), &space, &small(1)).unwrap();
    let direct = OptimizationResult::at_point(&p, &target(), 40, 21).unwrap();
    assert_eq!(r.best_params, p);
    assert_eq!(r.best_misfit, direct.best_misfit);
    assert_eq!(r.evaluations_count, 1);
    assert!(r.trace.iter().all(|&v| v == r.trace[0]));
}

#[test]
fn polish_never_worsens() {
    let r = optimize(&target(), &SearchSpace::spd(), &small(9)).unwrap();
    let polished = local_polish(&r, &SearchSpace::spd(), 40, 400).unwrap();
    assert!(polished.best_misfit <= r.best_misfit);
    assert!(polished.evaluations_count > r.evaluations_count);
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = GaConfig { elitism_count: 500, ..GaConfig::default() };
    assert!(optimize(&target(), &SearchSpace::spd(), &cfg).is_err());
    assert!(SearchSpace::hm(0.0).validate().is_err());
    assert!(FixedMask::none().pin("nope", 1.0).is_err());
}
