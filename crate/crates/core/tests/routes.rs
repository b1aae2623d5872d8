use std::f64::consts::TAU;

use herald_core::fock::Mode;
use herald_core::scheme::{
    output_closed_form, output_oracle, output_oracle_with, success_prob_spd, Conventions, SchemeParams, Truncation,
};
use herald_core::states::SqueezedCoherentParams;
use proptest::prelude::*;

fn input() -> impl Strategy<Value = SqueezedCoherentParams> {
    (0.05..1.2f64, 0.0..TAU, 0.0..2.5f64, 0.0..TAU).prop_map(|(r, t, a, p)| SqueezedCoherentParams::new(r, t, a, p))
}

fn spd() -> impl Strategy<Value = SchemeParams> {
    (input(), input(), 0.1..0.9f64).prop_map(|(a, b, t)| SchemeParams::spd(a, b, t))
}

fn hm() -> impl Strategy<Value = SchemeParams> {
    (input(), input(), 0.1..0.9f64, 0.0..3.0f64, 0.0..TAU).prop_map(|(a, b, t, x, l)| SchemeParams::hm(a, b, t, x, l, 0.2))
}

fn agree(p: &SchemeParams) -> Result<(), TestCaseError> {
    let trunc = Truncation::unchecked(24);
    let a = output_closed_form(p, &trunc).unwrap();
    let b = output_oracle(p, &trunc).unwrap();
    let overlap = a.state.inner(&b.state).unwrap().norm_sqr();
    prop_assert!(overlap >= 1.0 - 1e-10, "overlap {overlap}");
    prop_assert!((a.raw_weight - b.raw_weight).abs() <= 1e-9 * b.raw_weight);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spd_closed_form_matches_oracle(p in spd()) {
        agree(&p)?;
    }

    #[test]
    fn hm_closed_form_matches_oracle(p in hm()) {
        agree(&p)?;
    }

    #[test]
    fn spd_weight_is_detection_probability(p in spd()) {
        let trunc = Truncation::unchecked(24);
        let out = output_closed_form(&p, &trunc).unwrap();
        let prob = success_prob_spd(&p, &trunc).unwrap();
        prop_assert!((0.0..=1.0).contains(&prob));
        prop_assert!((out.raw_weight - prob).abs() <= 1e-10);
    }

    #[test]
    fn swapping_inputs_and_ports_is_exact(p in hm()) {
        let trunc = Truncation::unchecked(24);
        let swapped = SchemeParams { in1: p.in2, in2: p.in1, ..p };
        let conv = Conventions { measured: Mode::Second, ..Conventions::default() };
        let a = output_oracle(&p, &trunc).unwrap();
        let b = output_oracle_with(&swapped, &trunc, &conv).unwrap();
        prop_assert!(a.state.inner(&b.state).unwrap().norm_sqr() >= 1.0 - 1e-10);
        prop_assert!((a.raw_weight - b.raw_weight).abs() <= 1e-9 * a.raw_weight.max(1e-300));
    }
}

#[test]
fn output_is_normalized() {
    let p = SchemeParams::spd(
        SqueezedCoherentParams::new(0.4, 1.0, 1.2, 0.3),
        SqueezedCoherentParams::new(0.7, 2.0, 0.5, 4.0),
        0.6,
    );
    let out = output_closed_form(&p, &Truncation::new(40)).unwrap();
    assert!((out.state.inner(&out.state).unwrap().re - 1.0).abs() < 1e-12);
    assert!(out.truncation_loss < 1e-8);
}
