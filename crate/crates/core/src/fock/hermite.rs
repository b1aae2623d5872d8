//! Hermite polynomials, number-state quadrature wavefunctions and the
//! factorial tables used by the expansions.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physicists' Hermite polynomials `H_0(z) ..= H_{n_max}(z)` by the
/// three-term recurrence `H_{k+1} = 2z H_k - 2k H_{k-1}`.
///
/// Fails with [`Error::HermiteOverflow`] carrying the first index whose value
/// is not finite.
pub fn hermite_sequence(z: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    let mut h = Vec::with_capacity(n_max + 1);
    h.push(Complex64::new(1.0, 0.0));
    if n_max == 0 {
        return Ok(h);
    }
    h.push(2.0 * z);
    for k in 1..n_max {
        let next = 2.0 * z * h[k] - 2.0 * k as f64 * h[k - 1];
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::HermiteOverflow { index: k + 1 });
        }
        h.push(next);
    }
    if !(h[1].re.is_finite() && h[1].im.is_finite()) {
        return Err(Error::HermiteOverflow { index: 1 });
    }
    Ok(h)
}

/// Real-valued number-state wavefunctions `<x|n>` for `n = 0..=n_max` with
/// `X = (a + a^dagger)/sqrt(2)`.
///
/// Uses the normalized recurrence, which never forms `H_n` or `n!` and so
/// stays finite for any cutoff.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max == 0 {
        return psi;
    }
    psi.push(2f64.sqrt() * x * psi[0]);
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// `<x|n>_lambda`, the wavefunction of `|n>` in the eigenbasis of the rotated
/// quadrature `X_lambda = (a e^{-i lambda} + a^dagger e^{i lambda})/sqrt(2)`.
pub fn quadrature_wavefunction(n: usize, x: f64, lambda: f64) -> Complex64 {
    let psi = hermite_functions(x, n)[n];
    Complex64::from_polar(1.0, -(n as f64) * lambda) * psi
}

/// All `<x|n>_lambda` for `n = 0..=n_max`.
pub fn quadrature_wavefunctions(x: f64, lambda: f64, n_max: usize) -> Vec<Complex64> {
    hermite_functions(x, n_max)
        .into_iter()
        .enumerate()
        .map(|(n, psi)| Complex64::from_polar(psi, -(n as f64) * lambda))
        .collect()
}

/// `ln(k!)` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln C(n, k)` from a factorial table.
#[inline]
pub(crate) fn ln_binomial(lnf: &[f64], n: usize, k: usize) -> f64 {
    lnf[n] - lnf[k] - lnf[n - k]
}

/// `base^k` for `k = 0..=n`, exact zero powers included (`0^0 = 1`).
pub(crate) fn powers(base: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= base;
    }
    out
}

/// `i^k`.
#[inline]
pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `H_n(z) = n! sum_m (-1)^m (2z)^{n-2m} / (m! (n-2m)!)`.
    fn hermite_explicit(z: Complex64, n: usize) -> Complex64 {
        let lnf = ln_factorials(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..=n / 2 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let coef = (lnf[n] - lnf[m] - lnf[n - 2 * m]).exp();
            acc += sign * coef * (2.0 * z).powu((n - 2 * m) as u32);
        }
        acc
    }

    #[test]
    fn low_orders() {
        let h = hermite_sequence(Complex64::new(0.5, 0.0), 1).unwrap();
        assert_eq!(h, vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let h = hermite_sequence(Complex64::i(), 2).unwrap();
        assert_eq!(h[1], Complex64::new(0.0, 2.0));
        assert_eq!(h[2], Complex64::new(-6.0, 0.0));
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        let z = Complex64::new(1.3, 0.2);
        let h = hermite_sequence(z, 10).unwrap();
        for (n, value) in h.iter().enumerate() {
            let reference = hermite_explicit(z, n);
            assert!((value - reference).norm() <= 1e-10 * reference.norm().max(1.0), "n={n}");
        }
    }

    #[test]
    fn overflow_reports_index() {
        match hermite_sequence(Complex64::new(1e200, 0.0), 5) {
            Err(Error::HermiteOverflow { index }) => assert!(index >= 1),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn wavefunction_values() {
        let v = quadrature_wavefunction(0, 0.0, 1.234);
        assert!((v.re - 0.751_125_544_464_942_5).abs() < 1e-12 && v.im == 0.0);
        assert!(quadrature_wavefunction(1, 0.0, 0.0).norm() < 1e-15);
        let a = quadrature_wavefunction(3, 1.2, 0.7).norm();
        let b = quadrature_wavefunction(3, 1.2, 0.0).norm();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn wavefunction_matches_hermite_form() {
        let x = 0.83;
        let lnf = ln_factorials(20);
        let h = hermite_sequence(Complex64::new(x, 0.0), 20).unwrap();
        let psi = hermite_functions(x, 20);
        for n in 0..=20 {
            let direct = PI.powf(-0.25) * (-0.5 * x * x).exp() * h[n].re
                / (2f64.powi(n as i32).sqrt() * (0.5 * lnf[n]).exp());
            assert!((psi[n] - direct).abs() < 1e-12, "n={n}");
        }
    }

    proptest::proptest! {
        #[test]
        fn recurrence_vs_explicit_property(re in -5.0f64..5.0, im in -5.0f64..5.0, n in 0usize..=25) {
            let z = Complex64::new(re, im);
            proptest::prop_assume!(z.norm() <= 5.0);
            let h = hermite_sequence(z, n).unwrap();
            let reference = hermite_explicit(z, n);
            // relative to the magnitude of the largest term in the explicit sum
            let scale = (0..=n / 2)
                .map(|m| {
                    let lnf = ln_factorials(n);
                    (lnf[n] - lnf[m] - lnf[n - 2 * m]).exp() * (2.0 * z.norm()).powi((n - 2 * m) as i32)
                })
                .fold(1.0f64, f64::max);
            proptest::prop_assert!((h[n] - reference).norm() <= 1e-10 * scale);
        }
    }
}
