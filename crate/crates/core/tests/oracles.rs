//! Special-function and approximation values checked against quadrature
//! and published constants.

use std::f64::consts::{FRAC_PI_2, PI};

use ratnet::elliptic::{complete_k, jacobi_sn, jacobi_sn_cn, EllipticModulus};
use ratnet::ratfun::{relu, sup_error, Interval};
use ratnet::zolotarev::{relu_approximant, stage_count_for};

fn integrand(kappa: f64, theta: f64) -> f64 {
    1.0 / (1.0 - (kappa * theta.sin()).powi(2)).sqrt()
}

/// Trapezoid rule over a full period; spectrally accurate for this integrand.
fn k_by_quadrature(kappa: f64) -> f64 {
    let n = 4000;
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| integrand(kappa, i as f64 * h)).sum::<f64>() * h / 4.0
}

/// Incomplete `F(phi)` by composite Simpson.
fn incomplete_f(kappa: f64, phi: f64) -> f64 {
    let n = 2000;
    let h = phi / n as f64;
    let inner: f64 = (1..n).map(|i| integrand(kappa, i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (integrand(kappa, 0.0) + inner + integrand(kappa, phi)) * h / 3.0
}

/// `sn(u) = sin(phi)` where `F(phi) = u`, for `0 <= u <= K`.
fn sn_by_inversion(u: f64, kappa: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if incomplete_f(kappa, mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).sin()
}

#[test]
fn complete_integral_published_value() {
    let k = complete_k(EllipticModulus::new(std::f64::consts::FRAC_1_SQRT_2).unwrap());
    assert!((k - 1.854_074_677_301_372).abs() < 1e-13, "{k}");
}

#[test]
fn complete_integral_matches_quadrature() {
    for kappa in [0.0, 0.3, 0.7, 0.9, 0.999] {
        let k = complete_k(EllipticModulus::new(kappa).unwrap());
        let oracle = k_by_quadrature(kappa);
        assert!((k - oracle).abs() < 1e-11 * oracle, "kappa {kappa}: {k} vs {oracle}");
    }
    assert_eq!(complete_k(EllipticModulus::new(0.0).unwrap()), FRAC_PI_2);
}

#[test]
fn sn_matches_inverted_integral() {
    let m = EllipticModulus::new(0.7).unwrap();
    let oracle = sn_by_inversion(0.8, 0.7);
    let sn = jacobi_sn(0.8, m).unwrap();
    assert!((sn - oracle).abs() < 1e-12, "{sn} vs {oracle}");
    let m = EllipticModulus::new(0.999).unwrap();
    for u in [0.1, 1.0, 2.5, 3.9] {
        let sn = jacobi_sn(u, m).unwrap();
        let oracle = sn_by_inversion(u, 0.999);
        assert!((sn - oracle).abs() < 1e-10, "u {u}: {sn} vs {oracle}");
    }
}

#[test]
fn sn_cn_pythagorean_and_quarter_period() {
    let m = EllipticModulus::new(0.95).unwrap();
    let quarter = complete_k(m);
    assert!((jacobi_sn(quarter, m).unwrap() - 1.0).abs() < 1e-12);
    for i in 0..50 {
        let u = -7.0 + 0.3 * i as f64;
        let (sn, cn) = jacobi_sn_cn(u, m).unwrap();
        assert!((sn * sn + cn * cn - 1.0).abs() < 1e-13, "u {u}");
        let (shifted, _) = jacobi_sn_cn(u + 2.0 * quarter, m).unwrap();
        assert!((shifted + sn).abs() < 1e-11, "u {u}");
    }
}

#[test]
fn tiny_complement_keeps_precision() {
    let ell = 1e-12;
    let m = EllipticModulus::from_complement(ell).unwrap();
    // K ~ ln(4 / ell) for ell -> 0
    let k = complete_k(m);
    assert!((k - (4.0 / ell).ln()).abs() < 1e-10, "{k}");
}

#[test]
fn stage_counts_follow_ceiling_formula() {
    for (eps, k) in [(0.3, 1), (0.1, 1), (0.05, 2), (0.03, 2), (1e-3, 3), (1e-5, 4)] {
        assert_eq!(stage_count_for(eps), k, "eps {eps}");
    }
}

#[test]
fn relu_approximant_error_stays_below_tolerance() {
    for eps in [0.5, 0.2, 0.05, 1e-2, 1e-3, 1e-4] {
        let approx = relu_approximant(eps).unwrap();
        let err = sup_error(relu, |x| approx.value(x), Interval::symmetric(), 100_001).unwrap();
        assert!(err.max_abs_error <= eps, "eps {eps}: {}", err.max_abs_error);
    }
}
