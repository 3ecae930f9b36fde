#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use approx::assert_relative_eq;
use tricomi_core::quad;
use tricomi_core::specfun::{bessel_k, bessel_k_derivative, bessel_k_scaled, gamma_fn};

const ORDERS: [f64; 5] = [0.125, 1.0 / 6.0, 0.25, 0.5, 0.75];

#[test]
fn half_order_closed_form() {
    let mut x = 0.01;
    while x <= 30.0 {
        let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
        let k = bessel_k(0.5, x).unwrap().value;
        assert_relative_eq!(k, exact, max_relative = 1e-10);
        let dk = bessel_k_derivative(0.5, x).unwrap().value;
        assert_relative_eq!(dk, -exact * (1.0 + 0.5 / x), max_relative = 1e-10);
        x *= 1.13;
    }
}

#[test]
fn integral_representation() {
    // K_ν(x) = ∫_0^∞ e^{−x cosh s} cosh(νs) ds
    for &nu in &ORDERS {
        for &x in &[0.05f64, 0.3, 1.0, 2.5, 7.0, 14.0, 16.0, 25.0] {
            let upper = (1.0 + 750.0 / x).acosh();
            let q = quad::integrate(|s| (-x * s.cosh()).exp() * (nu * s).cosh(), 0.0, upper, 0.0, 1e-13);
            let k = bessel_k(nu, x).unwrap().value;
            assert_relative_eq!(k, q.value, max_relative = 1e-9);
        }
    }
}

#[test]
fn bessel_equation_residual() {
    // x² K'' + x K' − (x² + ν²) K = 0, with K'' from a difference of exact K'.
    for &nu in &ORDERS {
        for &x in &[0.2, 0.7, 1.5, 4.0, 9.0, 14.9, 15.1, 22.0] {
            let h = 1e-6 * x;
            let d2 = (bessel_k_derivative(nu, x + h).unwrap().value - bessel_k_derivative(nu, x - h).unwrap().value)
                / (2.0 * h);
            let k = bessel_k(nu, x).unwrap().value;
            let dk = bessel_k_derivative(nu, x).unwrap().value;
            let res = x * x * d2 + x * dk - (x * x + nu * nu) * k;
            let scale = (x * x * d2).abs().max((x * dk).abs()).max((x * x + nu * nu) * k);
            assert!(res.abs() <= 1e-8 * scale, "nu={nu} x={x} residual={res}");
        }
    }
}

#[test]
fn small_argument_limit() {
    // z^{1/4} K_{1/4}(z) → 2^{−3/4} Γ(1/4)
    let limit = 2f64.powf(-0.75) * gamma_fn(0.25).unwrap();
    let z: f64 = 1e-10;
    let v = z.powf(0.25) * bessel_k(0.25, z).unwrap().value;
    assert_relative_eq!(v, limit, max_relative = 1e-4);
}

#[test]
fn derivative_forms_agree() {
    // K'_ν = −(K_{ν−1} + K_{ν+1})/2
    for &nu in &ORDERS {
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            let a = bessel_k_derivative(nu, x).unwrap().value;
            let b = -0.5 * (bessel_k(nu - 1.0, x).unwrap().value + bessel_k(nu + 1.0, x).unwrap().value);
            assert_relative_eq!(a, b, max_relative = 1e-11);
        }
    }
}

#[test]
fn scaled_matches_unscaled() {
    for &x in &[0.5, 3.0, 30.0] {
        let s = bessel_k_scaled(0.25, x).unwrap().value;
        assert_relative_eq!(s * (-x).exp(), bessel_k(0.25, x).unwrap().value, max_relative = 1e-14);
    }
    let far = bessel_k_scaled(0.25, 800.0).unwrap().value;
    assert!(far.is_finite() && far > 0.0);
}

#[test]
fn gamma_values() {
    assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
    assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
    assert_relative_eq!(gamma_fn(0.25).unwrap(), 3.625_609_908_221_908_3, max_relative = 1e-14);
    assert!(gamma_fn(-2.0).is_err());
}

#[test]
fn rejects_bad_input() {
    assert!(bessel_k(0.5, 0.0).is_err());
    assert!(bessel_k(0.5, -1.0).is_err());
    assert!(bessel_k(0.5, f64::NAN).is_err());
    assert!(bessel_k(9.0, 1.0).is_err());
}
