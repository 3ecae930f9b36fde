use approx::assert_relative_eq;
use tricomi_core::testfun::{
    eigenfunction, eigenfunction_scaled, estimate_c0, lambda_fn, lambda_log_derivative, lambda_prime_at_zero,
    lambda_prime_scaled, lambda_scaled, omega_window, phi_cone, sphere_area, TricomiIndex,
};

const ELLS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

#[test]
fn lambda_starts_at_one() {
    for &ell in &ELLS {
        let idx = TricomiIndex::new(ell).unwrap();
        let (a, b) = (0.004, 0.002);
        let la = lambda_fn(a, &idx).unwrap().value;
        let lb = lambda_fn(b, &idx).unwrap().value;
        // linear Richardson extrapolation to t = 0
        assert!((2.0 * lb - la - 1.0).abs() < 1e-6, "ell={ell}");
        assert_relative_eq!(
            (la - lb) / (a - b),
            lambda_prime_at_zero(ell).unwrap(),
            max_relative = 1e-3
        );
    }
}

#[test]
fn lambda_solves_its_ode() {
    for &ell in &ELLS {
        let idx = TricomiIndex::new(ell).unwrap();
        let mut t: f64 = 0.1;
        while t <= 10.0 {
            let h = 1e-4 / t.powf(ell).max(1.0);
            let c = phi_cone(t, ell);
            let dp = |s: f64| lambda_prime_scaled(s, &idx).unwrap().value * (c - phi_cone(s, ell)).exp();
            let second = (dp(t + h) - dp(t - h)) / (2.0 * h);
            let lam = lambda_scaled(t, &idx).unwrap().value;
            let rhs = t.powf(2.0 * ell) * lam;
            assert!((second - rhs).abs() <= 1e-5 * rhs, "ell={ell} t={t}: {second} vs {rhs}");
            t *= 1.21;
        }
    }
}

#[test]
fn lambda_decreasing_positive() {
    for &ell in &ELLS {
        let idx = TricomiIndex::new(ell).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let t = 0.05 * i as f64;
            let v = lambda_scaled(t, &idx).unwrap().value * (-phi_cone(t, ell)).exp();
            let d = lambda_prime_scaled(t, &idx).unwrap().value;
            assert!(v > 0.0 || v == 0.0 && t > 5.0);
            assert!(d < 0.0);
            assert!(v <= prev);
            prev = v;
        }
    }
}

#[test]
fn log_derivative_against_cone_speed() {
    // −λ'/λ ~ t^ℓ for large t
    for &ell in &ELLS {
        let idx = TricomiIndex::new(ell).unwrap();
        let t: f64 = 30.0;
        let g = lambda_log_derivative(t, &idx).unwrap();
        assert_relative_eq!(-g / t.powf(ell), 1.0, max_relative = 1e-2);
        assert!(lambda_log_derivative(200.0, &idx).unwrap().is_finite());
    }
}

#[test]
fn c0_window() {
    let idx = TricomiIndex::new(1.0).unwrap();
    let grid: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
    let c0 = estimate_c0(&idx, &grid).unwrap();
    assert!(c0 > 1.0);
    for &t in &grid {
        let r = lambda_log_derivative(t, &idx).unwrap().abs();
        assert!(t / c0 <= r);
        if t >= 1.0 {
            assert!(r <= c0 * t);
        }
    }
    let (lo, hi) = omega_window(c0).unwrap();
    assert!(lo == 0.5 && hi > lo);
}

#[test]
fn eigenfunction_equation() {
    // with g = e^{−r}φ: g'' + 2g' + (n−1)(g + g')/r = 0
    for n in 1..=4u32 {
        for &r in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            let h = 2e-3;
            let g = |s: f64| eigenfunction_scaled(s, n);
            let (gm, g0, gp) = (g(r - h), g(r), g(r + h));
            let d1 = (gp - gm) / (2.0 * h);
            let d2 = (gp - 2.0 * g0 + gm) / (h * h);
            let res = d2 + 2.0 * d1 + (n as f64 - 1.0) * (g0 + d1) / r;
            assert!(res.abs() < 1e-4 * g0, "n={n} r={r} residual={res}");
        }
        assert_relative_eq!(eigenfunction(0.0, n), sphere_area(n - 1), max_relative = 1e-9);
    }
    assert_relative_eq!(eigenfunction(1.3, 1), 2.0 * 1.3f64.cosh(), max_relative = 1e-14);
    // n = 3: 4π sinh(r)/r
    assert_relative_eq!(
        eigenfunction(2.0, 3),
        4.0 * std::f64::consts::PI * 2f64.sinh() / 2.0,
        max_relative = 1e-9
    );
}

#[test]
fn rejects_ell_zero() {
    assert!(TricomiIndex::new(0.0).is_err());
    assert!(TricomiIndex::new(-1.0).is_err());
}
