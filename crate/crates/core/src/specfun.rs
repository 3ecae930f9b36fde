//! Special functions: modified Bessel functions `K_ν`, `I_ν` and the Gamma
//! function.
//!
//! `K_ν` uses Temme's series for small arguments, Steed's continued fraction
//! in the intermediate range and the Hankel asymptotic expansion for large
//! arguments. The non-integer part of the order is reduced to `|μ| ≤ 1/2` and
//! the result is carried up by forward recurrence, which is stable for `K`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest `|order|` accepted by [`bessel_k`] and friends.
pub const MAX_ORDER: f64 = 5.0;

/// Arguments at or above this value use the asymptotic expansion.
pub const ASYMPTOTIC_THRESHOLD: f64 = 15.0;

const TEMME_THRESHOLD: f64 = 2.0;
const MAX_ITER: usize = 10_000;

/// A function value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

impl SpecFunResult {
    fn new(value: f64, abs_error_estimate: f64) -> Self {
        debug_assert!(value.is_finite());
        Self {
            value,
            abs_error_estimate: abs_error_estimate.abs(),
        }
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma argument {x} is not finite")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

// Taylor coefficients of 1/Γ(z) = Σ_{k≥1} c_k z^k (c_1 = 1).
const RECIP_GAMMA_SERIES: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary functions for `|mu| <= 1/2`:
/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)`, `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`,
/// together with `1/Γ(1+μ)` and `1/Γ(1-μ)`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ c_k μ^{k-1}; split into even and odd powers of μ.
    let mut even = 0.0; // Σ_{k odd} c_k μ^{k-1}
    let mut odd = 0.0; // Σ_{k even} c_k μ^{k-2}
    let mu2 = mu * mu;
    for i in (0..RECIP_GAMMA_SERIES.len()).rev() {
        let k = i + 1;
        if k % 2 == 1 {
            even = even * mu2 + RECIP_GAMMA_SERIES[i];
        } else {
            odd = odd * mu2 + RECIP_GAMMA_SERIES[i];
        }
    }
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

fn check_order(order: f64) -> Result<()> {
    if !order.is_finite() || order.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            limit: MAX_ORDER,
        });
    }
    Ok(())
}

fn check_positive_arg(arg: f64) -> Result<()> {
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel K requires a positive finite argument, got {arg}"
        )));
    }
    Ok(())
}

/// `e^x K_μ(x)` and `e^x K_{μ+1}(x)` for `|μ| <= 1/2`, plus a relative error
/// estimate.
fn scaled_k_pair_reduced(mu: f64, x: f64) -> (f64, f64, f64) {
    let eps = f64::EPSILON;
    if x < TEMME_THRESHOLD {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < eps { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu * mu);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * eps && del1.abs() < sum1.abs() * eps {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * (2.0 / x) * scale, 16.0 * eps)
    } else {
        // Steed's continued fraction.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < eps {
                break;
            }
        }
        let h = a1 * h;
        let k_mu = (PI / (2.0 * x)).sqrt() / s;
        let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
        (k_mu, k_mu1, 16.0 * eps)
    }
}

/// Hankel expansion of `e^x K_ν(x)`; returns value and absolute error estimate.
fn scaled_k_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu4 = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = 1.0;
    for k in 1..200 {
        let fk = k as f64;
        let odd = 2.0 * fk - 1.0;
        let next = term * (mu4 - odd * odd) / (8.0 * fk * x);
        if next == 0.0 {
            // Half-integer order: the series terminates exactly.
            last = 0.0;
            break;
        }
        if next.abs() > term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        last = term;
        if term.abs() < f64::EPSILON * sum.abs() {
            break;
        }
    }
    let pref = (PI / (2.0 * x)).sqrt();
    let value = pref * sum;
    let err = pref * (last.abs() + 4.0 * f64::EPSILON * sum.abs());
    (value, err)
}

/// `e^x K_ν(x)` and `e^x K_{ν+1}(x)` for `ν ≥ 0` with relative error estimates.
fn scaled_k_pair(nu: f64, x: f64) -> ((f64, f64), (f64, f64)) {
    debug_assert!(nu >= 0.0);
    if x >= ASYMPTOTIC_THRESHOLD {
        let (k0, e0) = scaled_k_asymptotic(nu, x);
        let (k1, e1) = scaled_k_asymptotic(nu + 1.0, x);
        return ((k0, e0 / k0), (k1, e1 / k1));
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k_mu, mut k_mu1, rel) = scaled_k_pair_reduced(mu, x);
    let steps = nl as usize;
    for i in 1..=steps {
        let next = (mu + i as f64) * (2.0 / x) * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    let rel = rel * (1.0 + steps as f64);
    ((k_mu, rel), (k_mu1, rel))
}

/// Exponentially scaled `e^arg K_order(arg)`; useful when `K` itself would
/// underflow.
pub fn bessel_k_scaled(order: f64, arg: f64) -> Result<SpecFunResult> {
    check_order(order)?;
    check_positive_arg(arg)?;
    let ((v, rel), _) = scaled_k_pair(order.abs(), arg);
    Ok(SpecFunResult::new(v, v * rel))
}

/// Modified Bessel function of the second kind `K_order(arg)`.
pub fn bessel_k(order: f64, arg: f64) -> Result<SpecFunResult> {
    let s = bessel_k_scaled(order, arg)?;
    let damp = (-arg).exp();
    Ok(SpecFunResult::new(s.value * damp, s.abs_error_estimate * damp))
}

/// Exponentially scaled derivative `e^arg K'_order(arg)`.
pub fn bessel_k_derivative_scaled(order: f64, arg: f64) -> Result<SpecFunResult> {
    check_order(order)?;
    check_positive_arg(arg)?;
    let nu = order.abs();
    let ((k, rk), (k1, rk1)) = scaled_k_pair(nu, arg);
    // K'_ν = -K_{ν+1} + (ν/x) K_ν; also valid for negative order by symmetry.
    let value = -k1 + nu / arg * k;
    let err = k1 * rk1 + nu / arg * k * rk + f64::EPSILON * value.abs();
    Ok(SpecFunResult::new(value, err))
}

/// Derivative `K'_order(arg)` with respect to the argument.
pub fn bessel_k_derivative(order: f64, arg: f64) -> Result<SpecFunResult> {
    let s = bessel_k_derivative_scaled(order, arg)?;
    let damp = (-arg).exp();
    Ok(SpecFunResult::new(s.value * damp, s.abs_error_estimate * damp))
}

/// Modified Bessel function of the first kind `I_order(arg)` by its power
/// series.
pub fn bessel_i(order: f64, arg: f64) -> Result<SpecFunResult> {
    if !(arg >= 0.0) || !arg.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel I requires a nonnegative finite argument, got {arg}"
        )));
    }
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel I requires a nonnegative order, got {order}"
        )));
    }
    if arg == 0.0 {
        let v = if order == 0.0 { 1.0 } else { 0.0 };
        return Ok(SpecFunResult::new(v, 0.0));
    }
    let half = 0.5 * arg;
    let quarter_sq = half * half;
    let mut term = half.powf(order) / gamma_unchecked(order + 1.0);
    let mut sum = term;
    for k in 1..MAX_ITER {
        let fk = k as f64;
        term *= quarter_sq / (fk * (fk + order));
        sum += term;
        if term < f64::EPSILON * sum {
            break;
        }
    }
    // Terms are positive, so the error is dominated by rounding in the sum
    // and the Gamma prefactor.
    let err = sum * (8.0 + arg) * f64::EPSILON;
    Ok(SpecFunResult::new(sum, err))
}
