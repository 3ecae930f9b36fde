//! Test functions of the blow-up argument.
//!
//! The time factor `λ(t; ℓ) = C_ℓ t^{1/2} K_ν(φ_ℓ(t))`, `ν = 1/(2ℓ+2)`, is the
//! decaying solution of `λ'' = t^{2ℓ} λ` normalized by `λ(0) = 1`. The space
//! factor `φ` is the radial eigenfunction of the Laplacian with eigenvalue 1.
//! Their product `Ψ = λ φ` solves the adjoint linear equation
//! `Ψ_tt − t^{2ℓ} ΔΨ = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{self, SpecFunResult};

/// Below this time `λ` and `λ'` come from their power series at `t = 0`.
pub const SMALL_TIME: f64 = 1e-3;

const EIGEN_QUAD_TOL: f64 = 1e-10;

/// Light-cone radius `t^{ℓ+1}/(ℓ+1)`.
pub fn phi_cone(t: f64, ell: f64) -> f64 {
    debug_assert!(t >= 0.0);
    t.powf(ell + 1.0) / (ell + 1.0)
}

/// Surface area of the unit sphere `S^{k}` in `ℝ^{k+1}`.
pub fn sphere_area(k: u32) -> f64 {
    let half = 0.5 * (k as f64 + 1.0);
    2.0 * PI.powf(half) / specfun::gamma_fn(half).expect("positive argument")
}

/// The exponent `ℓ` together with the Bessel order and normalization of `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TricomiIndex {
    pub ell: f64,
    pub nu: f64,
    pub c_ell: f64,
    /// `λ'(0; ℓ)`, cached since it enters every small-time evaluation.
    lambda_prime_0: f64,
}

impl TricomiIndex {
    pub fn new(ell: f64) -> Result<Self> {
        lambda_norm(ell)
    }
}

/// Builds the [`TricomiIndex`] for `ℓ > 0`; `C_ℓ` makes `λ(0⁺; ℓ) = 1`.
pub fn lambda_norm(ell: f64) -> Result<TricomiIndex> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Domain(format!("ell must be positive, got {ell}")));
    }
    let nu = 1.0 / (2.0 * ell + 2.0);
    let c_ell = 1.0 / (2f64.powf(nu - 1.0) * specfun::gamma_fn(nu)? * (ell + 1.0).powf(nu));
    Ok(TricomiIndex {
        ell,
        nu,
        c_ell,
        lambda_prime_0: lambda_prime_at_zero(ell)?,
    })
}

/// Closed form of `λ'(0; ℓ) = −(2(ℓ+1))^{1−2ν} Γ(1−ν)/Γ(ν)`.
pub fn lambda_prime_at_zero(ell: f64) -> Result<f64> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Domain(format!("ell must be positive, got {ell}")));
    }
    let nu = 1.0 / (2.0 * ell + 2.0);
    let base = 2.0 * (ell + 1.0);
    Ok(-base.powf(1.0 - 2.0 * nu) * specfun::gamma_fn(1.0 - nu)? / specfun::gamma_fn(nu)?)
}

// Power series of the normalized solution at t = 0, obtained by integrating
// λ'' = t^{2ℓ} λ twice with λ(0) = 1, λ'(0) = λ'_0.
fn lambda_series(t: f64, idx: &TricomiIndex) -> (f64, f64) {
    let l = idx.ell;
    let d0 = idx.lambda_prime_0;
    let a = t.powf(2.0 * l + 1.0);
    let value = 1.0
        + d0 * t
        + a * t / ((2.0 * l + 1.0) * (2.0 * l + 2.0))
        + d0 * a * t * t / ((2.0 * l + 2.0) * (2.0 * l + 3.0));
    let deriv = d0 + a / (2.0 * l + 1.0) + d0 * a * t / (2.0 * l + 2.0);
    (value, deriv)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// `λ(t) e^{φ_ℓ(t)}`, finite for every `t` where `λ` itself underflows.
pub fn lambda_scaled(t: f64, idx: &TricomiIndex) -> Result<SpecFunResult> {
    check_time(t)?;
    if t < SMALL_TIME {
        let (v, _) = lambda_series(t, idx);
        let scale = phi_cone(t, idx.ell).exp();
        let tail = t.powf(4.0 * idx.ell + 4.0);
        return Ok(SpecFunResult {
            value: v * scale,
            abs_error_estimate: tail * scale,
        });
    }
    let z = phi_cone(t, idx.ell);
    let k = specfun::bessel_k_scaled(idx.nu, z)?;
    let pref = idx.c_ell * t.sqrt();
    Ok(SpecFunResult {
        value: pref * k.value,
        abs_error_estimate: pref * k.abs_error_estimate,
    })
}

/// `λ'(t) e^{φ_ℓ(t)}`.
pub fn lambda_prime_scaled(t: f64, idx: &TricomiIndex) -> Result<SpecFunResult> {
    check_time(t)?;
    if t < SMALL_TIME {
        let (_, d) = lambda_series(t, idx);
        let scale = phi_cone(t, idx.ell).exp();
        let tail = t.powf(4.0 * idx.ell + 3.0);
        return Ok(SpecFunResult {
            value: d * scale,
            abs_error_estimate: tail * scale,
        });
    }
    let z = phi_cone(t, idx.ell);
    // K_{ν−1} = K_{1−ν}
    let k = specfun::bessel_k_scaled(idx.nu - 1.0, z)?;
    let pref = idx.c_ell * t.powf(0.5 + idx.ell);
    Ok(SpecFunResult {
        value: -pref * k.value,
        abs_error_estimate: pref * k.abs_error_estimate,
    })
}

fn unscale(r: SpecFunResult, t: f64, ell: f64) -> SpecFunResult {
    let damp = (-phi_cone(t, ell)).exp();
    SpecFunResult {
        value: r.value * damp,
        abs_error_estimate: r.abs_error_estimate * damp,
    }
}

/// `λ(t; ℓ)`; `λ(0) = 1`.
pub fn lambda_fn(t: f64, idx: &TricomiIndex) -> Result<SpecFunResult> {
    Ok(unscale(lambda_scaled(t, idx)?, t, idx.ell))
}

/// `λ'(t; ℓ)`, strictly negative.
pub fn lambda_prime(t: f64, idx: &TricomiIndex) -> Result<SpecFunResult> {
    Ok(unscale(lambda_prime_scaled(t, idx)?, t, idx.ell))
}

/// `λ'(t)/λ(t)`, computed from the scaled factors so it stays finite for large
/// `t`.
pub fn lambda_log_derivative(t: f64, idx: &TricomiIndex) -> Result<f64> {
    let v = lambda_scaled(t, idx)?;
    let d = lambda_prime_scaled(t, idx)?;
    Ok(d.value / v.value)
}

/// Radial eigenfunction `φ(r)` of the Laplacian, `Δφ = φ`.
///
/// `n = 1`: `e^r + e^{−r}`. `n ≥ 2`: `|S^{n−2}| ∫_0^π e^{r cos θ} sin^{n−2} θ dθ`.
pub fn eigenfunction(r: f64, n: u32) -> f64 {
    eigenfunction_scaled(r, n) * r.abs().exp()
}

/// `e^{−r} φ(r)`, bounded for all `r`.
pub fn eigenfunction_scaled(r: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    let r = r.abs();
    if n == 1 {
        return 1.0 + (-2.0 * r).exp();
    }
    let power = (n - 2) as i32;
    let integral = quad::integrate(
        |theta: f64| (r * (theta.cos() - 1.0)).exp() * theta.sin().powi(power),
        0.0,
        PI,
        0.0,
        EIGEN_QUAD_TOL,
    );
    sphere_area(n - 2) * integral.value
}

/// `Ψ(t, r) = λ(t) φ(r)`.
pub fn psi(t: f64, r: f64, idx: &TricomiIndex, n: u32) -> Result<SpecFunResult> {
    let lam = lambda_fn(t, idx)?;
    let phi = eigenfunction(r, n);
    Ok(SpecFunResult {
        value: lam.value * phi,
        abs_error_estimate: lam.abs_error_estimate * phi + lam.value * phi * EIGEN_QUAD_TOL,
    })
}

/// Samples of a radial function on the uniform grid `r_i = i·dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub dr: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn from_fn(dr: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dr,
            values: (0..len).map(|i| f(i as f64 * dr)).collect(),
        }
    }

    pub fn zeros(dr: f64, len: usize) -> Self {
        Self {
            dr,
            values: vec![0.0; len],
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }
}

/// `(1 − (r/R)²)³` inside the ball of radius `R`, zero outside.
pub fn bump(r: f64, radius: f64) -> f64 {
    let s = r / radius;
    if s >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        w * w * w
    }
}

/// Initial data `(u₀, u₁)` on a shared radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPair {
    pub u0: RadialProfile,
    pub u1: RadialProfile,
    /// Support radius `R`.
    pub radius: f64,
    /// Space dimension `n`.
    pub dim: u32,
}

impl DataPair {
    pub fn new(u0: RadialProfile, u1: RadialProfile, radius: f64, dim: u32) -> Result<Self> {
        let data = Self { u0, u1, radius, dim };
        data.validate()?;
        Ok(data)
    }

    /// The default smooth bump for both profiles.
    pub fn default_bump(radius: f64, dim: u32, dr: f64, len: usize) -> Result<Self> {
        let u0 = RadialProfile::from_fn(dr, len, |r| bump(r, radius));
        let u1 = u0.clone();
        Self::new(u0, u1, radius, dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Configuration("dimension must be at least 1".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Configuration("support radius must be positive".into()));
        }
        if self.u0.dr != self.u1.dr || self.u0.values.len() != self.u1.values.len() {
            return Err(Error::Configuration("u0 and u1 must share one grid".into()));
        }
        for profile in [&self.u0, &self.u1] {
            for (i, &v) in profile.values.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Configuration(format!(
                        "data must be finite and nonnegative (value {v} at r = {})",
                        profile.radius(i)
                    )));
                }
                // Half a cell of slack for grids that do not hit R exactly.
                if v != 0.0 && profile.radius(i) > self.radius + 0.5 * profile.dr {
                    return Err(Error::Configuration(format!(
                        "data must vanish outside r = {} (nonzero at r = {})",
                        self.radius,
                        profile.radius(i)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.u0.values.iter().chain(&self.u1.values).all(|&v| v == 0.0)
    }
}

/// Trapezoid weights `ω_{n−1} r^{n−1} dr` for radial integration over `ℝⁿ`.
pub fn radial_weights(dr: f64, len: usize, n: u32) -> Vec<f64> {
    let omega = sphere_area(n - 1);
    (0..len)
        .map(|i| {
            let r = i as f64 * dr;
            let end = if i == 0 || i + 1 == len { 0.5 } else { 1.0 };
            end * dr * omega * r.powi(n as i32 - 1)
        })
        .collect()
}

/// `I_ℓ[u₀,u₁] = ∫ (u₁ − λ'(0;ℓ) u₀) φ dx`.
pub fn data_functional_i(data: &DataPair, ell: f64) -> Result<f64> {
    data.validate()?;
    if data.is_trivial() {
        return Err(Error::DegenerateData("u0 and u1 are both identically zero".into()));
    }
    let d0 = lambda_prime_at_zero(ell)?;
    let len = data.u0.values.len();
    let weights = radial_weights(data.u0.dr, len, data.dim);
    let mut sum = 0.0;
    for i in 0..len {
        let g = data.u1.values[i] - d0 * data.u0.values[i];
        if g != 0.0 {
            sum += weights[i] * g * eigenfunction(data.u0.radius(i), data.dim);
        }
    }
    Ok(sum)
}

/// Grid-certified constant `c₀ > 1` with `t^ℓ/c₀ ≤ |λ'/λ|` on the whole grid
/// and `|λ'/λ| ≤ c₀ t^ℓ` on the grid points `t ≥ 1`, inflated by 5%.
pub fn estimate_c0(idx: &TricomiIndex, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let mut c: f64 = 1.0;
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("grid point {t} is not positive")));
        }
        let ratio = lambda_log_derivative(t, idx)?.abs();
        let tl = t.powf(idx.ell);
        c = c.max(tl / ratio);
        if t >= 1.0 {
            c = c.max(ratio / tl);
        }
    }
    Ok(1.05 * c)
}

/// Open interval `(1/2, 1/2 + 1/(2c₀²))` of admissible weights `ω`.
pub fn omega_window(c0: f64) -> Result<(f64, f64)> {
    if !(c0 > 1.0) {
        return Err(Error::Domain(format!("c0 must exceed 1, got {c0}")));
    }
    Ok((0.5, 0.5 + 0.5 / (c0 * c0)))
}

/// Auxiliary functions `h₁ = (λ'/λ)(1 − 2ω)` and `h₂ = t^{2ℓ} + (λ'/λ)²(1 − 2ω)`.
pub fn h_functions(t: f64, idx: &TricomiIndex, omega: f64) -> Result<(f64, f64)> {
    let g = lambda_log_derivative(t, idx)?;
    let w = 1.0 - 2.0 * omega;
    Ok((g * w, t.powf(2.0 * idx.ell) + g * g * w))
}
