//! Finite-difference integration of the radial problem
//! `u_tt = t^{2ℓ} Δu + |u_t|^p + |u|^q`, `u(0) = εu₀`, `u_t(0) = εu₁`,
//! in dimensions 1 to 3.
//!
//! Space: cell-centred finite volumes on `r_i = i·dx` with volumes
//! `V_i = |B_{r_i+dx/2} \ B_{r_i−dx/2}|`, which makes `Σ V_i (Δ_h u)_i`
//! telescope to zero. Time: variable-step leapfrog with a second-order
//! explicit estimate of `u_t` for the derivative nonlinearity.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::exponents::ModelParams;
use crate::testfun::{self, TricomiIndex};

pub const MIN_GRID_POINTS: usize = 128;
pub const MAX_DIM: u32 = 3;
/// Default resolution: cells per data radius `R`.
pub const DEFAULT_CELLS_PER_RADIUS: usize = 128;
pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
/// Fraction of the measured blow-up time over which identities are checked.
pub const PRE_BLOWUP_FRACTION: f64 = 0.9;
/// `|u|` below this fraction of `max|u|` does not count towards the support.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-10;

/// A radial profile `r ↦ f(r)` on `[0, R]`, extended by zero.
#[derive(Clone)]
pub enum Profile {
    /// `(1 − (r/R)²)³`
    Bump,
    Zero,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Profile {
    pub fn eval(&self, r: f64, radius: f64) -> f64 {
        if r > radius {
            return 0.0;
        }
        match self {
            Profile::Bump => testfun::bump(r, radius),
            Profile::Zero => 0.0,
            Profile::Custom(f) => f(r),
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Bump => f.write_str("Bump"),
            Profile::Zero => f.write_str("Zero"),
            Profile::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Initial data before sampling, so runs at several resolutions share it.
#[derive(Debug, Clone)]
pub struct DataSpec {
    pub u0: Profile,
    pub u1: Profile,
    pub radius: f64,
}

impl DataSpec {
    pub fn bump(radius: f64) -> Self {
        Self {
            u0: Profile::Bump,
            u1: Profile::Bump,
            radius,
        }
    }

    /// Samples the data on the grid `r_i = i·dx`, `i < len`.
    pub fn sample(&self, dim: u32, dx: f64, len: usize) -> Result<testfun::DataPair> {
        let u0 = testfun::RadialProfile::from_fn(dx, len, |r| self.u0.eval(r, self.radius));
        let u1 = testfun::RadialProfile::from_fn(dx, len, |r| self.u1.eval(r, self.radius));
        testfun::DataPair::new(u0, u1, self.radius, dim)
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub data: DataSpec,
    pub grid_points: usize,
    pub domain_radius: f64,
    pub t_max: f64,
    pub cfl_safety: f64,
    pub blowup_threshold: f64,
    /// Drop the nonlinearity (verification runs).
    pub linear_only: bool,
    /// Record functionals every `record_stride` steps.
    pub record_stride: usize,
    /// `dt ≤ η / max(max|u|^{(q−1)/2}, max|u_t|^{p−1})` resolves the
    /// nonlinear time scale near blow-up.
    pub nonlinear_dt_factor: f64,
}

impl SimConfig {
    /// Defaults: bump data of radius `params.radius`, a domain reaching
    /// `1.25R + φ_ℓ(t_max)` and `dx = R/128`.
    pub fn new(params: ModelParams, t_max: f64) -> Self {
        let radius = params.radius;
        let domain_radius = Self::default_domain_radius(radius, t_max, params.ell);
        let cells = (domain_radius / radius * DEFAULT_CELLS_PER_RADIUS as f64).ceil() as usize;
        Self {
            params,
            data: DataSpec::bump(radius),
            grid_points: (cells + 1).max(MIN_GRID_POINTS),
            domain_radius,
            t_max,
            cfl_safety: DEFAULT_CFL,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            linear_only: false,
            record_stride: 1,
            nonlinear_dt_factor: 0.05,
        }
    }

    pub fn default_domain_radius(radius: f64, t_max: f64, ell: f64) -> f64 {
        1.25 * radius + testfun::phi_cone(t_max, ell)
    }

    pub fn dx(&self) -> f64 {
        self.domain_radius / (self.grid_points - 1) as f64
    }

    pub fn with_grid_points(mut self, grid_points: usize) -> Self {
        self.grid_points = grid_points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !(p.epsilon >= 0.0 && p.epsilon.is_finite()) {
            return Err(Error::Configuration(format!(
                "epsilon must be nonnegative, got {}",
                p.epsilon
            )));
        }
        ModelParams { epsilon: 1.0, ..*p }.validate()?;
        if p.n > MAX_DIM {
            return Err(Error::Configuration(format!(
                "the solver supports n <= {MAX_DIM}, got n = {}",
                p.n
            )));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::Configuration(format!(
                "grid_points must be at least {MIN_GRID_POINTS}, got {}",
                self.grid_points
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Configuration(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Configuration(format!(
                "cfl_safety must lie in (0,1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.blowup_threshold > 0.0) || self.record_stride == 0 || !(self.nonlinear_dt_factor > 0.0) {
            return Err(Error::Configuration(
                "blowup_threshold, record_stride and nonlinear_dt_factor must be positive".into(),
            ));
        }
        if !(self.data.radius > 0.0) {
            return Err(Error::Configuration("data radius must be positive".into()));
        }
        let needed = self.data.radius + testfun::phi_cone(self.t_max, p.ell) + 2.0 * self.dx();
        if !(self.domain_radius >= needed) {
            return Err(Error::Configuration(format!(
                "domain radius {} is smaller than R + phi(t_max) + 2dx = {needed}",
                self.domain_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlowupReason {
    Threshold,
    Nan,
}

impl BlowupReason {
    pub fn name(self) -> &'static str {
        match self {
            BlowupReason::Threshold => "threshold",
            BlowupReason::Nan => "nan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub duhamel_max_rel: f64,
    pub u1u0_max_rel: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub u_series: Vec<f64>,
    pub u0_series: Vec<f64>,
    pub u1_series: Vec<f64>,
    pub support_radius_series: Vec<f64>,
    pub max_abs_u_series: Vec<f64>,
    /// `∫(|u_t|^p + |u|^q) dx`
    pub source_series: Vec<f64>,
    /// `∫(|u_t|^p + |u|^q) Ψ dx`
    pub psi_source_series: Vec<f64>,
    /// `U(0) + U'(0)t + ∫₀^t∫₀^s ∫(|u_t|^p + |u|^q) dx dτ ds`
    pub duhamel_series: Vec<f64>,
    /// `U₁ − (λ'/λ)U₀`
    pub u1u0_lhs_series: Vec<f64>,
    /// `εI_ℓ + ∫₀^t ∫(|u_t|^p + |u|^q)Ψ dx ds`
    pub u1u0_rhs_series: Vec<f64>,
    /// `εI_ℓ[u₀,u₁]` with the solver's quadrature.
    pub data_functional: f64,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<BlowupReason>,
    pub identity_residuals: IdentityResiduals,
    pub steps: usize,
    pub dx: f64,
}

impl SimResult {
    /// CSV with columns `t, U, U0, U1, support_radius, max_abs_u`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }

    pub fn write_csv_to<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,U,U0,U1,support_radius,max_abs_u")?;
        for i in 0..self.times.len() {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                self.times[i],
                self.u_series[i],
                self.u0_series[i],
                self.u1_series[i],
                self.support_radius_series[i],
                self.max_abs_u_series[i]
            )?;
        }
        Ok(())
    }
}

/// `λ` and its log-derivative; `ℓ = 0` is the wave case `λ = e^{−t}`.
#[derive(Debug, Clone, Copy)]
enum TimeFactor {
    Tricomi(TricomiIndex),
    Wave,
}

impl TimeFactor {
    fn new(ell: f64) -> Result<Self> {
        if ell == 0.0 {
            Ok(TimeFactor::Wave)
        } else {
            Ok(TimeFactor::Tricomi(TricomiIndex::new(ell)?))
        }
    }

    /// `λ(t) e^{φ_ℓ(t)}`
    fn scaled(&self, t: f64) -> Result<f64> {
        match self {
            TimeFactor::Tricomi(idx) => Ok(testfun::lambda_scaled(t, idx)?.value),
            TimeFactor::Wave => Ok(1.0),
        }
    }

    fn log_derivative(&self, t: f64) -> Result<f64> {
        match self {
            TimeFactor::Tricomi(idx) => testfun::lambda_log_derivative(t, idx),
            TimeFactor::Wave => Ok(-1.0),
        }
    }

    fn prime_at_zero(&self) -> Result<f64> {
        match self {
            TimeFactor::Tricomi(idx) => testfun::lambda_prime_at_zero(idx.ell),
            TimeFactor::Wave => Ok(-1.0),
        }
    }
}

/// Fields at the current and previous time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
    /// Step that produced `u` from `u_prev` (zero before the first step).
    pub dt_current: f64,
    pub steps: usize,
}

/// Outcome of one call to [`Simulation::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    Finished,
    BlowUp(BlowupReason),
}

/// Grid data, the evolving state and running identity integrals.
pub struct Simulation {
    config: SimConfig,
    dx: f64,
    radii: Vec<f64>,
    /// `ω_{n−1} V_i`: quadrature weights of the functionals
    weights: Vec<f64>,
    lap_plus: Vec<f64>,
    lap_minus: Vec<f64>,
    /// `e^{−r} φ(r)` on the grid
    eigen_scaled: Vec<f64>,
    time_factor: TimeFactor,
    state: SimState,
    /// `u_t` at `t = 0`
    velocity0: Vec<f64>,
    /// `F` at the previous level, for the `u_t` estimate
    accel_prev: Vec<f64>,
    accel: Vec<f64>,
    velocity: Vec<f64>,
    u_next: Vec<f64>,
    /// first index beyond which `u`, `u_prev` vanish identically
    active: usize,
    max_abs_u: f64,
    u_at_zero: f64,
    du_at_zero: f64,
    blowup: Option<(f64, BlowupReason)>,
    acc: Accumulators,
    result: SimResult,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulators {
    last_t: f64,
    last_source: f64,
    last_psi_source: f64,
    source_int: f64,
    source_int2: f64,
    psi_source_int: f64,
    started: bool,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.params.n;
        let len = config.grid_points;
        let dx = config.dx();
        let omega = testfun::sphere_area(n - 1);
        let nf = n as f64;
        let radii: Vec<f64> = (0..len).map(|i| i as f64 * dx).collect();
        let mut weights = Vec::with_capacity(len);
        let mut lap_plus = Vec::with_capacity(len);
        let mut lap_minus = Vec::with_capacity(len);
        for &r in &radii {
            let outer = r + 0.5 * dx;
            let inner = (r - 0.5 * dx).max(0.0);
            let vol = (outer.powi(n as i32) - inner.powi(n as i32)) / nf;
            weights.push(omega * vol);
            lap_plus.push(outer.powi(n as i32 - 1) / (dx * vol));
            lap_minus.push(if r == 0.0 {
                0.0
            } else {
                inner.powi(n as i32 - 1) / (dx * vol)
            });
        }
        let eigen_scaled = radii.iter().map(|&r| testfun::eigenfunction_scaled(r, n)).collect();
        let time_factor = TimeFactor::new(config.params.ell)?;

        let data = config.data.sample(n, dx, len)?;
        let eps = config.params.epsilon;
        let mut u: Vec<f64> = data.u0.values.iter().map(|v| eps * v).collect();
        let mut velocity0: Vec<f64> = data.u1.values.iter().map(|v| eps * v).collect();
        u[len - 1] = 0.0;
        velocity0[len - 1] = 0.0;
        let active = u
            .iter()
            .zip(&velocity0)
            .rposition(|(a, b)| *a != 0.0 || *b != 0.0)
            .map_or(0, |i| i + 1);
        let max_abs_u = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let u_at_zero = u.iter().zip(&weights).map(|(v, w)| v * w).sum();
        let du_at_zero = velocity0.iter().zip(&weights).map(|(v, w)| v * w).sum();

        let mut sim = Self {
            dx,
            radii,
            weights,
            lap_plus,
            lap_minus,
            eigen_scaled,
            time_factor,
            state: SimState {
                t: 0.0,
                u_prev: u.clone(),
                u,
                dt_current: 0.0,
                steps: 0,
            },
            velocity0,
            accel_prev: vec![0.0; len],
            accel: vec![0.0; len],
            velocity: vec![0.0; len],
            u_next: vec![0.0; len],
            active,
            max_abs_u,
            u_at_zero,
            du_at_zero,
            blowup: None,
            acc: Accumulators::default(),
            result: SimResult {
                dx,
                ..SimResult::default()
            },
            config,
        };
        sim.result.data_functional = sim.data_functional()?;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Quadrature weights `ω_{n−1}V_i` of `∫_{ℝⁿ} · dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn data_functional(&self) -> Result<f64> {
        let d0 = self.time_factor.prime_at_zero()?;
        let mut sum = 0.0;
        for i in 0..self.active.min(self.radii.len()) {
            let g = self.velocity0[i] - d0 * self.state.u[i];
            sum += self.weights[i] * g * self.eigen_scaled[i] * self.radii[i].exp();
        }
        Ok(sum)
    }

    fn time_step(&self) -> f64 {
        let cfg = &self.config;
        let t = self.state.t;
        let speed = t.powf(cfg.params.ell).max(0.1);
        let mut dt = (cfg.cfl_safety * self.dx / speed).min(self.dx);
        if !cfg.linear_only {
            let ModelParams { p, q, .. } = cfg.params;
            let hi = self.active.min(self.velocity.len());
            let vmax = self.velocity[..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rate = self.max_abs_u.powf(0.5 * (q - 1.0)).max(vmax.powf(p - 1.0));
            if rate > 0.0 {
                dt = dt.min(cfg.nonlinear_dt_factor / rate);
            }
        }
        dt.min(cfg.t_max - t)
    }

    fn source(&self, v: f64, u: f64) -> f64 {
        if self.config.linear_only {
            0.0
        } else {
            v.abs().powf(self.config.params.p) + u.abs().powf(self.config.params.q)
        }
    }

    /// Advances one time level.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some((_, reason)) = self.blowup {
            return Ok(StepOutcome::BlowUp(reason));
        }
        if self.state.t >= self.config.t_max {
            return Ok(StepOutcome::Finished);
        }
        let len = self.radii.len();
        let first = self.state.steps == 0;
        let dt_prev = self.state.dt_current;
        let hi = (self.active + 1).min(len - 1);

        // u_t at the current level
        if first {
            self.velocity[..hi].copy_from_slice(&self.velocity0[..hi]);
        } else {
            for i in 0..hi {
                self.velocity[i] =
                    (self.state.u[i] - self.state.u_prev[i]) / dt_prev + 0.5 * dt_prev * self.accel_prev[i];
            }
        }
        let dt = self.time_step();
        let t = self.state.t;
        let coef = t.powf(2.0 * self.config.params.ell);
        let u = &self.state.u;
        for i in 0..hi {
            let lap = self.lap_plus[i] * (u[i + 1] - u[i])
                - if i > 0 {
                    self.lap_minus[i] * (u[i] - u[i - 1])
                } else {
                    0.0
                };
            self.accel[i] = coef * lap + self.source(self.velocity[i], u[i]);
        }
        let mut max_abs = 0.0f64;
        let mut finite = true;
        for i in 0..hi {
            let next = if first {
                u[i] + dt * self.velocity[i] + 0.5 * dt * dt * self.accel[i]
            } else {
                u[i] + (dt / dt_prev) * (u[i] - self.state.u_prev[i]) + 0.5 * dt * (dt + dt_prev) * self.accel[i]
            };
            finite &= next.is_finite();
            max_abs = max_abs.max(next.abs());
            self.u_next[i] = next;
        }
        self.u_next[len - 1] = 0.0;

        self.record_level(dt, dt_prev, hi)?;

        std::mem::swap(&mut self.state.u_prev, &mut self.state.u);
        std::mem::swap(&mut self.state.u, &mut self.u_next);
        std::mem::swap(&mut self.accel_prev, &mut self.accel);
        self.state.t = t + dt;
        self.state.dt_current = dt;
        self.state.steps += 1;
        self.active = hi;
        self.max_abs_u = max_abs;

        if !finite {
            self.blowup = Some((self.state.t, BlowupReason::Nan));
            return Ok(StepOutcome::BlowUp(BlowupReason::Nan));
        }
        if max_abs > self.config.blowup_threshold {
            self.blowup = Some((self.state.t, BlowupReason::Threshold));
            return Ok(StepOutcome::BlowUp(BlowupReason::Threshold));
        }
        if self.state.t >= self.config.t_max {
            return Ok(StepOutcome::Finished);
        }
        Ok(StepOutcome::Advanced)
    }

    /// Functionals at the current level, using `u_next` for a centred `u_t`.
    fn record_level(&mut self, dt: f64, dt_prev: f64, hi: usize) -> Result<()> {
        let k = self.state.steps;
        let t = self.state.t;
        let first = k == 0;
        let ell = self.config.params.ell;
        let lam_s = self.time_factor.scaled(t)?;
        let shift = testfun::phi_cone(t, ell);
        let u = &self.state.u;

        let (mut big_u, mut u0f, mut u1f, mut src, mut psrc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut max_abs = 0.0f64;
        for i in 0..hi {
            max_abs = max_abs.max(u[i].abs());
        }
        let mut support = 0.0;
        for i in 0..hi {
            let ut = if first {
                self.velocity0[i]
            } else {
                (dt_prev * dt_prev * (self.u_next[i] - u[i]) + dt * dt * (u[i] - self.state.u_prev[i]))
                    / (dt * dt_prev * (dt + dt_prev))
            };
            if u[i] == 0.0 && ut == 0.0 {
                continue;
            }
            let w = self.weights[i];
            let psi = lam_s * self.eigen_scaled[i] * (self.radii[i] - shift).exp();
            let s = self.source(ut, u[i]);
            big_u += w * u[i];
            u0f += w * u[i] * psi;
            u1f += w * ut * psi;
            src += w * s;
            psrc += w * s * psi;
            if u[i].abs() > SUPPORT_REL_THRESHOLD * max_abs {
                support = self.radii[i];
            }
        }

        let acc = &mut self.acc;
        if acc.started {
            let h = t - acc.last_t;
            let prev_int = acc.source_int;
            acc.source_int += 0.5 * h * (acc.last_source + src);
            acc.source_int2 += 0.5 * h * (prev_int + acc.source_int);
            acc.psi_source_int += 0.5 * h * (acc.last_psi_source + psrc);
        }
        acc.started = true;
        acc.last_t = t;
        acc.last_source = src;
        acc.last_psi_source = psrc;

        if k.is_multiple_of(self.config.record_stride) {
            let lhs = u1f - self.time_factor.log_derivative(t)? * u0f;
            let r = &mut self.result;
            r.times.push(t);
            r.u_series.push(big_u);
            r.u0_series.push(u0f);
            r.u1_series.push(u1f);
            r.support_radius_series.push(support);
            r.max_abs_u_series.push(max_abs);
            r.source_series.push(src);
            r.psi_source_series.push(psrc);
            r.duhamel_series
                .push(self.u_at_zero + self.du_at_zero * t + acc.source_int2);
            r.u1u0_lhs_series.push(lhs);
            r.u1u0_rhs_series.push(r.data_functional + acc.psi_source_int);
        }
        Ok(())
    }
}

/// Initial state of a configuration (for inspection; [`Simulation`] owns the
/// evolving one).
pub fn init(config: &SimConfig) -> Result<SimState> {
    Ok(Simulation::new(config.clone())?.state().clone())
}

/// Integrates to `t_max` or blow-up and evaluates the identity residuals.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    let mut sim = Simulation::new(config.clone())?;
    loop {
        match sim.step()? {
            StepOutcome::Advanced => {}
            StepOutcome::Finished => break,
            StepOutcome::BlowUp(_) => break,
        }
    }
    Ok(sim.finish())
}

impl Simulation {
    pub fn finish(mut self) -> SimResult {
        let mut r = std::mem::take(&mut self.result);
        r.steps = self.state.steps;
        if let Some((t, reason)) = self.blowup {
            r.blowup_time = Some(t);
            r.blowup_reason = Some(reason);
        }
        let end = identity_window_end(&r);
        r.identity_residuals = IdentityResiduals {
            duhamel_max_rel: check_duhamel_identity(&r, end),
            u1u0_max_rel: check_u1_u0_identity(&r, end),
        };
        r
    }
}

/// Identities are checked on `[0, 0.9·T]` for blow-up runs and on the
/// whole run otherwise.
pub fn identity_window_end(result: &SimResult) -> f64 {
    match result.blowup_time {
        Some(t) => PRE_BLOWUP_FRACTION * t,
        None => result.times.last().copied().unwrap_or(0.0),
    }
}

/// Max over recorded `t ≤ t_end` with `|U| > 1e-10` of
/// `|U − U(0) − U'(0)t − ∫∫∫ source| / |U|`; zero for an all-zero run.
pub fn check_duhamel_identity(result: &SimResult, t_end: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..result.times.len() {
        if result.times[i] > t_end {
            break;
        }
        let u = result.u_series[i];
        if u.abs() > 1e-10 {
            worst = worst.max((u - result.duhamel_series[i]).abs() / u.abs());
        }
    }
    worst
}

/// Max over recorded `t ≤ t_end` of
/// `|U₁ − (λ'/λ)U₀ − εI_ℓ − ∫∫ source·Ψ| / max(|lhs|, |rhs|)`.
pub fn check_u1_u0_identity(result: &SimResult, t_end: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..result.times.len() {
        if result.times[i] > t_end {
            break;
        }
        let (lhs, rhs) = (result.u1u0_lhs_series[i], result.u1u0_rhs_series[i]);
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanEstimate {
    /// Blow-up time on the finest grid, if it blew up there.
    pub t_est: Option<f64>,
    /// Largest difference between blow-up times across resolutions;
    /// infinite when only some resolutions blew up.
    pub uncertainty: f64,
    pub grid_points: Vec<usize>,
    pub blowup_times: Vec<Option<f64>>,
}

impl LifespanEstimate {
    pub fn relative_uncertainty(&self) -> Option<f64> {
        self.t_est.map(|t| self.uncertainty / t)
    }
}

/// Runs at `grid_points·2^i`, `i < refinements`, and reports the finest
/// blow-up time with the spread across resolutions.
pub fn estimate_lifespan(config: &SimConfig, refinements: usize, mode: ExecMode) -> Result<LifespanEstimate> {
    if refinements < 2 {
        return Err(Error::Configuration(format!(
            "need at least 2 refinements, got {refinements}"
        )));
    }
    config.validate()?;
    let configs: Vec<SimConfig> = (0..refinements)
        .map(|i| {
            let mut c = config.clone().with_grid_points((config.grid_points - 1) * (1 << i) + 1);
            // Only the blow-up time is needed.
            c.record_stride = usize::MAX;
            c
        })
        .collect();
    let runs = mode.map(&configs, None, |c| run(c).map(|r| r.blowup_time));
    let blowup_times = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let (t_est, uncertainty) = summarize_blowup_times(&blowup_times);
    Ok(LifespanEstimate {
        t_est,
        uncertainty,
        grid_points: configs.iter().map(|c| c.grid_points).collect(),
        blowup_times,
    })
}

/// Finest-resolution blow-up time and the spread across resolutions; the
/// spread is infinite when only some resolutions blew up.
pub fn summarize_blowup_times(times: &[Option<f64>]) -> (Option<f64>, f64) {
    let observed: Vec<f64> = times.iter().flatten().copied().collect();
    let spread = if observed.is_empty() {
        0.0
    } else if observed.len() < times.len() {
        f64::INFINITY
    } else {
        let lo = observed.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    (times.last().copied().flatten(), spread)
}

/// Largest `K` with `K ε^m (1+t)^{−α₀} (t − 2T₀)^{β₀} ≤ U(t)` on the recorded
/// times in `(2T₀, t_end]`.
pub fn calibrate_seed(result: &SimResult, seed: &crate::iteration::IterationSeed, t_end: f64) -> Result<f64> {
    let mut k = f64::INFINITY;
    let scale = seed.epsilon.powf(seed.epsilon_power);
    for (i, &t) in result.times.iter().enumerate() {
        if t <= 2.0 * seed.t0 || t > t_end {
            continue;
        }
        let shape = scale * (1.0 + t).powf(-seed.alpha0) * (t - 2.0 * seed.t0).powf(seed.beta0);
        k = k.min(result.u_series[i] / shape);
    }
    if k.is_finite() && k > 0.0 {
        Ok(k)
    } else {
        Err(Error::InsufficientData(format!(
            "no positive samples in (2 t0, {t_end}] to calibrate the first lower bound"
        )))
    }
}

/// Largest `C` with `C ∫₀^t∫₀^s (1+τ)^{−a} U(τ)^q dτ ds ≤ U(t)` on the recorded
/// times in `(0, t_end]`, the double integral by the trapezoid rule.
pub fn calibrate_frame(result: &SimResult, params: &ModelParams, t_end: f64) -> Result<f64> {
    let a = crate::iteration::frame_exponent(params);
    let mut c = f64::INFINITY;
    let (mut inner, mut outer) = (0.0, 0.0);
    let integrand = |i: usize| (1.0 + result.times[i]).powf(-a) * result.u_series[i].max(0.0).powf(params.q);
    for i in 1..result.times.len() {
        let t = result.times[i];
        if t > t_end {
            break;
        }
        let h = t - result.times[i - 1];
        let prev = inner;
        inner += 0.5 * h * (integrand(i - 1) + integrand(i));
        outer += 0.5 * h * (prev + inner);
        if outer > 0.0 {
            c = c.min(result.u_series[i] / outer);
        }
    }
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::InsufficientData(format!(
            "no samples in (0, {t_end}] to calibrate the frame constant"
        )))
    }
}
