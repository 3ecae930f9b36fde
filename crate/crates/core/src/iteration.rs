//! The iteration argument: lower bounds
//! `U(t) ≥ C_j (1+t)^{−α_j} (t − 2T₀)^{β_j}` generated from a first lower
//! bound, and the lifespan estimate that falls out when they diverge.
//!
//! `C_j` is doubly exponential in `j`, so it is carried as `log C_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;

/// Which first lower bound seeds the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedVariant {
    /// From the derivative nonlinearity: `C₀ = Kε^p`.
    Derivative,
    /// From the power nonlinearity: `C₀ = K̃ε^q`.
    Power,
    /// From the linear growth `U(t) ≥ K̃₀εt`, needs `∫u₁ > 0`.
    Linear,
}

impl SeedVariant {
    pub const ALL: [SeedVariant; 3] = [SeedVariant::Derivative, SeedVariant::Power, SeedVariant::Linear];

    pub fn name(self) -> &'static str {
        match self {
            SeedVariant::Derivative => "derivative",
            SeedVariant::Power => "power",
            SeedVariant::Linear => "linear",
        }
    }

    /// Power of `ε` in `C₀`.
    pub fn epsilon_power(self, params: &ModelParams) -> f64 {
        match self {
            SeedVariant::Derivative => params.p,
            SeedVariant::Power => params.q,
            SeedVariant::Linear => 1.0,
        }
    }
}

impl std::str::FromStr for SeedVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derivative" | "flb1" => Ok(SeedVariant::Derivative),
            "power" | "flb2" => Ok(SeedVariant::Power),
            "linear" | "flb3" => Ok(SeedVariant::Linear),
            other => Err(Error::Configuration(format!(
                "unknown seed variant '{other}' (expected derivative, power or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSeed {
    pub c0: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub t0: f64,
    pub variant: SeedVariant,
    /// The constant `K` with `C₀ = K ε^m`.
    pub calibration: f64,
    pub epsilon: f64,
    /// The power `m` in `C₀ = K ε^m`.
    pub epsilon_power: f64,
}

impl IterationSeed {
    pub fn log_c0(&self) -> f64 {
        self.calibration.ln() + self.epsilon_power * self.epsilon.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    pub j: u32,
    pub log_c_j: f64,
    pub alpha_j: f64,
    pub beta_j: f64,
    pub frame_constant: f64,
    pub a: f64,
}

impl IterationState {
    pub fn c_j(&self) -> f64 {
        self.log_c_j.exp()
    }
}

/// `a = (ℓ+1)n(q−1)`, the per-step growth of `α_j`.
pub fn frame_exponent(params: &ModelParams) -> f64 {
    params.scaled_dim() * (params.q - 1.0)
}

/// Builds the seed triple `(C₀, α₀, β₀)` of the chosen first lower bound.
pub fn seed(params: &ModelParams, variant: SeedVariant, t0: f64, calibration: f64) -> Result<IterationSeed> {
    params.validate()?;
    if !(t0 > 0.0 && t0.is_finite()) || !(calibration > 0.0 && calibration.is_finite()) {
        return Err(Error::Configuration(format!(
            "t0 = {t0} and calibration = {calibration} must be positive"
        )));
    }
    let ModelParams { n, ell, p, q, .. } = *params;
    let nm1 = n as f64 - 1.0;
    let (alpha0, beta0) = match variant {
        SeedVariant::Derivative => ((ell + 1.0) * nm1 * p / 2.0, ell * p / 2.0 + (ell + 1.0) * nm1 + 2.0),
        SeedVariant::Power => {
            if n < 2 {
                return Err(Error::Configuration("the power-nonlinearity seed needs n >= 2".into()));
            }
            (nm1 * (ell + 1.0) * q / 2.0 + ell * q / 2.0, nm1 * (ell + 1.0) + 2.0)
        }
        SeedVariant::Linear => (0.0, 1.0),
    };
    let epsilon_power = variant.epsilon_power(params);
    Ok(IterationSeed {
        c0: calibration * params.epsilon.powf(epsilon_power),
        alpha0,
        beta0,
        t0,
        variant,
        calibration,
        epsilon: params.epsilon,
        epsilon_power,
    })
}

pub fn initial_state(seed: &IterationSeed, params: &ModelParams, frame_constant: f64) -> IterationState {
    IterationState {
        j: 0,
        log_c_j: seed.log_c0(),
        alpha_j: seed.alpha0,
        beta_j: seed.beta0,
        frame_constant,
        a: frame_exponent(params),
    }
}

/// One step of `C_{j+1} = C·C_j^q/((β_j q+1)(β_j q+2))`, `α_{j+1} = a + qα_j`,
/// `β_{j+1} = qβ_j + 2`.
pub fn recursion_step(state: &IterationState, q: f64) -> IterationState {
    let bq = state.beta_j * q;
    IterationState {
        j: state.j + 1,
        log_c_j: state.frame_constant.ln() + q * state.log_c_j - (bq + 1.0).ln() - (bq + 2.0).ln(),
        alpha_j: state.a + q * state.alpha_j,
        beta_j: bq + 2.0,
        frame_constant: state.frame_constant,
        a: state.a,
    }
}

/// States `0..=steps` of the exact recursion.
pub fn trajectory(seed: &IterationSeed, params: &ModelParams, frame_constant: f64, steps: u32) -> Vec<IterationState> {
    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut state = initial_state(seed, params, frame_constant);
    out.push(state);
    for _ in 0..steps {
        state = recursion_step(&state, params.q);
        out.push(state);
    }
    out
}

/// `(α_j, β_j)` in closed form.
pub fn closed_forms(seed: &IterationSeed, a: f64, q: f64, j: u32) -> (f64, f64) {
    let qj = q.powi(j as i32);
    let sa = a / (q - 1.0);
    let sb = 2.0 / (q - 1.0);
    ((sa + seed.alpha0) * qj - sa, (sb + seed.beta0) * qj - sb)
}

/// Constants of the logarithmic lower bound on `C_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConstants {
    /// `C̃ = C (2/(q−1) + β₀)^{−2}`
    pub c_tilde: f64,
    /// `D = K q^{−2q/(q−1)²} C̃^{1/(q−1)}`
    pub d: f64,
    pub j0: u32,
}

pub fn iteration_constants(seed: &IterationSeed, frame_constant: f64, q: f64) -> IterationConstants {
    let c_tilde = frame_constant * (2.0 / (q - 1.0) + seed.beta0).powi(-2);
    let qm1 = q - 1.0;
    let log_d = seed.calibration.ln() - 2.0 * q / (qm1 * qm1) * q.ln() + c_tilde.ln() / qm1;
    let x = c_tilde.ln() / (2.0 * q.ln()) - q / qm1;
    let j0 = (x.floor() + 1.0).max(0.0) as u32;
    IterationConstants {
        c_tilde,
        d: log_d.exp(),
        j0,
    }
}

/// `q^j log(D ε^m)`, a lower bound for `log C_j` once `j ≥ j₀`.
pub fn log_cj_bound(seed: &IterationSeed, frame_constant: f64, q: f64, j: u32) -> Result<f64> {
    let k = iteration_constants(seed, frame_constant, q);
    if j < k.j0 {
        return Err(Error::NotApplicable(format!("j = {j} is below j0 = {}", k.j0)));
    }
    Ok(q.powi(j as i32) * (k.d.ln() + seed.epsilon_power * seed.epsilon.ln()))
}

/// `log[C_j (1+t)^{−α_j} (t − 2T₀)^{β_j}]`; the envelope itself is positive.
pub fn log_lower_bound_envelope(t: f64, state: &IterationState, t0: f64) -> Result<f64> {
    if !(t > 2.0 * t0) {
        return Err(Error::Domain(format!(
            "envelope needs t > 2 t0, got t = {t}, t0 = {t0}"
        )));
    }
    Ok(state.log_c_j - state.alpha_j * (1.0 + t).ln() + state.beta_j * (t - 2.0 * t0).ln())
}

pub fn lower_bound_envelope(t: f64, state: &IterationState, t0: f64) -> Result<f64> {
    log_lower_bound_envelope(t, state, t0).map(f64::exp)
}

/// `q^j log(D ε^m) − α_j log(2t) + β_j log(t/2)`, the envelope after
/// `1+t ≤ 2t` and `t − 2T₀ ≥ t/2` (valid for `t ≥ 4T₀`). Its leading
/// coefficient in `q^j` changes sign exactly at [`lifespan_upper_bound`].
pub fn log_proof_envelope(
    t: f64,
    seed: &IterationSeed,
    params: &ModelParams,
    frame_constant: f64,
    j: u32,
) -> Result<f64> {
    if !(t >= 4.0 * seed.t0) {
        return Err(Error::Domain(format!(
            "proof envelope needs t >= 4 t0, got t = {t}, t0 = {}",
            seed.t0
        )));
    }
    let q = params.q;
    let d = iteration_constants(seed, frame_constant, q).d;
    let (alpha, beta) = closed_forms(seed, frame_exponent(params), q, j);
    let lead = d.ln() + seed.epsilon_power * seed.epsilon.ln();
    Ok(q.powi(j as i32) * lead - alpha * (2.0 * t).ln() + beta * (0.5 * t).ln())
}

/// `(q−1)·[(2−a)/(q−1) + β₀ − α₀]`: equals `θ` for the derivative seed, `γ` for
/// the power seed and `q+1 − (ℓ+1)n(q−1)` for the linear seed.
pub fn divergence_exponent(params: &ModelParams, seed: &IterationSeed) -> f64 {
    let a = frame_exponent(params);
    2.0 - a + (seed.beta0 - seed.alpha0) * (params.q - 1.0)
}

fn two_power_numerator(params: &ModelParams, seed: &IterationSeed) -> f64 {
    (seed.alpha0 + seed.beta0) * (params.q - 1.0) + frame_exponent(params) + 2.0
}

fn positive_exponent(params: &ModelParams, seed: &IterationSeed) -> Result<f64> {
    let th = divergence_exponent(params, seed);
    if th > 0.0 {
        Ok(th)
    } else {
        Err(Error::OutsideRegion(th))
    }
}

/// Exponent `k` of the lifespan estimate `T ≲ ε^{−k}` for this seed.
pub fn lifespan_exponent(params: &ModelParams, seed: &IterationSeed) -> Result<f64> {
    Ok(seed.epsilon_power * (params.q - 1.0) / positive_exponent(params, seed)?)
}

/// The time beyond which the envelopes diverge as `j → ∞`:
/// `2^{X/θ} D^{−(q−1)/θ} ε^{−m(q−1)/θ}` with `X = (α₀+β₀)(q−1) + a + 2`.
pub fn lifespan_upper_bound(params: &ModelParams, seed: &IterationSeed, frame_constant: f64) -> Result<f64> {
    let th = positive_exponent(params, seed)?;
    let qm1 = params.q - 1.0;
    let d = iteration_constants(seed, frame_constant, params.q).d;
    let log_t = (two_power_numerator(params, seed) * std::f64::consts::LN_2
        - qm1 * d.ln()
        - seed.epsilon_power * qm1 * seed.epsilon.ln())
        / th;
    Ok(log_t.exp())
}

/// The `ε₀` whose divergence time is exactly `t1`; smaller data blow up no
/// earlier than `t1`.
pub fn epsilon0_threshold(params: &ModelParams, seed: &IterationSeed, frame_constant: f64, t1: f64) -> Result<f64> {
    let th = positive_exponent(params, seed)?;
    if !(t1 > 0.0) {
        return Err(Error::Domain(format!("t1 must be positive, got {t1}")));
    }
    let qm1 = params.q - 1.0;
    let d = iteration_constants(seed, frame_constant, params.q).d;
    // ε₀^{−m(q−1)/θ} = 2^{−X/θ} D^{(q−1)/θ} t1
    let rhs = -two_power_numerator(params, seed) * std::f64::consts::LN_2 / th + qm1 * d.ln() / th + t1.ln();
    Ok((-rhs * th / (seed.epsilon_power * qm1)).exp())
}
