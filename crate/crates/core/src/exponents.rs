//! Critical exponents, the blow-up region `Γ(n,ℓ)` and lifespan-bound
//! selection.
//!
//! `Γ(n,ℓ)` is the set of `(p, q) ∈ (1,∞)²` with
//! `[((ℓ+1)n − 1)p − 2ℓ(p − 1) − 2](q − 1) < 4`, equivalently `θ > 0`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the critical cases `q = p₀`, `p = p₁`.
pub const CRITICAL_TOL: f64 = 1e-12;

/// One problem instance: dimension, Tricomi exponent, nonlinearity powers and
/// data size/support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub ell: f64,
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub radius: f64,
}

impl ModelParams {
    pub fn new(n: u32, ell: f64, p: f64, q: f64) -> Self {
        Self {
            n,
            ell,
            p,
            q,
            epsilon: 1.0,
            radius: 1.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n >= 1
            && self.ell >= 0.0
            && self.ell.is_finite()
            && self.p > 1.0
            && self.p.is_finite()
            && self.q > 1.0
            && self.q.is_finite()
            && self.epsilon > 0.0
            && self.epsilon.is_finite()
            && self.radius > 0.0
            && self.radius.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration(format!(
                "invalid parameters: need n >= 1, ell >= 0, p > 1, q > 1, eps > 0, R > 0; got {self:?}"
            )))
        }
    }

    /// The effective dimension `(ℓ+1)n`.
    pub fn scaled_dim(&self) -> f64 {
        scaled_dim(self.n, self.ell)
    }
}

fn scaled_dim(n: u32, ell: f64) -> f64 {
    (ell + 1.0) * n as f64
}

/// Larger root of `a x² + b x + c = 0` (`a ≠ 0`, real roots), computed without
/// cancellation.
pub fn greatest_root(a: f64, b: f64, c: f64) -> Result<f64> {
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return Err(Error::DegenerateConfiguration(format!(
            "quadratic {a}x² + {b}x + {c} has no pair of real roots"
        )));
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Ok(r1.max(r2))
}

fn require_n2(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "this exponent is defined for n >= 2, got n = {n}"
        )));
    }
    Ok(())
}

/// `p₀(n;ℓ)`: positive root of `((ℓ+1)n−1)p² − ((ℓ+1)n+1−2ℓ)p − 2(ℓ+1) = 0`.
pub fn p0(n: u32, ell: f64) -> Result<f64> {
    require_n2(n)?;
    let m = scaled_dim(n, ell);
    greatest_root(m - 1.0, -(m + 1.0 - 2.0 * ell), -2.0 * (ell + 1.0))
}

/// `p₁(n;ℓ) = ((ℓ+1)n+1)/((ℓ+1)n−1)`, the Glassey exponent of `(ℓ+1)n`.
pub fn p1(n: u32, ell: f64) -> Result<f64> {
    let m = scaled_dim(n, ell);
    if !(m > 1.0) {
        return Err(Error::Domain(format!("p1 needs (ell+1)n > 1, got {m}")));
    }
    Ok((m + 1.0) / (m - 1.0))
}

/// Glassey, Kato and conformal exponents of a (possibly fractional)
/// dimension `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyExponents {
    pub p_gla: f64,
    pub p_kat: f64,
    pub p_conf: f64,
}

pub fn family_exponents(m: f64) -> Result<FamilyExponents> {
    if !(m > 1.0) {
        return Err(Error::Domain(format!("dimension parameter must exceed 1, got {m}")));
    }
    Ok(FamilyExponents {
        p_gla: 1.0 + 2.0 / (m - 1.0),
        p_kat: (m + 1.0) / (m - 1.0),
        p_conf: (m + 3.0) / (m - 1.0),
    })
}

/// Strauss exponent: greatest root of `(n−1)(p−1)² + (n−3)(p−1) − 4 = 0`.
pub fn p_strauss(n: u32) -> Result<f64> {
    require_n2(n)?;
    strauss_type_root(n as f64 - 1.0, n as f64 - 3.0)
}

/// `1 + y` with `y` the greatest root of `α y² + β y − 4 = 0`.
pub fn strauss_type_root(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "leading coefficient alpha = {alpha} must be positive"
        )));
    }
    Ok(1.0 + greatest_root(alpha, beta, -4.0)?)
}

fn diag_leading(n: u32, ell: f64) -> Result<f64> {
    let lead = scaled_dim(n, ell) - 1.0 - 2.0 * ell;
    if !(lead > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "(ell+1)n - 1 - 2 ell = {lead} must be positive"
        )));
    }
    Ok(lead)
}

/// `p_diag(n;ℓ)`: where `∂Γ` meets the diagonal `p = q`.
pub fn p_diag(n: u32, ell: f64) -> Result<f64> {
    let lead = diag_leading(n, ell)?;
    let m = scaled_dim(n, ell);
    greatest_root(lead, -(m + 1.0 - 4.0 * ell), -2.0 * (ell + 1.0))
}

/// `p̃₀(n;ℓ)`: abscissa of the point `Q` where `∂Γ` meets `q = p₀`.
pub fn p_tilde0(n: u32, ell: f64) -> Result<f64> {
    let lead = diag_leading(n, ell)?;
    let m = scaled_dim(n, ell);
    let b = m - 3.0 - 2.0 * ell;
    let c = -2.0 * (ell + 2.0) - 4.0 * ell * (ell + 1.0) / lead;
    Ok(1.0 + greatest_root(lead, b, c)?)
}

/// `p̃₁(n;ℓ)`: ordinate of the point `P` where `∂Γ` meets `p = p₁`.
pub fn p_tilde1(n: u32, ell: f64) -> Result<f64> {
    let m = scaled_dim(n, ell);
    let den = (m - 1.0) * (m - 1.0) - 4.0 * ell;
    if !(den > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "((ell+1)n-1)^2 - 4 ell = {den} must be positive"
        )));
    }
    Ok(((m + 3.0) * (m - 1.0) - 4.0 * ell) / den)
}

/// The bracket `((ℓ+1)n − 1)p − 2ℓ(p − 1) − 2` multiplying `q − 1`.
pub fn region_bracket(n: u32, ell: f64, p: f64) -> f64 {
    (scaled_dim(n, ell) - 1.0) * p - 2.0 * ell * (p - 1.0) - 2.0
}

fn region_product(params: &ModelParams) -> f64 {
    region_bracket(params.n, params.ell, params.p) * (params.q - 1.0)
}

/// `θ(n,ℓ,p,q) = 2 − ½[((ℓ+1)n−1)p − 2ℓ(p−1) − 2](q−1)`.
pub fn theta(params: &ModelParams) -> f64 {
    2.0 - 0.5 * region_product(params)
}

/// `γ(n,ℓ,q) = (ℓ+1) + ½((ℓ+1)n+1−2ℓ)q − ½((ℓ+1)n−1)q²`.
pub fn gamma_exp(n: u32, ell: f64, q: f64) -> Result<f64> {
    require_n2(n)?;
    let m = scaled_dim(n, ell);
    Ok((ell + 1.0) + 0.5 * (m + 1.0 - 2.0 * ell) * q - 0.5 * (m - 1.0) * q * q)
}

/// Abscissa of the vertical asymptote of `∂Γ`, if there is one.
pub fn boundary_asymptote(n: u32, ell: f64) -> Option<f64> {
    let slope = scaled_dim(n, ell) - 1.0 - 2.0 * ell;
    (slope != 0.0).then(|| (2.0 - 2.0 * ell) / slope)
}

/// `f(p;n,ℓ) = 1 + 4/(((ℓ+1)n−1−2ℓ)p + 2ℓ − 2)`: the `q`-value of `∂Γ` above `p`.
pub fn boundary_q(p: f64, n: u32, ell: f64) -> Result<f64> {
    let den = (scaled_dim(n, ell) - 1.0 - 2.0 * ell) * p + 2.0 * ell - 2.0;
    if den == 0.0 {
        return Err(Error::Asymptote(p));
    }
    Ok(1.0 + 4.0 / den)
}

/// Known blow-up results a parameter point can fall under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KnownResult {
    MainTheorem,
    DerivativeOnly,
    PowerSubcritical,
    PowerCritical,
    KatoLowDim,
    DerivativeCritical,
}

impl KnownResult {
    pub fn name(self) -> &'static str {
        match self {
            KnownResult::MainTheorem => "main-theorem",
            KnownResult::DerivativeOnly => "derivative-only",
            KnownResult::PowerSubcritical => "power-subcritical",
            KnownResult::PowerCritical => "power-critical",
            KnownResult::KatoLowDim => "kato-low-dim",
            KnownResult::DerivativeCritical => "derivative-critical",
        }
    }
}

impl fmt::Display for KnownResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `T ≤ C ε^{−k}`
    Polynomial,
    /// `T ≤ exp(C ε^{−k})` from the critical power case
    ExponentialQ,
    /// `T ≤ exp(C ε^{−k})` from the critical derivative case
    ExponentialP,
    None,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Polynomial => "polynomial",
            BoundKind::ExponentialQ => "exponential-q",
            BoundKind::ExponentialP => "exponential-p",
            BoundKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanBound {
    pub kind: BoundKind,
    pub exponent: f64,
}

impl LifespanBound {
    pub const NONE: LifespanBound = LifespanBound {
        kind: BoundKind::None,
        exponent: f64::NAN,
    };

    fn polynomial(exponent: f64) -> Self {
        Self {
            kind: BoundKind::Polynomial,
            exponent,
        }
    }
}

impl fmt::Display for LifespanBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BoundKind::Polynomial => write!(f, "T <= C eps^-{}", self.exponent),
            BoundKind::ExponentialQ | BoundKind::ExponentialP => {
                write!(f, "T <= exp(C eps^-{})", self.exponent)
            }
            BoundKind::None => f.write_str("no bound"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionVerdict {
    pub in_gamma: bool,
    pub theta: f64,
    pub applicable_results: BTreeSet<KnownResult>,
    /// Every applicable bound, in the order of `applicable_results`.
    pub candidate_bounds: Vec<(KnownResult, LifespanBound)>,
    pub lifespan_bound: LifespanBound,
    pub notes: Vec<String>,
}

fn candidate_bound(params: &ModelParams, result: KnownResult) -> LifespanBound {
    let ModelParams { n, ell, p, q, .. } = *params;
    let m = scaled_dim(n, ell);
    match result {
        KnownResult::MainTheorem => LifespanBound::polynomial(p * (q - 1.0) / theta(params)),
        KnownResult::PowerSubcritical => {
            let g = gamma_exp(n, ell, q).expect("gated to n >= 2");
            LifespanBound::polynomial(q * (q - 1.0) / g)
        }
        KnownResult::KatoLowDim => LifespanBound::polynomial(1.0 / ((q + 1.0) / (q - 1.0) - m)),
        KnownResult::DerivativeOnly => LifespanBound::polynomial(1.0 / (1.0 / (p - 1.0) - (m - 1.0) / 2.0)),
        KnownResult::PowerCritical => LifespanBound {
            kind: BoundKind::ExponentialQ,
            exponent: q * (q - 1.0),
        },
        KnownResult::DerivativeCritical => LifespanBound {
            kind: BoundKind::ExponentialP,
            exponent: p - 1.0,
        },
    }
}

/// Polynomial bounds beat exponential ones; within a kind the smallest
/// exponent wins.
fn sharpest(candidates: &[(KnownResult, LifespanBound)]) -> LifespanBound {
    let rank = |b: &LifespanBound| match b.kind {
        BoundKind::Polynomial => 0,
        BoundKind::ExponentialQ | BoundKind::ExponentialP => 1,
        BoundKind::None => 2,
    };
    candidates
        .iter()
        .map(|(_, b)| *b)
        .min_by(|a, b| rank(a).cmp(&rank(b)).then(a.exponent.total_cmp(&b.exponent)))
        .unwrap_or(LifespanBound::NONE)
}

/// Classifies `(p, q)` against every known blow-up result for the given
/// `(n, ℓ)` and picks the sharpest lifespan bound.
pub fn classify(params: &ModelParams) -> Result<RegionVerdict> {
    params.validate()?;
    let ModelParams { n, ell, p, q, .. } = *params;
    let m = params.scaled_dim();
    let product = region_product(params);
    let in_gamma = product < 4.0;
    let th = 2.0 - 0.5 * product;
    let mut results = BTreeSet::new();
    let mut notes = Vec::new();

    if in_gamma {
        results.insert(KnownResult::MainTheorem);
    } else if th == 0.0 {
        notes.push("point lies on the boundary of Gamma(n,ell); blow-up there is not claimed".into());
    }

    if m > 1.0 {
        let p1v = p1(n, ell)?;
        if (p - p1v).abs() <= CRITICAL_TOL {
            results.insert(KnownResult::DerivativeCritical);
        } else if p < p1v {
            results.insert(KnownResult::DerivativeOnly);
        }
    }

    if n >= 2 {
        let p0v = p0(n, ell)?;
        if (q - p0v).abs() <= CRITICAL_TOL {
            results.insert(KnownResult::PowerCritical);
        } else if q < p0v {
            results.insert(KnownResult::PowerSubcritical);
        }
    }

    if (n == 1 || n == 2) && m > 1.0 {
        let p_kat = family_exponents(m)?.p_kat;
        if q < p_kat {
            results.insert(KnownResult::KatoLowDim);
            notes.push("kato-low-dim bound additionally requires the integral of u1 to be positive".into());
        }
    }

    if n == 1 {
        notes.push(one_dim_note(ell));
    }
    if ell == 0.0 {
        notes.push(format!(
            "wave-equation case: (q-1)((n-1)p-2) = {} against 4",
            (q - 1.0) * ((n as f64 - 1.0) * p - 2.0)
        ));
    }

    let candidate_bounds: Vec<_> = results.iter().map(|&r| (r, candidate_bound(params, r))).collect();
    let lifespan_bound = sharpest(&candidate_bounds);
    for (r, b) in &candidate_bounds {
        notes.push(format!("{r}: {b}"));
    }
    if results.is_empty() {
        notes.push("outside every known blow-up result".into());
    }

    Ok(RegionVerdict {
        in_gamma,
        theta: th,
        applicable_results: results,
        candidate_bounds,
        lifespan_bound,
        notes,
    })
}

/// Which of the three one-dimensional regimes `ℓ` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneDimRegime {
    /// `ℓ ∈ [0, 2]`: `Γ(1,ℓ)` is the whole quadrant.
    FullCoverage,
    /// `ℓ ∈ (2, 4]`: the strip left of the asymptote is covered by the
    /// derivative-only result.
    ClosedByDerivative,
    /// `ℓ > 4`: a gap remains in `p_Gla(ℓ+1) < p < 2 − 2/ℓ`.
    Gap,
}

pub fn one_dim_regime(ell: f64) -> OneDimRegime {
    if ell <= 2.0 {
        OneDimRegime::FullCoverage
    } else if ell <= 4.0 {
        OneDimRegime::ClosedByDerivative
    } else {
        OneDimRegime::Gap
    }
}

fn one_dim_note(ell: f64) -> String {
    match one_dim_regime(ell) {
        OneDimRegime::FullCoverage => "n = 1, ell in (0,2]: blow-up region is all of p, q > 1".into(),
        OneDimRegime::ClosedByDerivative => format!(
            "n = 1, ell in (2,4]: asymptote p = {} lies left of p_Gla(ell+1) = {}; derivative-only result closes the gap",
            2.0 - 2.0 / ell,
            1.0 + 2.0 / ell
        ),
        OneDimRegime::Gap => format!(
            "n = 1, ell > 4: no known result in the strip {} < p < {} above the boundary curve",
            1.0 + 2.0 / ell,
            2.0 - 2.0 / ell
        ),
    }
}

/// Selects the sharpest lifespan bound; errors when no known result applies.
pub fn lifespan_bound(params: &ModelParams) -> Result<LifespanBound> {
    let verdict = classify(params)?;
    if verdict.applicable_results.is_empty() {
        return Err(Error::NoBound(format!("{params:?}")));
    }
    Ok(verdict.lifespan_bound)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub p: f64,
    pub q: f64,
    /// 0 left of the vertical asymptote, 1 right of it.
    pub branch: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialPoint {
    pub label: &'static str,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSamples {
    pub boundary: Vec<BoundaryPoint>,
    pub special_points: Vec<SpecialPoint>,
    /// Set when `[p_lo, p_hi]` straddles the vertical asymptote.
    pub gap_at: Option<f64>,
}

/// Samples `∂Γ(n,ℓ)` on `[p_lo, p_hi]` and lists the named points of the
/// region picture (`S`, `P`, `D`, `Q` for `n ≥ 2`; `S′` for `n = 1`).
pub fn region_boundary_samples(n: u32, ell: f64, p_lo: f64, p_hi: f64, count: usize) -> Result<RegionSamples> {
    if !(1.0 < p_lo && p_lo < p_hi) || count < 2 {
        return Err(Error::Domain(format!(
            "need 1 < p_lo < p_hi and count >= 2, got [{p_lo}, {p_hi}], {count}"
        )));
    }
    let asymptote = boundary_asymptote(n, ell);
    let gap_at = asymptote.filter(|&a| p_lo < a && a < p_hi);
    let mut boundary = Vec::with_capacity(count);
    for i in 0..count {
        let p = p_lo + (p_hi - p_lo) * i as f64 / (count - 1) as f64;
        let q = match boundary_q(p, n, ell) {
            Ok(q) => q,
            // Exactly on the asymptote: no finite boundary value.
            Err(Error::Asymptote(_)) => continue,
            Err(e) => return Err(e),
        };
        let branch = match asymptote {
            Some(a) if p > a => 1,
            _ => 0,
        };
        boundary.push(BoundaryPoint { p, q, branch });
    }

    let mut special_points = Vec::new();
    if n >= 2 {
        let (p0v, p1v) = (p0(n, ell)?, p1(n, ell)?);
        special_points.push(SpecialPoint {
            label: "S",
            p: p1v,
            q: p0v,
        });
        special_points.push(SpecialPoint {
            label: "P",
            p: p1v,
            q: p_tilde1(n, ell)?,
        });
        let d = p_diag(n, ell)?;
        special_points.push(SpecialPoint { label: "D", p: d, q: d });
        special_points.push(SpecialPoint {
            label: "Q",
            p: p_tilde0(n, ell)?,
            q: p0v,
        });
    } else if ell > 0.0 {
        let fam = family_exponents(ell + 1.0)?;
        special_points.push(SpecialPoint {
            label: "S'",
            p: fam.p_gla,
            q: fam.p_kat,
        });
    }
    Ok(RegionSamples {
        boundary,
        special_points,
        gap_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p0_values() {
        assert_relative_eq!(p0(3, 0.0).unwrap(), 1.0 + 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(p0(2, 1.0).unwrap(), (3.0 + 57f64.sqrt()) / 6.0, max_relative = 1e-14);
        assert!(p0(1, 1.0).is_err());
    }

    #[test]
    fn p1_values() {
        assert_relative_eq!(p1(2, 1.0).unwrap(), 5.0 / 3.0, max_relative = 1e-15);
        assert_eq!(p1(1, 1.0).unwrap(), 3.0);
        for n in 2..6 {
            assert_relative_eq!(
                p1(n, 0.0).unwrap(),
                family_exponents(n as f64).unwrap().p_gla,
                max_relative = 1e-15
            );
        }
        assert!(p1(1, 0.0).is_err());
    }

    #[test]
    fn family_values() {
        let f = family_exponents(3.0).unwrap();
        assert_eq!((f.p_gla, f.p_kat, f.p_conf), (2.0, 2.0, 3.0));
        assert_eq!(family_exponents(2.0).unwrap().p_gla, 3.0);
        assert_relative_eq!(family_exponents(4.0).unwrap().p_conf, 7.0 / 3.0);
        assert!(family_exponents(1.0).is_err());
    }

    #[test]
    fn diag_and_tilde_values() {
        assert_relative_eq!(
            p_diag(2, 1.0).unwrap(),
            (1.0 + 17f64.sqrt()) / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            p_tilde0(2, 1.0).unwrap(),
            1.0 + (1.0 + 57f64.sqrt()) / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(p_tilde1(2, 1.0).unwrap(), 3.4, max_relative = 1e-15);
        assert!(matches!(p_diag(1, 3.0), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(&ModelParams::new(2, 1.0, 2.0, 2.0)), 1.0);
        let near = ModelParams::new(2, 1.0, 3.0, 1.0 + 1e-15);
        assert_relative_eq!(theta(&near), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gamma_values() {
        for n in 2..6 {
            for &ell in &[0.0, 0.3, 1.0, 2.5] {
                assert_relative_eq!(gamma_exp(n, ell, 1.0).unwrap(), 2.0, max_relative = 1e-14);
            }
        }
        assert_relative_eq!(gamma_exp(2, 1.0, 1.5).unwrap(), 0.875, max_relative = 1e-14);
        assert!(gamma_exp(2, 1.0, p0(2, 1.0).unwrap()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn boundary_values() {
        let d = p_diag(2, 1.0).unwrap();
        assert_relative_eq!(boundary_q(d, 2, 1.0).unwrap(), d, max_relative = 1e-12);
        assert_eq!(boundary_q(1.0, 1, 6.0).unwrap(), 2.0);
        assert!(
            matches!(boundary_q(5.0 / 3.0, 1, 6.0), Err(Error::Asymptote(_))) || {
                // 5/3 is not exactly representable; the denominator is tiny but nonzero.
                boundary_q(5.0 / 3.0, 1, 6.0).unwrap().abs() > 1e10
            }
        );
        assert!(boundary_q(1.5, 1, 2.0 / 1.5).is_ok());
    }

    #[test]
    fn classify_reference_points() {
        let v = classify(&ModelParams::new(2, 1.0, 2.0, 2.0)).unwrap();
        assert!(v.in_gamma);
        assert!(v.applicable_results.contains(&KnownResult::MainTheorem));
        assert_eq!(v.lifespan_bound.kind, BoundKind::Polynomial);
        assert_relative_eq!(v.lifespan_bound.exponent, 2.0, max_relative = 1e-14);

        assert!(classify(&ModelParams::new(1, 1.0, 10.0, 10.0)).unwrap().in_gamma);
        assert!(classify(&ModelParams::new(1, 6.0, 1.5, 3.0)).unwrap().in_gamma);

        let gap = classify(&ModelParams::new(1, 6.0, 1.5, 6.0)).unwrap();
        assert!(!gap.in_gamma);
        assert!(gap.applicable_results.is_empty());
        assert_eq!(gap.lifespan_bound.kind, BoundKind::None);
        assert!(matches!(
            lifespan_bound(&ModelParams::new(1, 6.0, 1.5, 6.0)),
            Err(Error::NoBound(_))
        ));
    }

    #[test]
    fn kato_candidate_in_one_dimension() {
        let v = classify(&ModelParams::new(1, 1.0, 2.0, 2.0)).unwrap();
        let kato = v
            .candidate_bounds
            .iter()
            .find(|(r, _)| *r == KnownResult::KatoLowDim)
            .unwrap();
        assert_relative_eq!(kato.1.exponent, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn critical_power_gives_exponential_bound() {
        let q = p0(2, 1.0).unwrap();
        let v = classify(&ModelParams::new(2, 1.0, 10.0, q)).unwrap();
        assert!(v.applicable_results.contains(&KnownResult::PowerCritical));
        assert_eq!(v.lifespan_bound.kind, BoundKind::ExponentialQ);
        assert_relative_eq!(v.lifespan_bound.exponent, q * (q - 1.0));
    }

    #[test]
    fn critical_derivative_gives_exponential_bound() {
        let p = p1(3, 1.0).unwrap();
        // q large keeps (p, q) outside Gamma and above p0.
        let v = classify(&ModelParams::new(3, 1.0, p, 50.0)).unwrap();
        assert_eq!(
            v.applicable_results.iter().copied().collect::<Vec<_>>(),
            vec![KnownResult::DerivativeCritical]
        );
        assert_eq!(v.lifespan_bound.kind, BoundKind::ExponentialP);
    }

    #[test]
    fn region_samples_special_points() {
        let s = region_boundary_samples(2, 1.0, 1.7, 5.3, 10).unwrap();
        assert_eq!(s.boundary.len(), 10);
        let d = s.special_points.iter().find(|sp| sp.label == "D").unwrap();
        assert_relative_eq!(d.p, 2.561_552_812_808_830_3, max_relative = 1e-12);
        let sp = s.special_points.iter().find(|sp| sp.label == "S").unwrap();
        assert_relative_eq!(sp.p, 5.0 / 3.0);
        assert_relative_eq!(sp.q, 1.758_305_739_211_791_6, max_relative = 1e-12);
        assert!(s.gap_at.is_none());

        let one = region_boundary_samples(1, 6.0, 1.1, 3.0, 50).unwrap();
        assert_relative_eq!(one.gap_at.unwrap(), 5.0 / 3.0, max_relative = 1e-14);
        assert!(one.boundary.iter().any(|b| b.branch == 0));
        assert!(one.boundary.iter().any(|b| b.branch == 1));
        assert!(region_boundary_samples(2, 1.0, 0.9, 2.0, 10).is_err());
    }

    #[test]
    fn greatest_root_is_stable() {
        // x² − 1e8 x + 1 = 0 has roots ≈ 1e8 and ≈ 1e-8
        assert_relative_eq!(greatest_root(1.0, -1e8, 1.0).unwrap(), 1e8, max_relative = 1e-15);
        assert_relative_eq!(greatest_root(1.0, 1e8, 1.0).unwrap(), -1e-8, max_relative = 1e-12);
        assert!(greatest_root(1.0, 0.0, 1.0).is_err());
    }
}
