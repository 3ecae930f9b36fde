//! Experiment orchestration behind the command-line front-end: ε-sweeps
//! with power-law fits, region-figure data, iteration tables, exponent
//! tables and the flat configuration file.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::exponents::{self, BoundKind, ModelParams, OneDimRegime};
use crate::iteration::{self, SeedVariant};
use crate::solver::{self, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub t_measured: Option<f64>,
    /// `C_fit ε^{−k}` for the selected polynomial bound exponent `k`.
    pub t_bound: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares of `log T` against `log ε` over the records with a
/// measurement.
pub fn fit_power_law(records: &[SweepRecord]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.t_measured.map(|t| (r.epsilon.ln(), t.ln())))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 measured lifespans for a fit, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::Fit("all epsilons coincide; slope undefined".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        n_points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Sorted by decreasing `ε`.
    pub records: Vec<SweepRecord>,
    pub fit: FitResult,
    /// `k` of the selected polynomial bound `T ≲ ε^{−k}`, if there is one.
    pub bound_exponent: Option<f64>,
    pub bound_kind: BoundKind,
    pub c_fit: f64,
    /// Every measured `T` is at most `C_fit ε^{−k}`.
    pub bound_compliant: bool,
}

/// Estimates `T(ε)` for every `ε` at `refinements` resolutions, running all
/// `(ε, resolution)` pairs as independent jobs, then fits `log T` against
/// `log ε`.
pub fn sweep(
    template: &SimConfig,
    epsilons: &[f64],
    refinements: usize,
    mode: ExecMode,
    workers: Option<usize>,
) -> Result<SweepReport> {
    if epsilons.len() < 3 {
        return Err(Error::Configuration(format!(
            "a sweep needs at least 3 epsilons, got {}",
            epsilons.len()
        )));
    }
    if refinements < 2 {
        return Err(Error::Configuration(format!(
            "need at least 2 refinements, got {refinements}"
        )));
    }
    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut jobs = Vec::new();
    for &e in &eps {
        for level in 0..refinements {
            let mut c = template.clone();
            c.params.epsilon = e;
            c.grid_points = (template.grid_points - 1) * (1 << level) + 1;
            c.record_stride = usize::MAX;
            c.validate()?;
            jobs.push(c);
        }
    }
    let times = mode
        .map(&jobs, workers, |c| solver::run(c).map(|r| r.blowup_time))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let verdict = exponents::classify(&ModelParams {
        epsilon: 1.0,
        ..template.params
    })?;
    let bound = verdict.lifespan_bound;
    let k = (bound.kind == BoundKind::Polynomial).then_some(bound.exponent);

    let mut records: Vec<SweepRecord> = eps
        .iter()
        .zip(times.chunks(refinements))
        .map(|(&e, ts)| {
            let (t_est, uncertainty) = solver::summarize_blowup_times(ts);
            SweepRecord {
                epsilon: e,
                t_measured: t_est,
                t_bound: f64::NAN,
                uncertainty,
            }
        })
        .collect();
    let fit = fit_power_law(&records)?;
    let c_fit = match k {
        Some(k) => records
            .iter()
            .filter_map(|r| r.t_measured.map(|t| t * r.epsilon.powf(k)))
            .fold(0.0, f64::max),
        None => f64::NAN,
    };
    let mut bound_compliant = k.is_some();
    if let Some(k) = k {
        for r in &mut records {
            r.t_bound = c_fit * r.epsilon.powf(-k);
            if let Some(t) = r.t_measured {
                bound_compliant &= t <= r.t_bound * (1.0 + 1e-12);
            }
        }
    }
    Ok(SweepReport {
        records,
        fit,
        bound_exponent: k,
        bound_kind: bound.kind,
        c_fit,
        bound_compliant,
    })
}

pub fn write_sweep_csv<W: Write + ?Sized>(report: &SweepReport, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "epsilon,T_measured,T_bound,uncertainty")?;
    for r in &report.records {
        writeln!(
            w,
            "{:e},{},{:e},{:e}",
            r.epsilon,
            opt(r.t_measured),
            r.t_bound,
            r.uncertainty
        )?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}

/// One row of the region-figure CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    /// `boundary`, `point`, `hline`, `vline`, `asymptote`, `gap` or `note`
    pub kind: &'static str,
    pub label: String,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPlot {
    pub n: u32,
    pub ell: f64,
    pub p_max: f64,
    pub q_max: f64,
    pub rows: Vec<RegionRow>,
}

impl RegionPlot {
    pub fn rows_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a RegionRow> + 'a {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "kind,label,p,q")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.kind, r.label, num(r.p), num(r.q))?;
        }
        Ok(())
    }
}

const REGION_SAMPLES: usize = 400;

/// Plot-ready data of `∂Γ(n,ℓ)`, its special points, reference lines and,
/// for `n = 1`, the coverage regime (with the uncovered polygon when `ℓ > 4`).
pub fn region_plot(n: u32, ell: f64) -> Result<RegionPlot> {
    if n == 0 || !(ell >= 0.0) || !ell.is_finite() {
        return Err(Error::Domain(format!(
            "need n >= 1 and ell >= 0, got n = {n}, ell = {ell}"
        )));
    }
    let mut rows = Vec::new();
    let (p_max, q_max) = if n >= 2 {
        let s = exponents::region_boundary_samples(n, ell, 1.0 + 1e-9, 2.0, 2)?;
        let top = s.special_points.iter().map(|sp| sp.p.max(sp.q)).fold(1.0, f64::max);
        (1.0 + 2.0 * (top - 1.0), 1.0 + 2.0 * (top - 1.0))
    } else {
        let top = if ell > 0.0 { 1.0 + 2.0 / ell } else { 3.0 };
        let top = top.max(exponents::boundary_asymptote(1, ell).unwrap_or(1.0));
        let start = exponents::boundary_q(1.0, n, ell).unwrap_or(1.0).max(1.0);
        (
            1.0 + 2.0 * (top - 1.0),
            1.0 + 4.0 * (top - 1.0).max(1.0).max(start - 1.0),
        )
    };

    let samples = exponents::region_boundary_samples(n, ell, 1.0 + 1e-6, p_max, REGION_SAMPLES)?;
    for b in &samples.boundary {
        if b.q > 1.0 && b.q <= q_max {
            rows.push(RegionRow {
                kind: "boundary",
                label: format!("branch{}", b.branch),
                p: b.p,
                q: b.q,
            });
        }
    }
    for sp in &samples.special_points {
        rows.push(RegionRow {
            kind: "point",
            label: sp.label.to_string(),
            p: sp.p,
            q: sp.q,
        });
    }
    if let Some(a) = exponents::boundary_asymptote(n, ell) {
        if a > 1.0 {
            rows.push(RegionRow {
                kind: "asymptote",
                label: "asymptote".into(),
                p: a,
                q: f64::NAN,
            });
        }
    }
    if n >= 2 {
        rows.push(RegionRow {
            kind: "hline",
            label: "p0".into(),
            p: f64::NAN,
            q: exponents::p0(n, ell)?,
        });
        rows.push(RegionRow {
            kind: "vline",
            label: "p1".into(),
            p: exponents::p1(n, ell)?,
            q: f64::NAN,
        });
    } else if ell > 0.0 {
        let fam = exponents::family_exponents(ell + 1.0)?;
        rows.push(RegionRow {
            kind: "hline",
            label: "p_Kat".into(),
            p: f64::NAN,
            q: fam.p_kat,
        });
        rows.push(RegionRow {
            kind: "vline",
            label: "p_Gla".into(),
            p: fam.p_gla,
            q: f64::NAN,
        });
        let regime = exponents::one_dim_regime(ell);
        let label = match regime {
            OneDimRegime::FullCoverage => "full-coverage",
            OneDimRegime::ClosedByDerivative => "closed-by-derivative",
            OneDimRegime::Gap => "gap",
        };
        rows.push(RegionRow {
            kind: "note",
            label: label.into(),
            p: f64::NAN,
            q: f64::NAN,
        });
        if regime == OneDimRegime::Gap {
            rows.extend(gap_polygon(ell, fam.p_gla, q_max)?);
        }
    }
    Ok(RegionPlot {
        n,
        ell,
        p_max,
        q_max,
        rows,
    })
}

/// Vertices of `{p_Gla(ℓ+1) < p < 2 − 2/ℓ, f(p) ≤ q ≤ q_max}`, counter-clockwise
/// from the top-left corner.
fn gap_polygon(ell: f64, p_gla: f64, q_max: f64) -> Result<Vec<RegionRow>> {
    let asym = 2.0 - 2.0 / ell;
    let vertex = |p: f64, q: f64| RegionRow {
        kind: "gap",
        label: "gap".into(),
        p,
        q,
    };
    let mut out = vec![vertex(p_gla, q_max)];
    // f rises to +∞ at the asymptote; stop where it leaves the window.
    let p_top = asym - 4.0 / (ell * (q_max - 1.0));
    let steps = 64;
    for i in 0..=steps {
        let p = p_gla + (p_top - p_gla) * i as f64 / steps as f64;
        out.push(vertex(p, exponents::boundary_q(p, 1, ell)?));
    }
    Ok(out)
}

/// One row of the iteration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateRow {
    pub j: u32,
    pub alpha_j: f64,
    pub beta_j: f64,
    pub log_c_j: f64,
    /// `q^j log(D ε^m)`, NaN below `j₀`
    pub log_cj_bound: f64,
    pub alpha_closed_delta: f64,
    pub beta_closed_delta: f64,
    pub log_envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateReport {
    pub variant: SeedVariant,
    pub rows: Vec<IterateRow>,
    pub j0: u32,
    pub d: f64,
    /// Envelope sample time.
    pub t_sample: f64,
    pub divergence_time: Option<f64>,
    pub lifespan_exponent: Option<f64>,
}

/// Runs the recursion for `steps` steps, comparing with the closed forms and
/// sampling the envelope at `t_sample`.
#[allow(clippy::too_many_arguments)]
pub fn iterate_table(
    params: &ModelParams,
    variant: SeedVariant,
    t0: f64,
    calibration: f64,
    frame_constant: f64,
    steps: u32,
    t_sample: f64,
) -> Result<IterateReport> {
    let seed = iteration::seed(params, variant, t0, calibration)?;
    let consts = iteration::iteration_constants(&seed, frame_constant, params.q);
    let traj = iteration::trajectory(&seed, params, frame_constant, steps);
    let rows = traj
        .iter()
        .map(|st| {
            let (ac, bc) = iteration::closed_forms(&seed, st.a, params.q, st.j);
            Ok(IterateRow {
                j: st.j,
                alpha_j: st.alpha_j,
                beta_j: st.beta_j,
                log_c_j: st.log_c_j,
                log_cj_bound: iteration::log_cj_bound(&seed, frame_constant, params.q, st.j).unwrap_or(f64::NAN),
                alpha_closed_delta: rel_delta(st.alpha_j, ac),
                beta_closed_delta: rel_delta(st.beta_j, bc),
                log_envelope: iteration::log_lower_bound_envelope(t_sample, st, t0).unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IterateReport {
        variant,
        rows,
        j0: consts.j0,
        d: consts.d,
        t_sample,
        divergence_time: iteration::lifespan_upper_bound(params, &seed, frame_constant).ok(),
        lifespan_exponent: iteration::lifespan_exponent(params, &seed).ok(),
    })
}

fn rel_delta(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn write_iterate_csv<W: Write + ?Sized>(report: &IterateReport, w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "j,alpha_j,beta_j,log_C_j,log_Cj_bound,alpha_closed_delta,beta_closed_delta,log_envelope"
    )?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{},{:e},{:e},{}",
            r.j,
            r.alpha_j,
            r.beta_j,
            r.log_c_j,
            num(r.log_cj_bound),
            r.alpha_closed_delta,
            r.beta_closed_delta,
            num(r.log_envelope)
        )?;
    }
    Ok(())
}

/// Critical exponents for one `(n, ℓ)`; `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRow {
    pub n: u32,
    pub ell: f64,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub p_diag: Option<f64>,
    pub p_tilde0: Option<f64>,
    pub p_tilde1: Option<f64>,
    pub p_strauss: Option<f64>,
}

pub fn exponent_table(ns: &[u32], ells: &[f64]) -> Vec<ExponentRow> {
    let mut out = Vec::with_capacity(ns.len() * ells.len());
    for &n in ns {
        for &ell in ells {
            out.push(ExponentRow {
                n,
                ell,
                p0: exponents::p0(n, ell).ok(),
                p1: exponents::p1(n, ell).ok(),
                p_diag: exponents::p_diag(n, ell).ok(),
                p_tilde0: exponents::p_tilde0(n, ell).ok(),
                p_tilde1: exponents::p_tilde1(n, ell).ok(),
                p_strauss: exponents::p_strauss(n).ok(),
            });
        }
    }
    out
}

pub fn write_exponent_csv<W: Write + ?Sized>(rows: &[ExponentRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "n,ell,p0,p1,p_diag,p_tilde0,p_tilde1,p_strauss")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{},{},{},{},{},{}",
            r.n,
            r.ell,
            opt(r.p0),
            opt(r.p1),
            opt(r.p_diag),
            opt(r.p_tilde0),
            opt(r.p_tilde1),
            opt(r.p_strauss)
        )?;
    }
    Ok(())
}

/// Flat `key = value` experiment manifest. Every key is optional;
/// command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<u32>,
    pub ell: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub eps: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub grid: Option<usize>,
    pub tmax: Option<f64>,
    pub cfl: Option<f64>,
    pub threshold: Option<f64>,
    pub refinements: Option<usize>,
    pub workers: Option<usize>,
    pub variant: Option<String>,
    pub t0: Option<f64>,
    pub steps: Option<u32>,
    pub calibration: Option<f64>,
    pub frame: Option<f64>,
    pub linear_only: Option<bool>,
    pub stride: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

/// Writes `f`'s output to `path`, or to stdout when `path` is `None`.
pub fn emit<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) => {
            let io_err = |source| Error::Io {
                path: p.to_path_buf(),
                source,
            };
            let file = std::fs::File::create(p).map_err(io_err)?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(epsilon: f64, t: Option<f64>) -> SweepRecord {
        SweepRecord {
            epsilon,
            t_measured: t,
            t_bound: f64::NAN,
            uncertainty: 0.0,
        }
    }

    #[test]
    fn exact_power_law() {
        let recs: Vec<_> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|&e| rec(e, Some(4.0 * e.powi(-2))))
            .collect();
        let fit = fit_power_law(&recs).unwrap();
        assert_relative_eq!(fit.slope, -2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 4f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
        assert_eq!(fit.n_points, 4);
    }

    #[test]
    fn fit_errors() {
        let two = vec![rec(1.0, Some(1.0)), rec(0.5, Some(2.0)), rec(0.25, None)];
        assert!(matches!(fit_power_law(&two), Err(Error::InsufficientData(_))));
        let same = vec![rec(1.0, Some(1.0)), rec(1.0, Some(2.0)), rec(1.0, Some(3.0))];
        assert!(matches!(fit_power_law(&same), Err(Error::Fit(_))));
    }

    #[test]
    fn region_plot_reference_features() {
        let plot = region_plot(2, 1.0).unwrap();
        let d = plot.rows_of("point").find(|r| r.label == "D").unwrap();
        assert!((d.p - 2.561553).abs() < 1e-6 && (d.q - 2.561553).abs() < 1e-6);
        assert!(plot.rows_of("boundary").count() > 10);

        let one = region_plot(1, 1.0).unwrap();
        let s = one.rows_of("point").find(|r| r.label == "S'").unwrap();
        assert_eq!((s.p, s.q), (3.0, 3.0));
        assert_eq!(one.rows_of("note").next().unwrap().label, "full-coverage");
        assert_eq!(one.rows_of("boundary").count(), 0);

        let gap = region_plot(1, 6.0).unwrap();
        let a = gap.rows_of("asymptote").next().unwrap();
        assert_relative_eq!(a.p, 5.0 / 3.0, max_relative = 1e-14);
        let poly: Vec<_> = gap.rows_of("gap").collect();
        assert!(poly.len() >= 3);
        assert!(poly.iter().all(|v| v.p >= 4.0 / 3.0 - 1e-12 && v.p < 5.0 / 3.0));
    }

    #[test]
    fn iterate_reference_rows() {
        let p = ModelParams::new(2, 1.0, 2.0, 2.0);
        let rep = iterate_table(&p, SeedVariant::Derivative, 1.0, 1.0, 1.0, 6, 5.0).unwrap();
        for r in &rep.rows {
            let qj = 2f64.powi(r.j as i32);
            assert_eq!(r.alpha_j, 6.0 * qj - 4.0);
            assert_eq!(r.beta_j, 7.0 * qj - 2.0);
            assert!(r.alpha_closed_delta <= 1e-10 && r.beta_closed_delta <= 1e-10);
        }
        assert_eq!(rep.lifespan_exponent, Some(2.0));
        let mut buf = Vec::new();
        write_iterate_csv(&rep, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 8);
    }

    #[test]
    fn config_file_parses_and_rejects_unknown_keys() {
        let path = Path::new("exp.toml");
        let c = ConfigFile::parse("n = 2\nell = 1.0\np = 2.0\nepsilons = [1.0, 0.5]\n", path).unwrap();
        assert_eq!(c.n, Some(2));
        assert_eq!(c.epsilons, Some(vec![1.0, 0.5]));
        assert!(matches!(
            ConfigFile::parse("bogus = 1\n", path),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn exponent_table_marks_undefined_cells() {
        let rows = exponent_table(&[1, 2], &[0.0, 1.0]);
        assert_eq!(rows.len(), 4);
        assert!(rows[0].p0.is_none() && rows[0].p1.is_none());
        assert!(rows[3].p0.is_some());
        let mut buf = Vec::new();
        write_exponent_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,ell,p0"));
    }
}
