use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tricomi_core::exec::ExecMode;
use tricomi_core::exponents::{self, ModelParams};
use tricomi_core::harness::{self, ConfigFile};
use tricomi_core::iteration::SeedVariant;
use tricomi_core::solver::{self, SimConfig};
use tricomi_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tricomi",
    version,
    about = "Blow-up toolkit for semilinear generalized Tricomi equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Space dimension
    #[arg(long)]
    n: Option<u32>,
    /// Tricomi exponent ℓ
    #[arg(long)]
    ell: Option<f64>,
    /// Power of the derivative nonlinearity
    #[arg(long)]
    p: Option<f64>,
    /// Power of the power nonlinearity
    #[arg(long)]
    q: Option<f64>,
    /// Data size ε
    #[arg(long)]
    eps: Option<f64>,
    /// Support radius R of the data
    #[arg(long)]
    radius: Option<f64>,
    /// Radial grid points
    #[arg(long)]
    grid: Option<usize>,
    /// Final time
    #[arg(long)]
    tmax: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat TOML manifest; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for parallel commands
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify (p, q) against the known blow-up results
    Classify(Common),
    /// Table of critical exponents over a grid of (n, ℓ)
    Exponents {
        #[command(flatten)]
        common: Common,
        /// Dimensions
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        dims: Vec<u32>,
        /// Values of ℓ
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1,2,4")]
        ells: Vec<f64>,
    },
    /// Boundary curve, special points and reference lines of the blow-up region
    RegionPlot(Common),
    /// One simulation; writes the functional series as CSV
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Drop the nonlinearity
        #[arg(long)]
        linear_only: bool,
        #[arg(long)]
        cfl: Option<f64>,
        /// Blow-up threshold on max|u|
        #[arg(long)]
        threshold: Option<f64>,
        /// Record every k-th step
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Lifespan sweep over ε with a log-log fit
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Data sizes
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        /// Grid resolutions per ε (each doubles the previous)
        #[arg(long)]
        refinements: Option<usize>,
        /// Run jobs one after another
        #[arg(long)]
        sequential: bool,
    },
    /// Iteration-argument table
    Iterate {
        #[command(flatten)]
        common: Common,
        /// derivative, power or linear
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        steps: Option<u32>,
        /// Constant K of the first lower bound
        #[arg(long)]
        calibration: Option<f64>,
        /// Constant C of the iteration frame
        #[arg(long)]
        frame: Option<f64>,
        /// Time at which the envelopes are sampled
        #[arg(long)]
        t_sample: Option<f64>,
    },
}

struct Ctx {
    common: Common,
    file: ConfigFile,
}

impl Ctx {
    fn new(common: Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Self { common, file })
    }

    fn required<T>(name: &str, flag: Option<T>, file: Option<T>) -> Result<T> {
        flag.or(file)
            .ok_or_else(|| Error::Configuration(format!("missing --{name} (flag or config key)")))
    }

    fn params(&self) -> Result<ModelParams> {
        let c = &self.common;
        let f = &self.file;
        let params = ModelParams {
            n: Self::required("n", c.n, f.n)?,
            ell: Self::required("ell", c.ell, f.ell)?,
            p: Self::required("p", c.p, f.p)?,
            q: Self::required("q", c.q, f.q)?,
            epsilon: c.eps.or(f.eps).unwrap_or(1.0),
            radius: c.radius.or(f.radius).unwrap_or(1.0),
        };
        params.validate()?;
        Ok(params)
    }

    fn n_ell(&self) -> Result<(u32, f64)> {
        Ok((
            Self::required("n", self.common.n, self.file.n)?,
            Self::required("ell", self.common.ell, self.file.ell)?,
        ))
    }

    fn sim_config(&self, params: ModelParams, default_tmax: f64) -> SimConfig {
        let tmax = self.common.tmax.or(self.file.tmax).unwrap_or(default_tmax);
        let mut cfg = SimConfig::new(params, tmax);
        if let Some(g) = self.common.grid.or(self.file.grid) {
            cfg.grid_points = g;
        }
        if let Some(c) = self.file.cfl {
            cfg.cfl_safety = c;
        }
        if let Some(t) = self.file.threshold {
            cfg.blowup_threshold = t;
        }
        if let Some(lin) = self.file.linear_only {
            cfg.linear_only = lin;
        }
        if let Some(s) = self.file.stride {
            cfg.record_stride = s;
        }
        cfg
    }

    fn out(&self) -> Option<&Path> {
        self.common.out.as_deref()
    }

    fn workers(&self) -> Option<usize> {
        self.common.workers.or(self.file.workers)
    }
}

fn classify(ctx: &Ctx) -> Result<()> {
    let params = ctx.params()?;
    let v = exponents::classify(&params)?;
    let applicable: Vec<&str> = v.applicable_results.iter().map(|r| r.name()).collect();
    harness::emit(ctx.out(), |w| {
        writeln!(w, "in_gamma,theta,applicable,bound_kind,bound_exponent")?;
        let exponent = if v.lifespan_bound.exponent.is_finite() {
            format!("{:e}", v.lifespan_bound.exponent)
        } else {
            String::new()
        };
        writeln!(
            w,
            "{},{:e},{},{},{exponent}",
            v.in_gamma,
            v.theta,
            applicable.join(";"),
            v.lifespan_bound.kind.name()
        )
    })?;
    eprintln!("{}", v.lifespan_bound);
    for note in &v.notes {
        eprintln!("note: {note}");
    }
    Ok(())
}

fn exponents_cmd(ctx: &Ctx, dims: &[u32], ells: &[f64]) -> Result<()> {
    let dims: Vec<u32> = match ctx.common.n.or(ctx.file.n) {
        Some(n) => vec![n],
        None => dims.to_vec(),
    };
    let ells: Vec<f64> = match ctx.common.ell.or(ctx.file.ell) {
        Some(l) => vec![l],
        None => ells.to_vec(),
    };
    let rows = harness::exponent_table(&dims, &ells);
    harness::emit(ctx.out(), |w| harness::write_exponent_csv(&rows, w))
}

fn region_plot(ctx: &Ctx) -> Result<()> {
    let (n, ell) = ctx.n_ell()?;
    let plot = harness::region_plot(n, ell)?;
    harness::emit(ctx.out(), |w| plot.write_csv(w))
}

fn simulate(
    ctx: &Ctx,
    linear_only: bool,
    cfl: Option<f64>,
    threshold: Option<f64>,
    stride: Option<usize>,
) -> Result<()> {
    let params = ctx.params()?;
    let mut cfg = ctx.sim_config(params, 10.0);
    cfg.linear_only |= linear_only;
    if let Some(c) = cfl {
        cfg.cfl_safety = c;
    }
    if let Some(t) = threshold {
        cfg.blowup_threshold = t;
    }
    if let Some(s) = stride {
        cfg.record_stride = s;
    }
    let res = solver::run(&cfg)?;
    harness::emit(ctx.out(), |w| res.write_csv_to(w))?;
    match res.blowup_time {
        Some(t) => eprintln!("blow-up at t = {t:e} ({})", res.blowup_reason.map_or("", |r| r.name())),
        None => eprintln!("no blow-up before t = {:e}", cfg.t_max),
    }
    eprintln!(
        "steps = {}, duhamel residual = {:e}, U1-U0 identity residual = {:e}",
        res.steps, res.identity_residuals.duhamel_max_rel, res.identity_residuals.u1u0_max_rel
    );
    Ok(())
}

fn sweep(ctx: &Ctx, epsilons: Option<Vec<f64>>, refinements: Option<usize>, sequential: bool) -> Result<()> {
    let params = ctx.params()?;
    let eps = epsilons
        .or_else(|| ctx.file.epsilons.clone())
        .unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125]);
    let cfg = ctx.sim_config(params, 20.0);
    let mode = if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let refinements = refinements.or(ctx.file.refinements).unwrap_or(2);
    let report = harness::sweep(&cfg, &eps, refinements, mode, ctx.workers())?;
    harness::emit(ctx.out(), |w| harness::write_sweep_csv(&report, w))?;
    eprintln!(
        "fitted slope = {:e} (r^2 = {:e}, {} points)",
        report.fit.slope, report.fit.r_squared, report.fit.n_points
    );
    match report.bound_exponent {
        Some(k) => eprintln!(
            "bound slope = {:e}, C_fit = {:e}, all measurements under C_fit eps^-k: {}",
            -k, report.c_fit, report.bound_compliant
        ),
        None => eprintln!("no polynomial lifespan bound ({})", report.bound_kind.name()),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn iterate(
    ctx: &Ctx,
    variant: Option<String>,
    t0: Option<f64>,
    steps: Option<u32>,
    calibration: Option<f64>,
    frame: Option<f64>,
    t_sample: Option<f64>,
) -> Result<()> {
    let params = ctx.params()?;
    let f = &ctx.file;
    let variant: SeedVariant = variant
        .or_else(|| f.variant.clone())
        .unwrap_or_else(|| "derivative".into())
        .parse()?;
    let t0 = t0.or(f.t0).unwrap_or(1.0);
    let report = harness::iterate_table(
        &params,
        variant,
        t0,
        calibration.or(f.calibration).unwrap_or(1.0),
        frame.or(f.frame).unwrap_or(1.0),
        steps.or(f.steps).unwrap_or(10),
        t_sample.unwrap_or(4.0 * t0),
    )?;
    harness::emit(ctx.out(), |w| harness::write_iterate_csv(&report, w))?;
    eprintln!("variant = {}, j0 = {}, D = {:e}", variant.name(), report.j0, report.d);
    match (report.divergence_time, report.lifespan_exponent) {
        (Some(t), Some(k)) => eprintln!("divergence time = {t:e}, lifespan exponent = {k:e}"),
        _ => eprintln!("envelopes do not diverge for this seed (exponent outside the region)"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify(c) => classify(&Ctx::new(c)?),
        Command::Exponents { common, dims, ells } => exponents_cmd(&Ctx::new(common)?, &dims, &ells),
        Command::RegionPlot(c) => region_plot(&Ctx::new(c)?),
        Command::Simulate {
            common,
            linear_only,
            cfl,
            threshold,
            stride,
        } => simulate(&Ctx::new(common)?, linear_only, cfl, threshold, stride),
        Command::Sweep {
            common,
            epsilons,
            refinements,
            sequential,
        } => sweep(&Ctx::new(common)?, epsilons, refinements, sequential),
        Command::Iterate {
            common,
            variant,
            t0,
            steps,
            calibration,
            frame,
            t_sample,
        } => iterate(&Ctx::new(common)?, variant, t0, steps, calibration, frame, t_sample),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
