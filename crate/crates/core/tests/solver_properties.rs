use std::sync::Arc;

use tricomi_core::exec::ExecMode;
use tricomi_core::exponents::ModelParams;
use tricomi_core::solver::{self, estimate_lifespan, DataSpec, Profile, SimConfig, Simulation, StepOutcome};

fn smooth(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - r * r).powi(4)
    }
}

fn dalembert_error(grid: usize) -> f64 {
    let params = ModelParams::new(1, 0.0, 2.0, 2.0);
    let mut cfg = SimConfig::new(params, 1.0);
    cfg.domain_radius = 3.0;
    cfg.grid_points = grid;
    cfg.linear_only = true;
    cfg.data = DataSpec {
        u0: Profile::Custom(Arc::new(smooth)),
        u1: Profile::Zero,
        radius: 1.0,
    };
    let mut sim = Simulation::new(cfg).unwrap();
    while let StepOutcome::Advanced = sim.step().unwrap() {}
    let t = sim.state().t;
    assert!((t - 1.0).abs() < 1e-12);
    sim.radii()
        .iter()
        .zip(&sim.state().u)
        .map(|(&x, &u)| (u - 0.5 * (smooth((x - t).abs()) + smooth(x + t))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn dalembert_second_order() {
    let coarse = dalembert_error(257);
    let fine = dalembert_error(513);
    let order = (coarse / fine).log2();
    assert!(fine < 1e-3, "error {fine}");
    assert!(order > 1.8, "observed order {order}");
}

#[test]
fn zero_data_stays_zero() {
    let params = ModelParams::new(2, 1.0, 2.0, 2.0).with_epsilon(0.0);
    let cfg = SimConfig::new(params, 1.0).with_grid_points(257);
    let res = solver::run(&cfg).unwrap();
    assert!(res.blowup_time.is_none());
    assert!(res.max_abs_u_series.iter().all(|&m| m == 0.0));
    assert!(res.u_series.iter().all(|&u| u == 0.0));
    assert_eq!(res.identity_residuals.duhamel_max_rel, 0.0);
}

#[test]
fn linear_mass_is_affine() {
    for n in 1..=3 {
        let params = ModelParams::new(n, 1.0, 2.0, 2.0);
        let mut cfg = SimConfig::new(params, 2.0);
        cfg.linear_only = true;
        let res = solver::run(&cfg).unwrap();
        assert!(
            res.identity_residuals.duhamel_max_rel < 1e-10,
            "n={n}: {}",
            res.identity_residuals.duhamel_max_rel
        );
        assert!(res.identity_residuals.u1u0_max_rel < 1e-3);
    }
}

#[test]
fn identities_hold_up_to_blowup() {
    for &(n, ell, blows) in &[(1, 1.0, true), (2, 1.0, true), (3, 0.5, false), (2, 0.0, false)] {
        let params = ModelParams::new(n, ell, 2.0, 2.0);
        let cfg = SimConfig::new(params, 3.0);
        let res = solver::run(&cfg).unwrap();
        assert_eq!(res.blowup_time.is_some(), blows, "n={n} ell={ell}");
        let r = res.identity_residuals;
        assert!(r.duhamel_max_rel < 2e-3, "n={n} ell={ell}: {r:?}");
        assert!(r.u1u0_max_rel < 2e-3, "n={n} ell={ell}: {r:?}");
    }
}

#[test]
fn mass_increases_and_weighted_functional_grows() {
    let params = ModelParams::new(2, 1.0, 2.0, 2.0).with_epsilon(0.5);
    let res = solver::run(&SimConfig::new(params, 3.0)).unwrap();
    let end = solver::identity_window_end(&res);
    let k = res.times.iter().take_while(|&&t| t <= end).count();
    assert!(res.u_series[..k].windows(2).all(|w| w[1] > w[0]));
    assert!(res.data_functional > 0.0);
    for i in 0..k {
        assert!(res.u1u0_lhs_series[i] >= res.data_functional * (1.0 - 1e-3));
    }
}

#[test]
fn rejects_invalid_configs() {
    let base = SimConfig::new(ModelParams::new(2, 1.0, 2.0, 2.0), 1.0);
    let mut c = base.clone();
    c.params.n = 4;
    assert!(solver::run(&c).is_err());
    assert!(solver::run(&base.clone().with_grid_points(64)).is_err());
    let mut c = base.clone();
    c.domain_radius = 1.0;
    assert!(solver::run(&c).is_err());
    let mut c = base.clone();
    c.cfl_safety = 1.5;
    assert!(solver::run(&c).is_err());
    assert!(estimate_lifespan(&base, 1, ExecMode::Sequential).is_err());
}

#[test]
fn parallel_matches_sequential() {
    let params = ModelParams::new(1, 1.0, 2.0, 2.0);
    let cfg = SimConfig::new(params, 2.0).with_grid_points(129);
    let cfg = SimConfig {
        domain_radius: cfg.domain_radius,
        ..cfg
    };
    let a = estimate_lifespan(&cfg, 2, ExecMode::Sequential).unwrap();
    let b = estimate_lifespan(&cfg, 2, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.t_est.is_some());
    assert_eq!(a.grid_points, vec![129, 257]);
}

#[test]
fn csv_round_trip() {
    let params = ModelParams::new(1, 1.0, 2.0, 2.0).with_epsilon(0.2);
    let mut cfg = SimConfig::new(params, 0.5);
    cfg.record_stride = 4;
    let res = solver::run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    res.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,U,U0,U1,support_radius,max_abs_u");
    assert_eq!(rows.len(), res.times.len() + 1);
    let first: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], res.times[0]);
    assert_eq!(first[1], res.u_series[0]);
    assert!(res.write_csv(&dir.path().join("missing/x.csv")).is_err());
}
