use approx::assert_relative_eq;
use proptest::prelude::*;
use tricomi_core::exponents::{gamma_exp, theta, ModelParams};
use tricomi_core::iteration::{
    closed_forms, divergence_exponent, epsilon0_threshold, frame_exponent, iteration_constants, lifespan_exponent,
    lifespan_upper_bound, log_cj_bound, log_lower_bound_envelope, seed, trajectory, SeedVariant,
};

fn variant() -> impl Strategy<Value = SeedVariant> {
    prop_oneof![
        Just(SeedVariant::Derivative),
        Just(SeedVariant::Power),
        Just(SeedVariant::Linear)
    ]
}

fn model() -> impl Strategy<Value = ModelParams> {
    (2u32..=5, 0.0f64..3.0, 1.05f64..4.0, 1.05f64..4.0, 0.01f64..1.0)
        .prop_map(|(n, ell, p, q, eps)| ModelParams::new(n, ell, p, q).with_epsilon(eps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recursion_matches_closed_forms(m in model(), v in variant(), k in 0.1f64..10.0, c in 0.1f64..10.0) {
        let s = seed(&m, v, 1.0, k).unwrap();
        let a = frame_exponent(&m);
        for state in trajectory(&s, &m, c, 40) {
            let (alpha, beta) = closed_forms(&s, a, m.q, state.j);
            prop_assert!((state.alpha_j - alpha).abs() <= 1e-9 * alpha.abs().max(1.0));
            prop_assert!((state.beta_j - beta).abs() <= 1e-9 * beta.abs().max(1.0));
            prop_assert!(state.log_c_j.is_finite());
        }
    }

    #[test]
    fn log_cj_dominates_bound(m in model(), v in variant(), k in 0.1f64..10.0, c in 0.1f64..10.0) {
        let s = seed(&m, v, 1.0, k).unwrap();
        let j0 = iteration_constants(&s, c, m.q).j0;
        let traj = trajectory(&s, &m, c, j0 + 20);
        for state in &traj[j0 as usize..] {
            let bound = log_cj_bound(&s, c, m.q, state.j).unwrap();
            prop_assert!(state.log_c_j >= bound - 1e-9 * bound.abs().max(1.0),
                "j={} log C_j={} bound={}", state.j, state.log_c_j, bound);
        }
        if j0 > 0 {
            prop_assert!(log_cj_bound(&s, c, m.q, j0 - 1).is_err());
        }
    }

    #[test]
    fn divergence_exponent_identities(m in model()) {
        let d = seed(&m, SeedVariant::Derivative, 1.0, 1.0).unwrap();
        prop_assert!((divergence_exponent(&m, &d) - theta(&m)).abs() < 1e-9);
        let p = seed(&m, SeedVariant::Power, 1.0, 1.0).unwrap();
        prop_assert!((divergence_exponent(&m, &p) - gamma_exp(m.n, m.ell, m.q).unwrap()).abs() < 1e-9);
        let l = seed(&m, SeedVariant::Linear, 1.0, 1.0).unwrap();
        prop_assert!((divergence_exponent(&m, &l) - (m.q + 1.0 - frame_exponent(&m))).abs() < 1e-9);
    }

    #[test]
    fn divergence_dichotomy(m in model(), v in variant()) {
        // Envelopes at fixed t grow without bound in j exactly when the
        // divergence exponent is positive and t lies beyond the lifespan bound.
        let s = seed(&m, v, 1.0, 1.0).unwrap();
        let th = divergence_exponent(&m, &s);
        if th > 0.0 {
            let t_star = lifespan_upper_bound(&m, &s, 1.0).unwrap();
            prop_assume!(t_star.is_finite() && t_star < 1e30);
            let t = 4.0 * t_star.max(2.0);
            let traj = trajectory(&s, &m, 1.0, 60);
            let env: Vec<f64> = traj.iter().map(|st| log_lower_bound_envelope(t, st, 1.0).unwrap()).collect();
            prop_assert!(env[60] > env[40] && env[40] > 0.0, "{:?}", &env[38..]);
            prop_assert!(lifespan_exponent(&m, &s).unwrap() > 0.0);
        } else {
            prop_assert!(lifespan_upper_bound(&m, &s, 1.0).is_err());
            prop_assert!(lifespan_exponent(&m, &s).is_err());
        }
    }
}

#[test]
fn integer_exponent_sequences() {
    // n = 2, ℓ = 1, p = q = 2: α_j = 6·2^j − 4, β_j = 7·2^j − 2 exactly
    let m = ModelParams::new(2, 1.0, 2.0, 2.0);
    let s = seed(&m, SeedVariant::Derivative, 1.0, 1.0).unwrap();
    for st in trajectory(&s, &m, 1.0, 40) {
        let pow = 2f64.powi(st.j as i32);
        assert_eq!(st.alpha_j, 6.0 * pow - 4.0);
        assert_eq!(st.beta_j, 7.0 * pow - 2.0);
    }
}

#[test]
fn epsilon0_inverts_lifespan() {
    let m = ModelParams::new(2, 1.0, 2.0, 2.0).with_epsilon(0.3);
    let s = seed(&m, SeedVariant::Derivative, 1.0, 2.0).unwrap();
    let t = lifespan_upper_bound(&m, &s, 1.5).unwrap();
    let e0 = epsilon0_threshold(&m, &s, 1.5, t).unwrap();
    assert_relative_eq!(e0, 0.3, max_relative = 1e-10);
    // halving ε multiplies the bound by 2^{k}
    let k = lifespan_exponent(&m, &s).unwrap();
    let m2 = m.with_epsilon(0.15);
    let s2 = seed(&m2, SeedVariant::Derivative, 1.0, 2.0).unwrap();
    let t2 = lifespan_upper_bound(&m2, &s2, 1.5).unwrap();
    assert_relative_eq!(t2 / t, 2f64.powf(k), max_relative = 1e-10);
}
