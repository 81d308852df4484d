use proptest::prelude::*;
use vpt_core::series::{c2_closed, c3_closed, c4_closed, series_eval, Order};
use vpt_core::variational::{dfbar_domega2, fbar, gap_residual};
use vpt_core::{harmonic_free_energy, rescale, solve_gap, unrescale, ModelParams, Propagator, RescaledParams};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn params() -> impl Strategy<Value = ModelParams> {
    (log_uniform(0.3, 3.0), 0.0..4.0, log_uniform(1e-3, 1e3), log_uniform(0.02, 50.0))
        .prop_map(|(m, omega, lambda, beta)| ModelParams::new(m, omega, lambda, beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn propagator_is_positive_and_reflection_symmetric(
        omega_big in log_uniform(1e-2, 1e2), m in log_uniform(0.1, 10.0),
        beta in log_uniform(1e-2, 1e2), u in 0.0..1.0f64,
    ) {
        let g = Propagator::new(omega_big, m, beta).unwrap();
        let s = u * beta;
        let a = g.at_separation(s);
        prop_assert!(a >= 0.0);
        // strictly positive wherever e^(−Ω·distance to the nearest end) is representable
        if omega_big * s.min(beta - s) < 700.0 {
            prop_assert!(a > 0.0);
        }
        prop_assert!((a - g.at_separation(beta - s)).abs() <= 1e-12 * a);
        prop_assert!((a - g.at_separation_reference(s)).abs() <= 1e-11 * a);
        prop_assert!(a <= g.equal_time() * (1.0 + 1e-14));
    }

    #[test]
    fn propagator_matches_truncated_matsubara_sum(
        omega_big in log_uniform(0.3, 10.0), m in log_uniform(0.3, 3.0),
        beta in log_uniform(0.3, 10.0), u in 0.05..0.95f64,
    ) {
        let g = Propagator::new(omega_big, m, beta).unwrap();
        let s = u * beta;
        let closed = g.at_separation(s);
        prop_assert!((g.matsubara(s, 20_000) - closed).abs() < 1e-6 * g.equal_time());
    }

    #[test]
    fn rescaling_round_trips(z in log_uniform(1e-3, 1e3), t in log_uniform(1e-2, 1e2), lambda in log_uniform(1e-3, 1e4)) {
        let rp = RescaledParams::new(z, t).unwrap();
        let p = unrescale(&rp, lambda).unwrap();
        let back = rescale(&p).unwrap();
        prop_assert!((back.z - z).abs() <= 1e-12 * z);
        prop_assert!((back.t_reduced - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn gap_solution_is_a_stationary_minimum(p in params()) {
        let sol = solve_gap(&p, 1e-12).unwrap();
        let w = sol.omega_big;
        prop_assert!(w > 0.0);
        prop_assert!(sol.residual < 1e-12);
        prop_assert!((gap_residual(&p, w) / (w * w)).abs() < 1e-12);
        let slope = dfbar_domega2(&p, w).unwrap();
        let scale = fbar(&p, w).unwrap().abs().max(1.0) / (w * w);
        prop_assert!(slope.abs() < 1e-9 * scale);
        prop_assert!((fbar(&p, w).unwrap() - sol.f0).abs() < 1e-10 * sol.f0.abs().max(1.0));
        for k in [0.9, 1.1] {
            prop_assert!(fbar(&p, k * w).unwrap() >= sol.f0 - 1e-12 * sol.f0.abs().max(1.0));
        }
    }

    #[test]
    fn corrections_alternate_in_sign(p in params()) {
        let w = solve_gap(&p, 1e-12).unwrap().omega_big;
        prop_assert!(c2_closed(&p, w).unwrap() < 0.0);
        prop_assert!(c3_closed(&p, w).unwrap() > 0.0);
        prop_assert!(c4_closed(&p, w).unwrap() < 0.0);
    }

    #[test]
    fn corrections_scale_as_powers_of_lambda_at_fixed_trial_frequency(p in params(), k in log_uniform(0.1, 10.0)) {
        let w = solve_gap(&p, 1e-12).unwrap().omega_big;
        let q = p.with_lambda(p.lambda * k);
        prop_assert!((c2_closed(&q, w).unwrap() / c2_closed(&p, w).unwrap() / k.powi(2) - 1.0).abs() < 1e-12);
        prop_assert!((c3_closed(&q, w).unwrap() / c3_closed(&p, w).unwrap() / k.powi(3) - 1.0).abs() < 1e-12);
        prop_assert!((c4_closed(&q, w).unwrap() / c4_closed(&p, w).unwrap() / k.powi(4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_coupling_approaches_harmonic(m in log_uniform(0.3, 3.0), omega in 0.2..4.0f64, beta in log_uniform(0.05, 50.0)) {
        let p = ModelParams { m, omega, lambda: 0.0, beta };
        let h = harmonic_free_energy(m, omega, beta).unwrap();
        let s = series_eval(&p, Order::Four).unwrap();
        prop_assert!((s.f4.unwrap() - h).abs() < 1e-12 * h.abs().max(1.0));
        prop_assert_eq!(s.omega_big, omega);
    }

    #[test]
    fn partial_sums_are_consistent(p in params()) {
        let s = series_eval(&p, Order::Four).unwrap();
        prop_assert_eq!(s.f2.unwrap(), s.f0 + s.c2.unwrap());
        prop_assert_eq!(s.f3.unwrap(), s.f2.unwrap() + s.c3.unwrap());
        prop_assert_eq!(s.f4.unwrap(), s.f3.unwrap() + s.c4.unwrap());
        prop_assert!(s.f2.unwrap() < s.f0);
    }
}
