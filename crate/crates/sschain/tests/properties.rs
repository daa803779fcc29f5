//! Randomized invariant checks across the public API.

use proptest::prelude::*;

use sschain::{
    choose_window, evolve, gamma_fn, init_state, kernel_g, omega_sq, rl_fractional_integral,
    scaling_residual, ChainParams, ContinuumParams, EvaluableField, ToleranceBudget,
};

fn budget() -> ToleranceBudget<f64> {
    ToleranceBudget::new(1e-8, 1e-10, 2_000_000, 5_000_000).unwrap()
}

fn params_strategy() -> impl Strategy<Value = ChainParams<f64>> {
    (1.2f64..3.0, 0.1f64..1.9, 0.3f64..3.0)
        .prop_map(|(n, delta, h)| ChainParams::physical(n, delta, h).unwrap())
}

proptest! {
    // The dispersion series depends on kh only through sin^2, so the sign of
    // kh must not leak into the value, not even in the last bit.
    #[test]
    fn dispersion_is_even_to_the_bit(
        params in params_strategy(),
        kh in prop::num::f64::POSITIVE.prop_filter("finite, moderate", |x| (1e-6..1e3).contains(x)),
    ) {
        let tol = budget();
        let plus = omega_sq(params, kh, &tol).unwrap();
        let minus = omega_sq(params, -kh, &tol).unwrap();
        prop_assert_eq!(plus.omega_sq.to_bits(), minus.omega_sq.to_bits());
        prop_assert_eq!(plus.err_bound.to_bits(), minus.err_bound.to_bits());
        prop_assert_eq!(plus.kh.to_bits(), minus.kh.to_bits());
    }

    #[test]
    fn dispersion_samples_are_certified_and_nonnegative(
        params in params_strategy(),
        kh in -60.0f64..60.0,
    ) {
        prop_assume!(kh.abs() > 1e-9);
        let s = omega_sq(params, kh, &budget()).unwrap();
        prop_assert!(s.omega_sq >= 0.0);
        prop_assert_eq!(s.kh, kh.abs());
        prop_assert!(s.err_bound >= 0.0 && s.err_bound.is_finite());
    }

    #[test]
    fn scaling_identity_stays_within_certified_allowance(
        params in params_strategy(),
        kh in 1e-4f64..60.0,
    ) {
        let sc = scaling_residual(params, kh, &budget()).unwrap();
        prop_assert!(
            sc.residual <= sc.allowance,
            "residual {:e} > allowance {:e}", sc.residual, sc.allowance
        );
    }

    #[test]
    fn truncation_windows_are_ordered_with_nonnegative_tails(
        params in params_strategy(),
        kh in 1e-4f64..60.0,
    ) {
        let w = choose_window(params, kh, &budget()).unwrap();
        prop_assert!(w.s_minus <= w.s_plus);
        prop_assert!(w.tail_bound_lower >= 0.0);
        prop_assert!(w.tail_bound_upper >= 0.0);
    }

    #[test]
    fn gamma_satisfies_the_recurrence(z in 0.05f64..80.0) {
        let lhs = gamma_fn(z + 1.0).unwrap();
        let rhs = z * gamma_fn(z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs(), "Gamma({z}+1) {lhs} vs z*Gamma(z) {rhs}");
    }

    #[test]
    fn kernel_is_even_to_the_bit(
        delta in 0.1f64..1.9,
        x in prop::num::f64::POSITIVE.prop_filter("moderate", |x| (1e-6..1e6).contains(x)),
    ) {
        let cp = ContinuumParams::new(1e-3, delta, 1.0).unwrap();
        let plus = kernel_g(x, cp).unwrap();
        let minus = kernel_g(-x, cp).unwrap();
        prop_assert_eq!(plus.to_bits(), minus.to_bits());
    }

    #[test]
    fn fractional_integral_is_linear(
        (v, w) in (16usize..120).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        d in 0.2f64..1.8,
        x in 0.05f64..1.0,
    ) {
        let mixed: Vec<f64> = v.iter().zip(&w).map(|(&vi, &wi)| a * vi + b * wi).collect();
        let lhs = rl_fractional_integral(&mixed, 0.0, 1.0, d, x).unwrap();
        let iv = rl_fractional_integral(&v, 0.0, 1.0, d, x).unwrap();
        let iw = rl_fractional_integral(&w, 0.0, 1.0, d, x).unwrap();
        let rhs = a * iv + b * iw;
        let scale = a.abs() * iv.abs() + b.abs() * iw.abs() + 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn fractional_integral_preserves_nonnegativity(
        v in prop::collection::vec(0.0f64..2.0, 8..80),
        d in 0.2f64..1.8,
        x in 0.05f64..1.0,
    ) {
        let got = rl_fractional_integral(&v, 0.0, 1.0, d, x).unwrap();
        prop_assert!(got >= -1e-15, "nonnegative data integrated to {got}");
    }

    #[test]
    fn spectral_evolution_reverses(
        center in 5.0f64..15.0,
        width in 1.0f64..4.0,
        dt in -1.5f64..1.5,
        steps in 0usize..50,
    ) {
        let tol = ToleranceBudget::default();
        let params = ChainParams::physical(1.5, 0.7, 1.0).unwrap();
        let u0 = EvaluableField::gaussian_packet(center, width);
        let v0 = EvaluableField::constant(0.0);
        let state = init_state(20.0, 16, params, &u0, &v0).unwrap();
        let back = evolve(&evolve(&state, dt, steps, &tol).unwrap(), -dt, steps, &tol).unwrap();
        let scale = state.u_hat.iter().map(|c| c.norm()).fold(1e-30, f64::max);
        for j in 0..16 {
            prop_assert!((back.u_hat[j] - state.u_hat[j]).norm() <= 1e-11 * scale);
            prop_assert!((back.v_hat[j] - state.v_hat[j]).norm() <= 1e-11 * scale);
        }
    }
}
