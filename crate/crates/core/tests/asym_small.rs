use approx::assert_abs_diff_eq;
use cutoff_kpp::asym_small::{
    compute_d_hat1, compute_d_hat1_with, compute_s0, compute_s1, inner_leading, sdot_minimum_estimate, sdot_small,
    InnerCorrection, SmallTimeCoefficients,
};
use cutoff_kpp::numerics::{erf, SemiInfiniteOptions};
use cutoff_kpp::ReactionSpec;
use std::f64::consts::PI;

fn fisher(u_c: f64) -> ReactionSpec {
    ReactionSpec::fisher(u_c).unwrap()
}

/// Composite Simpson on the textbook form of the integrand, no rescaling.
fn d_hat1_oracle(spec: &ReactionSpec) -> f64 {
    let s0 = compute_s0(spec.u_c()).unwrap();
    let sp = PI.sqrt();
    let g = |eta: f64| {
        let z = 0.5 * (eta + s0);
        let ubar = 1.0 + 2.0 * z * z;
        let uhat = sp * ubar * erf(z) + 2.0 * z * (-z * z).exp();
        let u0 = 0.5 * (1.0 - erf(z));
        (z * z).exp() * spec.f(u0) * (sp * ubar + uhat)
    };
    let (a, n) = (-24.0, 48_000);
    let h = -a / n as f64;
    let mut sum = g(a) + g(0.0);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * g(a + k as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn d_hat1_matches_direct_quadrature() {
    for u_c in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let spec = fisher(u_c);
        let oracle = d_hat1_oracle(&spec);
        assert!((compute_d_hat1(&spec).unwrap() - oracle).abs() < 1e-8, "u_c = {u_c}");
    }
}

#[test]
fn s1_at_half_matches_reported_value() {
    let c = SmallTimeCoefficients::compute(&fisher(0.5)).unwrap();
    assert_eq!(c.s0, 0.0);
    assert_abs_diff_eq!(c.s1, 0.28, epsilon = 0.005);
    assert_abs_diff_eq!(c.s1, 0.5 * PI.sqrt() * c.d_hat1, epsilon = 1e-15);
    assert_eq!(compute_s1(0.5, c.d_hat1).unwrap(), c.s1);
}

#[test]
fn d_hat1_stable_under_doubled_truncation() {
    let spec = fisher(0.3);
    let one = compute_d_hat1_with(&spec, &SemiInfiniteOptions::default()).unwrap();
    let two = compute_d_hat1_with(
        &spec,
        &SemiInfiniteOptions {
            depth_factor: 2.0,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(one.value.is_finite() && one.est_error < 1e-10);
    assert!((one.value - two.value).abs() < 1e-9);
}

#[test]
fn constants_satisfy_every_condition() {
    for u_c in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let c = SmallTimeCoefficients::compute(&fisher(u_c)).unwrap();
        for r in c.residuals() {
            assert!(r.abs() < 1e-10, "u_c = {u_c}: {:?}", c.residuals());
        }
        assert_abs_diff_eq!(c.d1, -c.d_hat1 / (4.0 * PI.sqrt()), epsilon = 1e-12);
        assert_eq!(c.d_bar(), (c.d1, c.d2));
    }
}

#[test]
fn s0_strictly_decreasing() {
    let s: Vec<f64> = (1..100).map(|k| compute_s0(k as f64 / 100.0).unwrap()).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]));
    for k in 1..50 {
        let u = k as f64 / 100.0;
        assert_abs_diff_eq!(compute_s0(1.0 - u).unwrap(), -compute_s0(u).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn leading_profile_solves_its_ode() {
    let h = 1e-2;
    for u_c in [0.2, 0.5, 0.8] {
        let s0 = compute_s0(u_c).unwrap();
        let u = |eta: f64| inner_leading(u_c, eta).unwrap();
        for k in -40..=40 {
            let eta = 0.1 * k as f64;
            let (m2, m1, p1, p2) = (u(eta - 2.0 * h), u(eta - h), u(eta + h), u(eta + 2.0 * h));
            let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
            let d2 = (-m2 + 16.0 * m1 - 30.0 * u(eta) + 16.0 * p1 - p2) / (12.0 * h * h);
            let residual = d2 + 0.5 * (eta + s0) * d1;
            assert!(residual.abs() < 1e-8, "u_c = {u_c}, eta = {eta}: {residual:e}");
        }
    }
}

#[test]
fn inner_correction_boundary_behaviour() {
    for u_c in [0.3, 0.5, 0.7] {
        let spec = fisher(u_c);
        let ic = InnerCorrection::new(&spec).unwrap();
        assert!(ic.eval(0.0).unwrap().abs() < 1e-12);
        assert!(ic.eval(-1e-9).unwrap().abs() < 1e-8);
        assert!(ic.eval(-30.0).unwrap().abs() < 1e-10);
        assert!(ic.eval(30.0).unwrap().abs() < 1e-10);
        let h = 1e-5;
        // second-order one-sided slopes
        let l2 = (3.0 * ic.eval(0.0).unwrap() - 4.0 * ic.eval(-h).unwrap() + ic.eval(-2.0 * h).unwrap()) / (2.0 * h);
        let r2 = (-3.0 * ic.eval(0.0).unwrap() + 4.0 * ic.eval(h).unwrap() - ic.eval(2.0 * h).unwrap()) / (2.0 * h);
        assert!((l2 - r2).abs() < 1e-8, "u_c = {u_c}: {l2} vs {r2}");
    }
}

#[test]
fn inner_correction_solves_its_ode() {
    let h = 1e-3;
    for u_c in [0.3, 0.7] {
        let spec = fisher(u_c);
        let ic = InnerCorrection::new(&spec).unwrap();
        let c = *ic.coefficients();
        let u0 = |eta: f64| inner_leading(u_c, eta).unwrap();
        let u1 = |eta: f64| ic.eval(eta).unwrap();
        for k in 1..=60 {
            for eta in [-0.1 * k as f64, 0.1 * k as f64] {
                let d1 = (u1(eta + h) - u1(eta - h)) / (2.0 * h);
                let d2 = (u1(eta + h) - 2.0 * u1(eta) + u1(eta - h)) / (h * h);
                let u0p = (u0(eta + h) - u0(eta - h)) / (2.0 * h);
                let forcing = if eta < 0.0 { spec.f(u0(eta)) } else { 0.0 };
                let residual = d2 + 0.5 * (eta + c.s0) * d1 - u1(eta) + 1.5 * c.s1 * u0p + forcing;
                assert!(residual.abs() < 1e-5, "u_c = {u_c}, eta = {eta}: {residual:e}");
            }
        }
    }
}

#[test]
fn front_speed_regimes() {
    let half = SmallTimeCoefficients::compute(&fisher(0.5)).unwrap();
    assert!(half.s1 > 0.0);
    assert!(sdot_small(&half, 1e-6) > 0.0 && sdot_small(&half, 1e-6) < 1e-2);
    let low = SmallTimeCoefficients::compute(&fisher(0.3)).unwrap();
    assert!(sdot_small(&low, 1e-8) > 1e3);
    let high = SmallTimeCoefficients::compute(&fisher(0.7)).unwrap();
    assert!(sdot_small(&high, 1e-8) < -1e3);
}

#[test]
fn minimum_location_near_half_and_flag() {
    let c = SmallTimeCoefficients::compute(&fisher(0.49)).unwrap();
    let m = sdot_minimum_estimate(&c).unwrap();
    // s0 ~ sqrt(pi)(1 - 2u_c) near one half
    let limit = PI.sqrt() * (1.0 - 2.0 * 0.49) / (3.0 * c.s1);
    assert!((m.t_m / limit - 1.0).abs() < 1e-3, "{} vs {limit}", m.t_m);
    assert!(m.reliable);
    let c = SmallTimeCoefficients::compute(&fisher(0.2)).unwrap();
    assert!(!sdot_minimum_estimate(&c).unwrap().reliable);
    let c = SmallTimeCoefficients::compute(&fisher(0.6)).unwrap();
    assert!(sdot_minimum_estimate(&c).is_none());
}
