use approx::assert_abs_diff_eq;
use cutoff_kpp::ptw::{lambda_plus, pwl_speed, shoot_speed, tail_window_estimate, wave_closed_form_pwl, WaveSolution};
use cutoff_kpp::ReactionSpec;

const TOL: f64 = 1e-10;

fn fisher(u_c: f64) -> WaveSolution {
    shoot_speed(&ReactionSpec::fisher(u_c).unwrap(), TOL).unwrap()
}

#[test]
fn shooting_matches_pwl_closed_form() {
    for u_c in [0.75, 0.8, 0.9] {
        let spec = ReactionSpec::piecewise_linear(1.0, u_c).unwrap();
        let ws = shoot_speed(&spec, TOL).unwrap();
        let exact = pwl_speed(1.0, u_c).unwrap();
        assert!((ws.v_star() - exact).abs() < 1e-6, "u_c = {u_c}");
        let worst = (0..=10_000)
            .map(|k| -1e-3 * k as f64)
            .map(|y| (ws.eval(y) - wave_closed_form_pwl(1.0, u_c, y).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "u_c = {u_c}: {worst:e}");
        assert_abs_diff_eq!(ws.a_minus_inf(), 1.0 - u_c, epsilon = 1e-6);
    }
}

#[test]
fn fisher_speeds_match_reported_values() {
    assert_abs_diff_eq!(fisher(0.5).v_star(), 0.558, epsilon = 0.01);
    assert_abs_diff_eq!(fisher(0.1).v_star(), 1.248, epsilon = 0.01);
}

#[test]
fn speed_decreases_with_cutoff() {
    let speeds: Vec<f64> = (1..=9).map(|k| fisher(0.1 * k as f64).v_star()).collect();
    assert!(speeds.windows(2).all(|w| w[1] < w[0]), "{speeds:?}");
    assert!(speeds.iter().all(|&v| v > 0.0 && v < 2.0));
}

#[test]
fn profile_satisfies_ode_and_invariants() {
    for u_c in [0.2, 0.5, 0.8] {
        let ws = fisher(u_c);
        let spec = ReactionSpec::fisher(u_c).unwrap();
        let (y, u, du) = (ws.y(), ws.u(), ws.du());
        let h = y[1] - y[0];
        for i in 2..y.len() - 2 {
            let d2 = (-du[i + 2] + 8.0 * du[i + 1] - 8.0 * du[i - 1] + du[i - 2]) / (12.0 * h);
            let residual = d2 + ws.v_star() * du[i] + spec.f(u[i]);
            assert!(residual.abs() < 1e-8, "u_c = {u_c}, y = {}: {residual:e}", y[i]);
        }
        assert_eq!(u[u.len() - 1], u_c);
        assert!(u.windows(2).all(|w| w[1] < w[0]));
        assert!(u[..u.len() - 1].iter().all(|&v| v > u_c && v < 1.0));
        assert!(1.0 - u[0] < 1e-6);
        assert!(ws.lambda_plus() > 0.0 && ws.a_minus_inf() > 0.0);
        assert_eq!(ws.lambda_plus(), lambda_plus(ws.v_star(), -1.0));
        // slope continuity with the analytic branch
        let jump = du[du.len() - 1] + ws.v_star() * u_c;
        assert!(jump.abs() < 10.0 * TOL, "u_c = {u_c}: {jump:e}");
    }
}

#[test]
fn tail_amplitude_is_stable() {
    let ws = fisher(0.5);
    let (a, spread) = tail_window_estimate(&ws).unwrap();
    assert!(spread < 0.01);
    assert_eq!(a, ws.a_minus_inf());
    // the far-field form holds well inside the table too
    let y = -0.5 * ws.m();
    let deficit = 1.0 - ws.eval(y);
    assert!((deficit / ws.tail_deficit(y) - 1.0).abs() < 1e-3);
}
