use proptest::prelude::*;
use wpa_core::asymptotics::analytic_log_derivative_curve;
use wpa_core::{
    fit_exponent, log_derivative_at, log_derivative_curve, DensityTrace, QuadratureConfig, Route, TimeGrid,
    UnitSystem, WavePacket,
};

fn atomic() -> UnitSystem {
    UnitSystem::atomic()
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// `d ln |psi(0,t)|^2 / d ln t` for the linear Gaussian with `beta = 1`.
fn lg_slope(t: f64) -> f64 {
    -2.0 / (1.0 + 1.0 / (t * t))
}

#[test]
fn linear_gaussian_slope_curve() {
    let u = atomic();
    let s = WavePacket::linear_gaussian(1.0).unwrap();
    let grid = TimeGrid::new(0.1, 1e3, 16).unwrap();
    let trace = DensityTrace::compute(&s, 0.0, &grid, &u, Route::ClosedForm, &cfg()).unwrap();
    for (ln_t, slope) in log_derivative_curve(&trace).unwrap() {
        let expected = lg_slope(ln_t.exp());
        assert!((slope - expected).abs() < 1e-4, "ln t = {ln_t}: {slope} vs {expected}");
    }
    for (ln_t, slope) in analytic_log_derivative_curve(&s, 0.0, &grid, &u, Route::Quadrature, &cfg()).unwrap() {
        assert!((slope - lg_slope(ln_t.exp())).abs() < 1e-7, "ln t = {ln_t}");
    }
}

#[test]
fn linear_gaussian_slope_decreases() {
    let u = atomic();
    let s = WavePacket::linear_gaussian(1.0).unwrap();
    let grid = TimeGrid::new(0.1, 1e4, 8).unwrap();
    let curve = analytic_log_derivative_curve(&s, 0.0, &grid, &u, Route::ClosedForm, &cfg()).unwrap();
    for pair in curve.windows(2) {
        assert!(pair[1].1 < pair[0].1);
    }
}

fn exponent(s: &WavePacket, t_min: f64, t_max: f64, route: Route) -> f64 {
    let u = atomic();
    let grid = TimeGrid::new(t_min, t_max, 16).unwrap();
    let trace = DensityTrace::compute(s, 0.0, &grid, &u, route, &cfg()).unwrap();
    fit_exponent(&trace, 1.0).unwrap().asymptotic_exponent
}

#[test]
fn catalogue_exponents() {
    let u = atomic();
    let tg = WavePacket::figure1_truncated(&u).unwrap();
    let g = WavePacket::figure1_gaussian(&u).unwrap();
    let ls = WavePacket::lorentzian_squared(1.0).unwrap();
    let lg = WavePacket::linear_gaussian(1.0).unwrap();
    let n = exponent(&tg, 1e3, 1e6, Route::ClosedForm);
    assert!((n + 3.0).abs() < 0.05, "truncated gaussian {n}");
    let n = exponent(&g, 1e3, 1e6, Route::ClosedForm);
    assert!((n + 1.0).abs() < 0.05, "gaussian {n}");
    let n = exponent(&ls, 1e3, 1e6, Route::Quadrature);
    assert!((n + 2.0).abs() < 0.05, "lorentzian squared {n}");
    let n = exponent(&lg, 1e3, 1e6, Route::ClosedForm);
    assert!((n + 2.0).abs() < 1e-3, "linear gaussian {n}");
}

#[test]
fn analytic_and_differenced_slopes_agree_late() {
    let u = atomic();
    let tg = WavePacket::figure1_truncated(&u).unwrap();
    let grid = TimeGrid::new(1e3, 1e6, 16).unwrap();
    let trace = DensityTrace::compute(&tg, 0.0, &grid, &u, Route::ClosedForm, &cfg()).unwrap();
    let differenced = log_derivative_curve(&trace).unwrap();
    for (ln_t, slope) in differenced {
        let exact = log_derivative_at(&tg, 0.0, ln_t.exp(), &u, Route::ClosedForm, &cfg()).unwrap();
        assert!((slope - exact).abs() < 1e-4, "ln t = {ln_t}");
    }
}

#[test]
fn degenerate_and_short_traces_are_rejected() {
    let grid = TimeGrid::new(1.0, 1e3, 4).unwrap();
    let mut density: Vec<f64> = grid.values().iter().map(|t| t.powi(-2)).collect();
    density[3] = 0.0;
    density[7] = 0.0;
    let trace = DensityTrace::from_values(0.0, grid.clone(), density, Route::ClosedForm).unwrap();
    match fit_exponent(&trace, 1.0).unwrap_err() {
        wpa_core::Error::Degenerate { indices } => assert_eq!(indices, vec![3, 7]),
        e => panic!("unexpected {e}"),
    }
    let ok: Vec<f64> = grid.values().iter().map(|t| t.powi(-2)).collect();
    let trace = DensityTrace::from_values(0.0, grid, ok, Route::ClosedForm).unwrap();
    assert_eq!(fit_exponent(&trace, 2.5).unwrap_err().kind(), "insufficient_span");
    assert!(TimeGrid::new(0.0, 1.0, 16).is_err());
    assert!(TimeGrid::new(2.0, 1.0, 16).is_err());
    assert_eq!(TimeGrid::new(5.0, 5.0, 16).unwrap().len(), 1);
}

fn trace_of(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> DensityTrace {
    let density = grid.values().iter().map(|&t| f(t)).collect();
    DensityTrace::from_values(0.0, grid.clone(), density, Route::ClosedForm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn density_rescaling_leaves_slopes_unchanged(
        lambda in 1e-6..1e6f64, n in -4.0..-0.5f64, wobble in 0.0..0.5f64, ppd in 4usize..20,
    ) {
        let grid = TimeGrid::new(0.5, 5e4, ppd).unwrap();
        let f = |t: f64| t.powf(n) * (1.0 + wobble / (1.0 + t));
        let base = trace_of(&grid, f);
        let scaled = trace_of(&grid, |t| lambda * f(t));
        let a = fit_exponent(&base, 1.0).unwrap();
        let b = fit_exponent(&scaled, 1.0).unwrap();
        prop_assert!((a.asymptotic_exponent - b.asymptotic_exponent).abs() < 1e-10);
        for (p, q) in a.slope_curve.iter().zip(&b.slope_curve) {
            prop_assert!((p.1 - q.1).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_power_laws_are_recovered(c in 1e-3..1e3f64, n in -4.0..0.0f64, t_min in 1e-2..10.0f64, ppd in 4usize..32) {
        let grid = TimeGrid::new(t_min, t_min * 1e3, ppd).unwrap();
        let trace = trace_of(&grid, |t| c * t.powf(n));
        let est = fit_exponent(&trace, 1.0).unwrap();
        prop_assert!((est.asymptotic_exponent - n).abs() < 1e-10);
        prop_assert!((est.log_amplitude - c.ln()).abs() < 1e-8);
        for (_, s) in est.slope_curve {
            prop_assert!((s - n).abs() < 1e-9);
        }
    }

    #[test]
    fn time_rescaling_is_equivariant(lambda in 0.1..10.0f64, n in -3.0..-1.0f64) {
        // rho(t) = t^n (1 + 1/t): rescaling t shifts the curve along ln t
        let g1 = TimeGrid::new(1.0, 1e4, 8).unwrap();
        let g2 = TimeGrid::new(lambda, lambda * 1e4, 8).unwrap();
        let a = log_derivative_curve(&trace_of(&g1, |t| t.powf(n) * (1.0 + 1.0 / t))).unwrap();
        let b = log_derivative_curve(&trace_of(&g2, |t| (t / lambda).powf(n) * (1.0 + lambda / t))).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((q.0 - p.0 - lambda.ln()).abs() < 1e-12);
            prop_assert!((p.1 - q.1).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_covers_its_range(t_min in 1e-3..1e2f64, decades in 0.0..6.0f64, ppd in 4usize..40) {
        let t_max = t_min * 10f64.powf(decades);
        let g = TimeGrid::new(t_min, t_max, ppd).unwrap();
        let v = g.values();
        prop_assert_eq!(v[0], t_min);
        prop_assert_eq!(*v.last().unwrap(), t_max);
        prop_assert!(v.len() as f64 >= decades * ppd as f64);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}
