mod common;

use common::{momentum_norm, catalogue_states, position_norm};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use wpa_core::propagator::{evolve_closed_form, evolve_real_axis};
use wpa_core::quadrature::{integrate_real, QuadratureConfig};
use wpa_core::{StateSpec, UnitSystem, WavePacket};

fn atomic() -> UnitSystem {
    UnitSystem::atomic()
}

#[test]
fn catalogue_states_are_normalised() {
    let u = atomic();
    for s in catalogue_states(&u) {
        let n = momentum_norm(&s, &u);
        assert!((n - 1.0).abs() < 1e-8, "{}: {n}", s.name());
    }
}

#[test]
fn normalisation_holds_in_other_units() {
    let u = UnitSystem::new(0.7, 2.5).unwrap();
    for s in [
        WavePacket::truncated_gaussian(0.3, 1.4, 0.8, -6.0, &u).unwrap(),
        WavePacket::gaussian(0.9, 0.5, -4.0, &u).unwrap(),
    ] {
        let n = momentum_norm(&s, &u);
        assert!((n - 1.0).abs() < 1e-8, "{}: {n}", s.name());
    }
}

#[test]
fn taylor_stub_has_no_normalisation() {
    let s = WavePacket::taylor_stub(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0).unwrap();
    assert_eq!(s.normalization_constant().unwrap_err().kind(), "unsupported");
}

#[test]
fn lorentzian_amplitude_examples() {
    let u = atomic();
    let s = WavePacket::lorentzian_squared(1.0).unwrap();
    assert!((s.momentum_amplitude(1.0, &u).re + 2.0 / 1f64.exp()).abs() < 1e-15);
    assert_eq!(s.momentum_amplitude(-0.5, &u), Complex64::new(0.0, 0.0));
    assert!((s.normalization_constant().unwrap() - (2.0 / PI).sqrt()).abs() < 1e-15);
}

#[test]
fn gaussian_does_not_vanish_at_zero_momentum() {
    let u = atomic();
    let s = WavePacket::figure1_gaussian(&u).unwrap();
    let v = s.momentum_amplitude(0.0, &u);
    let expected = (2.0 / PI).powf(0.25) * (-1f64).exp();
    assert!((v.norm() - expected).abs() < 1e-15);
    assert!(!s.is_truncated());
}

#[test]
fn invalid_parameters_are_rejected() {
    let u = atomic();
    assert!(WavePacket::truncated_gaussian(-0.5, 1.0, 1.0, -10.0, &u).is_err());
    assert!(WavePacket::gaussian(0.0, 1.0, -10.0, &u).is_err());
    assert!(WavePacket::lorentzian_squared(f64::NAN).is_err());
    assert!(WavePacket::linear_gaussian(-1.0).unwrap_err().is_input_error());
    assert!(WavePacket::taylor_stub(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0).is_err());
}

/// One-sided derivatives at `0+` from forward differences with one
/// Richardson step.
fn one_sided_coefficients(s: &WavePacket, u: &UnitSystem, h: f64) -> (Complex64, Complex64) {
    let f = |p: f64| s.momentum_amplitude(p, u);
    let f0 = if s.is_truncated() || matches!(s, WavePacket::LorentzianSquared { .. } | WavePacket::LinearGaussian { .. }) {
        Complex64::new(0.0, 0.0)
    } else {
        f(0.0)
    };
    let d1 = |h: f64| (f(h) - f0) / h;
    let c1 = 2.0 * d1(h / 2.0) - d1(h);
    let d2 = |h: f64| (f(2.0 * h) - 2.0 * f(h) + f0) / (2.0 * h * h);
    let c2 = 2.0 * d2(h / 2.0) - d2(h);
    (c1, c2)
}

#[test]
fn taylor_coefficients_match_finite_differences() {
    let u = atomic();
    let mut states = catalogue_states(&u);
    states.push(WavePacket::taylor_stub(Complex64::new(0.4, -1.2), Complex64::new(2.0, 0.5), 1.5).unwrap());
    for s in states {
        let tc = s.taylor_coefficients(&u);
        let (c1, _) = one_sided_coefficients(&s, &u, 1e-4);
        let (_, c2) = one_sided_coefficients(&s, &u, 1e-4);
        let scale = tc.c1.norm().max(tc.c2.norm()).max(1e-3);
        assert!((c1 - tc.c1).norm() < 1e-6 * scale, "{} c1 {c1} vs {}", s.name(), tc.c1);
        assert!((c2 - tc.c2).norm() < 1e-5 * scale, "{} c2 {c2} vs {}", s.name(), tc.c2);
    }
}

#[test]
fn lorentzian_position_norm_over_wide_window() {
    let u = atomic();
    let s = WavePacket::lorentzian_squared(1.0).unwrap();
    let cfg = QuadratureConfig::new(1e-12, 1e-16, 4000, 12.0).unwrap();
    let breaks: Vec<f64> = [-1000.0, -100.0, -10.0, 0.0, 10.0, 100.0, 1000.0].to_vec();
    let (n, _) = integrate_real(|x| s.position_wavefunction_initial(x, &u).unwrap().norm_sqr(), &breaks, &cfg).unwrap();
    assert!((n - 1.0).abs() < 1e-8, "{n}");
}

#[test]
fn position_norm_at_time_zero() {
    let u = atomic();
    for s in catalogue_states(&u) {
        let n = position_norm(&s, 0.0, &u);
        assert!((n - 1.0).abs() < 1e-8, "{}: {n}", s.name());
    }
}

#[test]
fn position_and_momentum_descriptions_agree() {
    let u = atomic();
    let cfg = QuadratureConfig::cross_check();
    let ls = WavePacket::lorentzian_squared(1.0).unwrap();
    for x in [-3.0, -0.5, 0.0, 1.0, 4.0] {
        let direct = ls.position_wavefunction_initial(x, &u).unwrap();
        let fourier = evolve_real_axis(&ls, x, 0.0, &u, &cfg).unwrap();
        assert!((direct - fourier).norm() < 1e-8 * direct.norm(), "x = {x}");
    }
    let tg = WavePacket::figure1_truncated(&u).unwrap();
    for x in [-12.0, -10.0, -7.0, 0.0] {
        let closed = evolve_closed_form(&tg, x, 0.0, &u).unwrap();
        let fourier = evolve_real_axis(&tg, x, 0.0, &u, &cfg).unwrap();
        assert!((closed - fourier).norm() < 1e-8 * closed.norm().max(1e-12), "x = {x}");
    }
}

#[test]
fn spec_parsing_round_trip() {
    let u = atomic();
    let spec = StateSpec::parse("state=truncated_gaussian alpha=0.5 delta=1 p0=1 x0=-10").unwrap();
    assert_eq!(spec.build(&u).unwrap(), WavePacket::figure1_truncated(&u).unwrap());
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(StateSpec::parse(&json).unwrap(), spec);
    assert!(StateSpec::parse("state=gaussian delta=abc").is_err());
    assert!(StateSpec::parse("alpha=1").is_err());
    assert!(StateSpec::named("nonsense").build(&u).is_err());
    let state = WavePacket::linear_gaussian(2.0).unwrap();
    let back: WavePacket = serde_json::from_str(&serde_json::to_string(&state).unwrap()).unwrap();
    assert_eq!(back, state);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_states_vanish_below_zero(p in -50.0..0.0f64, alpha in 0.1..3.0f64, beta in 0.2..4.0f64) {
        let u = atomic();
        for s in [
            WavePacket::lorentzian_squared(alpha).unwrap(),
            WavePacket::linear_gaussian(beta).unwrap(),
            WavePacket::truncated_gaussian(alpha, 1.0, 1.0, -10.0, &u).unwrap(),
        ] {
            prop_assert_eq!(s.momentum_amplitude(p, &u), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn random_truncated_gaussians_are_normalised(
        alpha in 0.05..3.0f64, delta in 0.3..3.0f64, p0 in -2.0..3.0f64, x0 in -20.0..20.0f64,
    ) {
        let u = atomic();
        let s = WavePacket::truncated_gaussian(alpha, delta, p0, x0, &u).unwrap();
        prop_assert!((momentum_norm(&s, &u) - 1.0).abs() < 1e-8);
    }
}
