#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpa_core::quadrature::{integrate_from_neg_infinity, integrate_real, integrate_to_infinity, QuadratureConfig};
use wpa_core::{evolve, Route, UnitSystem, WavePacket};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the disc `|z| <= radius`.
pub fn random_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    Complex64::from_polar(r, theta)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Faddeeva oracle: `w(z) = (i/pi) int exp(-u^2)/(z - u) du` along the line
/// `Im u = c` with `c = min(0, Im z - 1)`, i.e. at least a unit distance below
/// the pole. The integrand is analytic in a strip of half-width >= 1 around
/// the line, so the trapezoidal rule with step `h` converges like
/// `exp(-2 pi / h)`; terms are accumulated with Neumaier summation.
pub fn w_oracle(z: Complex64, h: f64) -> Complex64 {
    let c = (z.im - 1.0).min(0.0);
    let reach = (c * c + 80.0).sqrt() + 1.0;
    let n = (reach / h).ceil() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let u = Complex64::new(k as f64 * h, c);
        let term = (-(u * u)).exp() / (z - u);
        for (s, cpart, t) in [(&mut sum.re, &mut comp.re, term.re), (&mut sum.im, &mut comp.im, term.im)] {
            let next = *s + t;
            if s.abs() >= t.abs() {
                *cpart += (*s - next) + t;
            } else {
                *cpart += (t - next) + *s;
            }
            *s = next;
        }
    }
    Complex64::new(0.0, h / std::f64::consts::PI) * (sum + comp)
}

/// One state of each catalogue family, with the default parameters.
pub fn catalogue_states(units: &UnitSystem) -> Vec<WavePacket> {
    vec![
        WavePacket::figure1_truncated(units).unwrap(),
        WavePacket::figure1_gaussian(units).unwrap(),
        WavePacket::lorentzian_squared(1.0).unwrap(),
        WavePacket::linear_gaussian(1.0).unwrap(),
    ]
}

pub fn preferred_route(state: &WavePacket) -> Route {
    match state {
        WavePacket::LorentzianSquared { .. } | WavePacket::TaylorStub { .. } => Route::Quadrature,
        _ => Route::ClosedForm,
    }
}

/// `int |psi(x, t)|^2 dx` over the whole line: a finite window that follows
/// the packet plus two mapped semi-infinite tails.
pub fn position_norm(state: &WavePacket, t: f64, units: &UnitSystem) -> f64 {
    let cfg = QuadratureConfig::new(1e-10, 1e-14, 4000, 12.0).unwrap();
    let route = preferred_route(state);
    let density = |x: f64| evolve(state, x, t, units, route, &cfg).unwrap().norm_sqr();
    let spread = state.length_scale(units) + state.momentum_scale(units) * t.abs() / units.mass();
    let (lo_p, hi_p) = state.momentum_window(8.0, units);
    let x0 = state.initial_position();
    let lo = x0 + (lo_p * t / units.mass()).min(hi_p * t / units.mass()) - 20.0 * spread;
    let hi = x0 + (lo_p * t / units.mass()).max(hi_p * t / units.mass()) + 20.0 * spread;
    let pieces = 64;
    let breaks: Vec<f64> = (0..=pieces).map(|j| lo + (hi - lo) * j as f64 / pieces as f64).collect();
    let (middle, _) = integrate_real(density, &breaks, &cfg).unwrap();
    let (left, _) = integrate_from_neg_infinity(density, lo, spread, &cfg).unwrap();
    let (right, _) = integrate_to_infinity(density, hi, spread, &cfg).unwrap();
    left + middle + right
}

/// `int |<p|psi>|^2 dp` by quadrature, independently of the library's own
/// normalisation routine.
pub fn momentum_norm(state: &WavePacket, units: &UnitSystem) -> f64 {
    let cfg = QuadratureConfig::new(1e-12, 1e-15, 4000, 12.0).unwrap();
    let f = |p: f64| state.momentum_amplitude(p, units).norm_sqr();
    let scale = state.momentum_scale(units);
    let (hi, _) = integrate_to_infinity(f, 0.0, scale, &cfg).unwrap();
    let (lo, _) = integrate_from_neg_infinity(f, 0.0, scale, &cfg).unwrap();
    hi + lo
}
