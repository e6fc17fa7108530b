// Reference values are quoted to more digits than f64 holds.
#![allow(clippy::excessive_precision)]

mod common;

use common::{rel, w_oracle};
use num_complex::Complex64;
use proptest::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use wpa_core::complexfn::{erfc, w, w_derivative, w_series};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn value_at_origin() {
    assert_eq!(w(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    assert_eq!(w_series(c(0.0, 0.0), 1), c(1.0, 0.0));
}

#[test]
fn oracle_is_self_consistent() {
    for z in [c(0.0, 1.0), c(1.0, 1.0), c(-3.0, -0.5), c(4.0, 2.5), c(0.2, -0.4)] {
        let coarse = w_oracle(z, 0.1);
        let fine = w_oracle(z, 0.05);
        assert!(rel(coarse, fine) < 1e-14, "z = {z}");
    }
}

#[test]
fn imaginary_unit_against_oracle() {
    let v = w(c(0.0, 1.0)).unwrap();
    assert!(v.im.abs() < 1e-16);
    assert!(rel(v, w_oracle(c(0.0, 1.0), 0.05)) < 1e-13);
    // e * erfc(1), 30-digit reference
    assert!((v.re - 0.427583576155807004410750344491).abs() < 1e-15);
}

#[test]
fn one_plus_i_against_oracle() {
    let z = c(1.0, 1.0);
    assert!(rel(w(z).unwrap(), w_oracle(z, 0.05)) < 1e-13);
}

#[test]
fn lower_half_plane_against_oracle() {
    for z in [c(0.3, -0.5), c(-2.0, -0.5), c(4.5, -0.2), c(-1.0, -0.05)] {
        assert!(rel(w(z).unwrap(), w_oracle(z, 0.05)) < 1e-12, "z = {z}");
    }
}

#[test]
fn series_at_small_argument() {
    let z = c(0.0, 0.1);
    assert!(rel(w_series(z, 40), w(z).unwrap()) < 1e-14);
}

#[test]
fn series_terms_follow_the_definition() {
    let z = c(0.7, -0.3);
    for n in 0..12 {
        let term = w_series(z, n + 1) - w_series(z, n);
        let expected = (Complex64::i() * z).powu(n as u32) / gamma(n as f64 / 2.0 + 1.0);
        // differences of partial sums lose digits once the term is small
        assert!((term - expected).norm() < 1e-13 * expected.norm() + 4e-16, "n = {n}");
    }
}

#[test]
fn derivative_examples() {
    let d0 = w_derivative(c(0.0, 0.0)).unwrap();
    assert!((d0 - c(0.0, 2.0 / PI.sqrt())).norm() < 1e-16);
    let z = c(0.5, 0.3);
    let h = 1e-6;
    let fd = (w(z + h).unwrap() - w(z - h).unwrap()) / (2.0 * h);
    assert!((w_derivative(z).unwrap() - fd).norm() < 1e-8);
    for y in [0.0, 0.3, 1.0, 2.5, 7.0, 12.0] {
        let d = w_derivative(c(0.0, y)).unwrap();
        assert!(d.re.abs() <= 1e-15 * d.norm(), "y = {y}");
    }
}

#[test]
fn erfc_on_the_real_axis() {
    // 25-digit references
    let table = [
        (-3.0, 1.99997790950300141),
        (-1.0, 1.84270079294971487),
        (-0.2, 1.22270258921047847),
        (0.0, 1.0),
        (0.4, 0.571607644953331524),
        (1.5, 0.0338948535246892729),
        (4.0, 1.54172579002800189e-8),
    ];
    for (x, expected) in table {
        let v = erfc(c(x, 0.0)).unwrap();
        assert!((v.re - expected).abs() <= 1e-14 * expected, "x = {x}");
        assert!(v.im.abs() <= 1e-15 * expected);
    }
}

#[test]
fn non_finite_input_is_rejected() {
    assert!(w(c(f64::NAN, 0.0)).unwrap_err().is_input_error());
    assert!(w(c(0.0, f64::INFINITY)).is_err());
}

#[test]
fn deep_lower_half_plane_overflows() {
    assert_eq!(w(c(0.0, -40.0)).unwrap_err().kind(), "overflow");
}

fn disc(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, -PI..PI).prop_map(move |(r, th)| Complex64::from_polar(radius * r.sqrt(), th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reflection(z in disc(5.0)) {
        let lhs = w(-z).unwrap();
        let gauss = 2.0 * (-(z * z)).exp();
        let wz = w(z).unwrap();
        let scale = lhs.norm().max(gauss.norm()).max(wz.norm());
        prop_assert!((lhs - (gauss - wz)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn conjugation(z in disc(5.0)) {
        let lhs = w(z.conj()).unwrap();
        let rhs = w(-z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * lhs.norm());
    }

    #[test]
    fn derivative_matches_finite_differences(z in disc(3.0)) {
        let h = 1e-5;
        let fd = (w(z + h).unwrap() - w(z - h).unwrap()) / (2.0 * h);
        let d = w_derivative(z).unwrap();
        prop_assert!((d - fd).norm() <= 1e-7 * d.norm().max(1.0));
    }

    #[test]
    fn series_matches_main_branch(z in disc(0.5)) {
        prop_assert!(rel(w_series(z, 40), w(z).unwrap()) <= 1e-12);
    }

    #[test]
    fn positive_imaginary_axis_is_real_and_decreasing(y in 0.0..10.0f64, dy in 1e-3..1.0f64) {
        let a = w(c(0.0, y)).unwrap();
        let b = w(c(0.0, y + dy)).unwrap();
        prop_assert!(a.im.abs() <= 1e-15 * a.re && b.im.abs() <= 1e-15 * b.re);
        prop_assert!(b.re > 0.0 && b.re < a.re);
    }
}
