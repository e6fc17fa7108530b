//! The Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and the complex
//! complementary error function.
//!
//! `w` is evaluated by region:
//!
//! | region (upper half-plane)  | method                                        |
//! |----------------------------|-----------------------------------------------|
//! | `|z| <= 0.5`               | Maclaurin series `sum (iz)^n / Gamma(n/2+1)`   |
//! | `0.5 < |z| < 8`            | pole-corrected trapezoidal rule on the real axis |
//! | `|z| >= 8`                 | Laplace continued fraction                    |
//!
//! The lower half-plane is reached through `w(-z) = 2 exp(-z^2) - w(z)`, which
//! overflows once `Re(-z^2)` exceeds the `f64` exponent range. Inside the upper
//! half-plane `w(-conj(z)) = conj(w(z))` is used so that only `Re z >= 0` is
//! ever computed directly.

mod dd;

use crate::error::{ensure_finite_complex, Error, Result};
use dd::{CDd, Dd};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_2_SQRT_PI, PI};

/// The scalar type used throughout the crate.
pub type ComplexValue = Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

const SERIES_RADIUS: f64 = 0.5;
const CONTINUED_FRACTION_RADIUS: f64 = 8.0;
// Deep enough for 1e-15 at |z| = 8; the approximant's real poles stay inside
// |x| < sqrt(2 * depth + 1) < 8.
const CONTINUED_FRACTION_DEPTH: usize = 20;
const TRAPEZOID_STEP: f64 = 0.45;
// exp(-u^2) < 1e-35 beyond this node.
const TRAPEZOID_REACH: f64 = 9.0;
// ln(f64::MAX) with a little headroom for the factor 2.
const MAX_EXPONENT: f64 = 709.0;

const FRAC_2_SQRT_PI_DD: Dd = Dd::new(FRAC_2_SQRT_PI, 1.533545961316588e-17);

/// Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.
///
/// Relative accuracy is about 1e-15 in the upper half-plane. In the lower
/// half-plane the reflection `2 exp(-z^2) - w(-z)` is used; it fails with
/// [`Error::Overflow`] when `exp(-z^2)` is not representable.
pub fn w(z: Complex64) -> Result<Complex64> {
    w_scaled(z, Complex64::new(0.0, 0.0))
}

/// `exp(log_scale) * w(z)`, with the scale folded into the reflection term so
/// that a large `exp(-z^2)` and a tiny prefactor do not overflow separately.
pub fn w_scaled(z: Complex64, log_scale: Complex64) -> Result<Complex64> {
    ensure_finite_complex("z", z)?;
    ensure_finite_complex("log_scale", log_scale)?;
    if z.im >= 0.0 {
        return Ok(apply_scale(log_scale, w_upper(z)));
    }
    let exponent = log_scale - z * z;
    if exponent.re > MAX_EXPONENT {
        return Err(Error::Overflow(format!(
            "2 exp(-z^2) is not representable for z = {z}"
        )));
    }
    Ok(2.0 * exponent.exp() - apply_scale(log_scale, w_upper(-z)))
}

/// Complementary error function of a complex argument,
/// `erfc(z) = exp(-z^2) w(iz)`.
pub fn erfc(z: Complex64) -> Result<Complex64> {
    w_scaled(I * z, -(z * z))
}

/// Partial sum of the Maclaurin series `sum_{n < n_terms} (iz)^n / Gamma(n/2 + 1)`.
///
/// Accumulated in double-double arithmetic, so the sum stays accurate well
/// beyond the radius where the terms start to cancel (use
/// [`series_terms_for`] to pick `n_terms`).
pub fn w_series(z: Complex64, n_terms: usize) -> Complex64 {
    if n_terms == 0 {
        return Complex64::new(0.0, 0.0);
    }
    // (iz)^2 = -z^2 = (y^2 - x^2) - 2ixy
    let (x, y) = (z.re, z.im);
    let step = CDd {
        re: Dd::square(y) + Dd::square(x).neg(),
        im: Dd::product(x, y).scale(-2.0),
    };
    let mut even = CDd {
        re: Dd::from_f64(1.0),
        im: Dd::ZERO,
    };
    // i z * 2/sqrt(pi) = (-y + ix) * 2/sqrt(pi)
    let mut odd = CDd {
        re: FRAC_2_SQRT_PI_DD.scale(-y),
        im: FRAC_2_SQRT_PI_DD.scale(x),
    };
    let mut sum = CDd::ZERO;
    for n in 0..n_terms {
        let k = (n / 2) as f64;
        if n.is_multiple_of(2) {
            sum = sum.add(even);
            // Gamma(k + 2) = (k + 1) Gamma(k + 1)
            even = even.mul(step).div_f64(k + 1.0);
        } else {
            sum = sum.add(odd);
            // Gamma(k + 5/2) = (k + 3/2) Gamma(k + 3/2)
            odd = odd.mul(step).div_f64(k + 1.5);
        }
    }
    sum.to_complex()
}

/// Number of Maclaurin terms after which `|z|^n / Gamma(n/2 + 1)` has dropped
/// below `1e-40` for `|z| <= radius`.
pub fn series_terms_for(radius: f64) -> usize {
    let ln_r = radius.max(1e-3).ln();
    let target = -40.0 * std::f64::consts::LN_10;
    // ln Gamma(n/2 + 1), advanced separately for even and odd n.
    let mut ln_gamma_even = 0.0; // ln Gamma(1)
    let mut ln_gamma_odd = (PI.sqrt() / 2.0).ln(); // ln Gamma(3/2)
    let mut n = 0usize;
    loop {
        let ln_gamma = if n.is_multiple_of(2) { ln_gamma_even } else { ln_gamma_odd };
        if n as f64 > 2.0 * radius * radius && n as f64 * ln_r - ln_gamma < target {
            return n.max(1);
        }
        let k = (n / 2) as f64;
        if n.is_multiple_of(2) {
            ln_gamma_even += (k + 1.0).ln();
        } else {
            ln_gamma_odd += (k + 1.5).ln();
        }
        n += 1;
    }
}

/// `w'(z) = -2 z w(z) + 2i/sqrt(pi)`.
pub fn w_derivative(z: Complex64) -> Result<Complex64> {
    let wz = w(z)?;
    Ok(-2.0 * z * wz + I * FRAC_2_SQRT_PI)
}

/// `w''(z) = (4 z^2 - 2) w(z) - 4iz/sqrt(pi)`, scaled by `exp(log_scale)`.
pub(crate) fn w_second_derivative_scaled(z: Complex64, log_scale: Complex64) -> Result<Complex64> {
    let wz = w_scaled(z, log_scale)?;
    let tail = apply_scale(log_scale, -2.0 * I * FRAC_2_SQRT_PI * z);
    Ok((4.0 * z * z - 2.0) * wz + tail)
}

/// `w'(z)` scaled by `exp(log_scale)`.
pub(crate) fn w_derivative_scaled(z: Complex64, log_scale: Complex64) -> Result<Complex64> {
    let wz = w_scaled(z, log_scale)?;
    Ok(-2.0 * z * wz + apply_scale(log_scale, I * FRAC_2_SQRT_PI))
}

fn apply_scale(log_scale: Complex64, v: Complex64) -> Complex64 {
    if log_scale.re.abs() < 600.0 {
        log_scale.exp() * v
    } else if v.re == 0.0 && v.im == 0.0 {
        v
    } else {
        (log_scale + v.ln()).exp()
    }
}

/// `w` for `Im z >= 0`.
fn w_upper(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        w_first_quadrant(Complex64::new(-z.re, z.im)).conj()
    } else {
        w_first_quadrant(z)
    }
}

fn w_first_quadrant(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        maclaurin(z)
    } else if r >= CONTINUED_FRACTION_RADIUS {
        continued_fraction(z)
    } else {
        corrected_trapezoid(z)
    }
}

fn maclaurin(z: Complex64) -> Complex64 {
    let iz = I * z;
    let step = iz * iz;
    let mut even = Complex64::new(1.0, 0.0);
    let mut odd = iz * FRAC_2_SQRT_PI;
    let mut sum = even + odd;
    for k in 1..18 {
        let k = k as f64;
        even = even * step / k;
        odd = odd * step / (k + 0.5);
        sum += even + odd;
    }
    sum
}

fn continued_fraction(z: Complex64) -> Complex64 {
    // w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))
    let mut t = z;
    for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        t = z - (k as f64 / 2.0) / t;
    }
    I * (0.5 * FRAC_2_SQRT_PI) / t
}

/// Trapezoidal rule for `(1/(i pi)) int exp(-u^2)/(u - z) du` with the pole
/// contribution restored. Two node sets are available, `u = nh` and
/// `u = (n + 1/2)h`; the one farther from `Re z` avoids the cancellation
/// between a near-singular node term and the pole correction.
fn corrected_trapezoid(z: Complex64) -> Complex64 {
    let h = TRAPEZOID_STEP;
    let frac = (z.re / h).fract();
    let (shift, sign) = if (0.25..=0.75).contains(&frac) {
        (0.0, 1.0)
    } else {
        (0.5 * h, -1.0)
    };
    let first = ((-TRAPEZOID_REACH - shift) / h).ceil() as i64;
    let last = ((TRAPEZOID_REACH - shift) / h).floor() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in first..=last {
        let u = n as f64 * h + shift;
        sum += (-u * u).exp() / (z - u);
    }
    let nodes = I * (h / PI) * sum;
    // 2 exp(-z^2) / (1 - sign exp(-2 pi i z / h)), written with q = exp(2 pi i z / h)
    // so that nothing overflows for large Im z.
    let phase = 2.0 * PI * I * z / h;
    let q = phase.exp();
    let pole = 2.0 * (phase - z * z).exp() / (q - sign);
    nodes + pole
}

/// Residuals of the analytic identities of `w` at one point, each normalised
/// by the magnitude of the largest term in the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub z: Complex64,
    /// `w(-z) = 2 exp(-z^2) - w(z)`
    pub reflection: f64,
    /// `w(conj z) = conj(w(-z))`
    pub conjugation: f64,
    /// `w'(z) = -2 z w(z) + 2i/sqrt(pi)` against a Cauchy-integral derivative.
    pub derivative: f64,
    /// Maclaurin partial sum against `w`.
    pub series: f64,
}

/// Evaluates the four identity residuals at `z`.
pub fn identity_residuals(z: Complex64) -> Result<IdentityResiduals> {
    let wz = w(z)?;
    let w_neg = w(-z)?;
    let gauss = 2.0 * (-(z * z)).exp();

    let reflection = (w_neg - (gauss - wz)).norm() / max3(w_neg.norm(), gauss.norm(), wz.norm());

    let w_conj = w(z.conj())?;
    let conjugation = (w_conj - w_neg.conj()).norm() / w_conj.norm().max(w_neg.norm());

    let analytic = w_derivative(z)?;
    let numeric = cauchy_derivative(z, 0.25, 64)?;
    let scale = max3(analytic.norm(), (2.0 * z * wz).norm(), FRAC_2_SQRT_PI);
    let derivative = (analytic - numeric).norm() / scale;

    let partial = w_series(z, series_terms_for(z.norm()));
    let series = (partial - wz).norm() / wz.norm().max((0.5 * gauss).norm());

    Ok(IdentityResiduals {
        z,
        reflection,
        conjugation,
        derivative,
        series,
    })
}

/// `w'(z)` from the trapezoidal rule applied to the Cauchy integral on a
/// circle of radius `radius` around `z`. Exponentially convergent because `w`
/// is entire.
pub fn cauchy_derivative(z: Complex64, radius: f64, nodes: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let theta = 2.0 * PI * k as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, theta);
        acc += w(z + radius * e)? * e.conj();
    }
    Ok(acc / (nodes as f64 * radius))
}

fn max3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).max(c)
}
