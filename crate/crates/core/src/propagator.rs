//! Free evolution `psi(x, t) = h^{-1/2} int dp exp(ipx/hbar - ip^2 t/(2m hbar)) <p|psi(0)>`.
//!
//! Three routes: closed forms through `w`, numerical quadrature of the
//! momentum integral, and the leading steepest-descent term at `x = 0`.
//!
//! The quadrature route writes each amplitude term as
//! `p^n exp(-A p^2 + g p)` (with `A = quad + it/(2m hbar)`, `g = lin + ix/hbar`)
//! and integrates along steepest-descent paths of that exponent: from the
//! endpoint `p = 0` for half-line amplitudes, through the saddle
//! `k* = g/(2A)` when the deformation picks it up. Along those paths the
//! integrand is non-oscillatory, so Gauss-Kronrod converges quickly at any `t`.

use crate::complexfn::{w_derivative_scaled, w_scaled, w_second_derivative_scaled};
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{geometric_breakpoints, integrate, QuadratureConfig};
use crate::states::{ExpQuadTerm, Support, WavePacket};
use crate::units::UnitSystem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gaussian paths are cut at `exp(-GAUSS_REACH^2)`.
const GAUSS_REACH: f64 = 14.0;
/// Endpoint paths run over `exp(-sigma)`, `sigma <= EXP_REACH`.
const EXP_REACH: f64 = 90.0;
/// Below this `|E*|` the saddle sits close to the endpoint and a straight ray
/// from the origin is used.
const NEAR_SADDLE: f64 = 1.0;
/// Tightest tolerance requested when terms cancel.
const FLOOR_TOL: f64 = 1e-14;

/// How `psi(x, t)` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    Quadrature,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::ClosedForm => "closed_form",
            Route::Quadrature => "quadrature",
        }
    }
}

/// One retained term of the small-`p` expansion at `x = 0`:
/// `h^{-1/2} c_n f^{n+1} int_0^inf u^n exp(-u^2) du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteepestDescentTerm {
    /// `(1 - i) sqrt(m hbar/t)`
    pub f: Complex64,
    pub order: u32,
    /// `Gamma((n + 1)/2) / 2`
    pub moment: f64,
    pub amplitude: Complex64,
}

/// `(m/(iht))^{1/2} exp(im(x - x')^2/(2 hbar t))`, principal branch.
pub fn propagator_kernel(x: f64, x_prime: f64, t: f64, units: &UnitSystem) -> Result<Complex64> {
    ensure_finite("x", x)?;
    ensure_finite("x_prime", x_prime)?;
    ensure_finite("t", t)?;
    if t <= 0.0 {
        return Err(Error::Domain(format!("the free propagator needs t > 0, got {t}")));
    }
    let m = units.mass();
    let prefactor = (Complex64::new(m, 0.0) / (I * units.h() * t)).sqrt();
    let d = x - x_prime;
    Ok(prefactor * Complex64::from_polar(1.0, m * d * d / (2.0 * units.hbar() * t)))
}

/// `psi(x, t)` by the selected route.
pub fn evolve(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    route: Route,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    match route {
        Route::ClosedForm => evolve_closed_form(state, x, t, units),
        Route::Quadrature => evolve_quadrature(state, x, t, units, cfg),
    }
}

/// `d psi/dt` by the selected route.
pub fn evolve_time_derivative(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    route: Route,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    match route {
        Route::ClosedForm => closed_form_time_derivative(state, x, t, units),
        Route::Quadrature => quadrature_time_derivative(state, x, t, units, cfg),
    }
}

// ---------------------------------------------------------------------------
// Quadrature route

/// `psi(x, t)` from the momentum integral along steepest-descent paths.
///
/// Works for either sign of `t`; `t = 0` gives the initial wavefunction.
pub fn evolve_quadrature(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)?;
    contour_sum(state, state.exp_quad_terms(units), x, t, units, cfg)
}

/// `d psi/dt = h^{-1/2} int dp (-ip^2/(2m hbar)) exp(...) <p|psi(0)>`.
fn quadrature_time_derivative(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)?;
    let factor = (-I / (2.0 * units.mass() * units.hbar())).ln();
    let terms = state
        .exp_quad_terms(units)
        .into_iter()
        .map(|term| ExpQuadTerm {
            log_coef: term.log_coef + factor,
            power: term.power + 2,
            ..term
        })
        .collect();
    contour_sum(state, terms, x, t, units, cfg)
}

fn contour_sum(
    state: &WavePacket,
    terms: Vec<ExpQuadTerm>,
    x: f64,
    t: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let hbar = units.hbar();
    let kinetic = t / (2.0 * units.mass() * hbar);
    let support = state.support();
    let mut pieces = Vec::new();
    for term in terms {
        let a = Complex64::new(term.quad, kinetic);
        let g = term.lin + I * (x / hbar);
        if term.suppression > 0.0 {
            // The suppressed form avoids cancellation between the two plain
            // terms, but is only safe while both saddles stay near p = 0.
            let a2 = a + term.suppression;
            let near = saddle_value(a, g).norm() < NEAR_SADDLE && saddle_value(a2, g).norm() < NEAR_SADDLE;
            if !near {
                for plain in term.split() {
                    pieces.extend(term_paths(&plain, a + (plain.quad - term.quad), g, support)?);
                }
                continue;
            }
        }
        pieces.extend(term_paths(&term, a, g, support)?);
    }

    let scale = units.h().sqrt().recip();
    let evaluate = |cfg: &QuadratureConfig| -> Result<(Complex64, f64, f64)> {
        let mut value = ZERO;
        let mut error = 0.0;
        let mut magnitude = 0.0;
        for piece in &pieces {
            let (v, e) = piece.integrate(cfg)?;
            value += v;
            error += e;
            magnitude += v.norm();
        }
        Ok((value * scale, error * scale, magnitude * scale))
    };

    let (mut value, mut error, magnitude) = evaluate(cfg)?;
    if error > cfg.rel_tol * value.norm() && magnitude > value.norm() {
        // The pieces cancel; ask each for proportionally more accuracy.
        let tighter = (cfg.rel_tol * value.norm() / magnitude).max(FLOOR_TOL);
        if tighter < cfg.rel_tol {
            let refined = evaluate(&cfg.with_rel_tol(tighter)?)?;
            value = refined.0;
            error = refined.1;
        }
    }
    if error > cfg.rel_tol * value.norm() && error > 1e3 * f64::EPSILON * magnitude {
        return Err(Error::NonConvergence {
            what: "momentum integral".into(),
            estimate: value,
            error_bound: error,
        });
    }
    Ok(value)
}

fn saddle_value(a: Complex64, g: Complex64) -> Complex64 {
    if a == ZERO {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    g * g / (4.0 * a)
}

/// A parametrised piece of integration path `k(s)`, `s` in `[lo, hi]`, with
/// integrand `exp(log_coef + offset(s)) * amplitude(k(s)) * k'(s)`.
struct PathPiece {
    term: ExpQuadTerm,
    a: Complex64,
    g: Complex64,
    kind: PathKind,
}

enum PathKind {
    /// `int_0^inf p^n exp(g p) dp = n! / (-g)^{n+1}`, for `A = 0`.
    Laplace,
    /// `k = s/sqrt(A)` for `s >= 0`.
    RayFromOrigin,
    /// `k = k* + s/sqrt(A)`, `s` over the whole line or `s >= 0`.
    SaddleLine { full: bool },
    /// `k = tau k*`, `tau` in `[0, 1]`.
    SegmentToSaddle,
    /// `-A k^2 + g k = -sigma`, leaving `k = 0`.
    EndpointDescent,
}

fn term_paths(term: &ExpQuadTerm, a: Complex64, g: Complex64, support: Support) -> Result<Vec<PathPiece>> {
    let piece = |kind| PathPiece {
        term: *term,
        a,
        g,
        kind,
    };
    if support == Support::AllMomenta {
        if a.re <= 0.0 {
            return Err(Error::Domain("full-line amplitude needs Gaussian decay".into()));
        }
        return Ok(vec![piece(PathKind::SaddleLine { full: true })]);
    }
    if a == ZERO {
        if g.re >= 0.0 {
            return Err(Error::Domain("amplitude does not decay along the momentum axis".into()));
        }
        return Ok(vec![piece(PathKind::Laplace)]);
    }
    let e_star = saddle_value(a, g);
    if e_star.norm() < NEAR_SADDLE {
        return Ok(vec![piece(PathKind::RayFromOrigin)]);
    }
    if e_star.re >= 0.0 || e_star.im.abs() >= 0.5 * e_star.norm() {
        let k_star = g / (2.0 * a);
        // The endpoint path ends in the valley along +-1/sqrt(A); in the wrong
        // one the whole saddle line is needed to return.
        let ending = -k_star * e_star.inv().sqrt() * a.sqrt();
        let mut out = vec![piece(PathKind::EndpointDescent)];
        if ending.re < 0.0 {
            out.push(piece(PathKind::SaddleLine { full: true }));
        }
        return Ok(out);
    }
    Ok(vec![
        piece(PathKind::SegmentToSaddle),
        piece(PathKind::SaddleLine { full: false }),
    ])
}

impl PathPiece {
    fn amplitude(&self, k: Complex64) -> Complex64 {
        let mut v = k.powu(self.term.power);
        if self.term.suppression > 0.0 {
            v *= -exp_m1(-self.term.suppression * k * k);
        }
        v
    }

    fn integrate(&self, cfg: &QuadratureConfig) -> Result<(Complex64, f64)> {
        let (a, g) = (self.a, self.g);
        let sqrt_a = a.sqrt();
        let inv_sqrt_a = sqrt_a.inv();
        let k_star = g / (2.0 * a);
        let e_star = g * g / (4.0 * a);
        let (offset, est) = match self.kind {
            PathKind::Laplace => {
                let n = self.term.power;
                let factorial: f64 = (1..=n).map(f64::from).product();
                let v = factorial / (-g).powu(n + 1);
                return Ok((self.scaled(ZERO, v), 0.0));
            }
            PathKind::RayFromOrigin => {
                let b = g * inv_sqrt_a;
                let f = |s: f64| {
                    let k = s * inv_sqrt_a;
                    self.amplitude(k) * (b * s - s * s).exp() * inv_sqrt_a
                };
                (ZERO, integrate(f, &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, GAUSS_REACH], cfg)?)
            }
            PathKind::SaddleLine { full } => {
                let f = |s: f64| {
                    let k = k_star + s * inv_sqrt_a;
                    self.amplitude(k) * (-s * s) .exp() * inv_sqrt_a
                };
                let half = [0.0, 1.0, 2.0, 4.0, 8.0, GAUSS_REACH];
                let breaks: Vec<f64> = if full {
                    half.iter().rev().map(|s| -s).chain(half[1..].iter().copied()).collect()
                } else {
                    half.to_vec()
                };
                (e_star, integrate(f, &breaks, cfg)?)
            }
            PathKind::SegmentToSaddle => {
                let f = |tau: f64| {
                    let k = tau * k_star;
                    self.amplitude(k) * (e_star * (2.0 * tau - tau * tau)).exp() * k_star
                };
                let breaks = geometric_breakpoints(0.0, 1.0, 0.1 / e_star.norm());
                (ZERO, integrate(f, &breaks, cfg)?)
            }
            PathKind::EndpointDescent => {
                let f = |sigma: f64| {
                    let ratio = sigma / e_star;
                    let root = (1.0 + ratio).sqrt();
                    let k = -k_star * ratio / (1.0 + root);
                    let dk = -(2.0 * a * k_star * root).inv();
                    self.amplitude(k) * (-sigma).exp() * dk
                };
                let breaks = geometric_breakpoints(0.0, EXP_REACH, 0.05);
                (ZERO, integrate(f, &breaks, cfg)?)
            }
        };
        let scale = (self.term.log_coef + offset).exp();
        Ok((scale * est.value, scale.norm() * est.abs_error))
    }

    fn scaled(&self, offset: Complex64, v: Complex64) -> Complex64 {
        (self.term.log_coef + offset).exp() * v
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn exp_m1(z: Complex64) -> Complex64 {
    let half_sin = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// Independent real-axis quadrature of the momentum integral, cut at
/// `cfg.momentum_cutoff_sigmas` and partitioned at the kernel's
/// stationary-phase scale `sqrt(2 pi m hbar/|t|)`. Slow for large `|t|`; kept
/// as a reference for the contour route.
pub fn evolve_real_axis(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)?;
    let hbar = units.hbar();
    let (lo, hi) = state.momentum_window(cfg.momentum_cutoff_sigmas, units);
    let mut step = (hi - lo) / 16.0;
    if t != 0.0 {
        step = step.min((2.0 * PI * units.mass() * hbar / t.abs()).sqrt());
    }
    let pieces = (((hi - lo) / step).ceil() as usize).clamp(1, cfg.max_subdivisions / 2);
    let mut breaks: Vec<f64> = (0..=pieces).map(|j| lo + (hi - lo) * j as f64 / pieces as f64).collect();
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
    }
    let kinetic = t / (2.0 * units.mass() * hbar);
    let f = |p: f64| {
        let phase = p * x / hbar - kinetic * p * p;
        state.momentum_amplitude(p, units) * Complex64::from_polar(1.0, phase)
    };
    let est = integrate(f, &breaks, cfg)?;
    Ok(est.value / units.h().sqrt())
}

// ---------------------------------------------------------------------------
// Closed forms

struct TruncatedParts {
    /// `C h^{1/2}/(4 sqrt(pi))`
    prefactor: f64,
    log_scale: Complex64,
    /// `(A, zeta)` for the plain and the suppressed term.
    parts: [(Complex64, Complex64); 2],
}

#[allow(clippy::too_many_arguments)]
fn truncated_parts(alpha: f64, delta: f64, p0: f64, x0: f64, norm: f64, x: f64, t: f64, units: &UnitSystem) -> TruncatedParts {
    let hbar = units.hbar();
    let k0 = p0 / hbar;
    let a = Complex64::new(delta * delta, hbar * t / (2.0 * units.mass()));
    let g = Complex64::new(2.0 * k0 * delta * delta, x - x0);
    let zeta = |a: Complex64| -I * g / (2.0 * a.sqrt());
    let a2 = a + alpha;
    TruncatedParts {
        prefactor: norm * units.h().sqrt() / (4.0 * PI.sqrt()),
        log_scale: Complex64::new(-k0 * k0 * delta * delta, 0.0),
        parts: [(a, zeta(a)), (a2, zeta(a2))],
    }
}

struct GaussianParts {
    /// `C' h^{1/2}/(2 sqrt(pi))`
    prefactor: f64,
    a: Complex64,
    g: Complex64,
    log_scale: Complex64,
}

fn gaussian_parts(delta: f64, p0: f64, x0: f64, norm: f64, x: f64, t: f64, units: &UnitSystem) -> GaussianParts {
    let hbar = units.hbar();
    let k0 = p0 / hbar;
    GaussianParts {
        prefactor: norm * units.h().sqrt() / (2.0 * PI.sqrt()),
        a: Complex64::new(delta * delta, hbar * t / (2.0 * units.mass())),
        g: Complex64::new(2.0 * k0 * delta * delta, x - x0),
        log_scale: Complex64::new(-k0 * k0 * delta * delta, 0.0),
    }
}

struct LinearParts {
    /// `h^{-1/2} norm/(2A)` with `A = 1/(2 beta) + it/(2m hbar)`.
    prefactor: Complex64,
    /// `1/(2 hbar sqrt(A))`
    kappa: Complex64,
    xi: Complex64,
}

fn linear_parts(beta: f64, norm: f64, x: f64, t: f64, units: &UnitSystem) -> LinearParts {
    let hbar = units.hbar();
    let a = Complex64::new(1.0 / (2.0 * beta), t / (2.0 * units.mass() * hbar));
    let kappa = (2.0 * hbar * a.sqrt()).inv();
    LinearParts {
        prefactor: norm / (units.h().sqrt() * 2.0 * a),
        kappa,
        xi: x * kappa,
    }
}

fn check_closed_form_args(x: f64, t: f64) -> Result<()> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)
}

fn unsupported(state: &WavePacket, operation: &'static str) -> Error {
    Error::Unsupported {
        operation,
        variant: state.name(),
    }
}

/// `psi(x, t)` in closed form for the truncated Gaussian, the Gaussian and the
/// linear-Gaussian state. All square roots are principal; `Re A > 0` keeps them
/// off the branch cut. Negative `t` (backward evolution) is allowed.
pub fn evolve_closed_form(state: &WavePacket, x: f64, t: f64, units: &UnitSystem) -> Result<Complex64> {
    closed_form_with(state, x, t, units, w_scaled)
}

/// [`evolve_closed_form`] with every `w(z)` replaced by `2 exp(-z^2) - w(-z)`.
/// Mathematically identical; exposed so the identity can be checked on the
/// physical values.
pub fn evolve_closed_form_reflected(state: &WavePacket, x: f64, t: f64, units: &UnitSystem) -> Result<Complex64> {
    closed_form_with(state, x, t, units, |z, log_scale| {
        Ok(2.0 * (log_scale - z * z).exp() - w_scaled(-z, log_scale)?)
    })
}

fn closed_form_with<W>(state: &WavePacket, x: f64, t: f64, units: &UnitSystem, w_fn: W) -> Result<Complex64>
where
    W: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    check_closed_form_args(x, t)?;
    match *state {
        WavePacket::TruncatedGaussian {
            alpha,
            delta,
            p0,
            x0,
            norm,
        } => {
            let tp = truncated_parts(alpha, delta, p0, x0, norm, x, t, units);
            let [(a1, z1), (a2, z2)] = tp.parts;
            let first = w_fn(z1, tp.log_scale)? / a1.sqrt();
            let second = w_fn(z2, tp.log_scale)? / a2.sqrt();
            Ok(tp.prefactor * (first - second))
        }
        WavePacket::Gaussian { delta, p0, x0, norm } => {
            let gp = gaussian_parts(delta, p0, x0, norm, x, t, units);
            Ok(gp.prefactor * (gp.g * gp.g / (4.0 * gp.a) + gp.log_scale).exp() / gp.a.sqrt())
        }
        WavePacket::LinearGaussian { beta, norm } => {
            let lp = linear_parts(beta, norm, x, t, units);
            let wxi = w_fn(lp.xi, ZERO)?;
            Ok(lp.prefactor * (1.0 + I * PI.sqrt() * lp.xi * wxi))
        }
        _ => Err(unsupported(state, "evolve_closed_form")),
    }
}

/// `d psi/dt = (i hbar/2m) d^2 psi/dx^2`, the `x`-derivatives taken analytically.
fn closed_form_time_derivative(state: &WavePacket, x: f64, t: f64, units: &UnitSystem) -> Result<Complex64> {
    check_closed_form_args(x, t)?;
    let diffusion = I * units.hbar() / (2.0 * units.mass());
    let psi_xx = match *state {
        WavePacket::TruncatedGaussian {
            alpha,
            delta,
            p0,
            x0,
            norm,
        } => {
            let tp = truncated_parts(alpha, delta, p0, x0, norm, x, t, units);
            let mut acc = ZERO;
            for (sign, (a, z)) in [(1.0, tp.parts[0]), (-1.0, tp.parts[1])] {
                // d zeta/dx = 1/(2 sqrt(A))
                acc += sign * w_second_derivative_scaled(z, tp.log_scale)? / (4.0 * a * a.sqrt());
            }
            tp.prefactor * acc
        }
        WavePacket::Gaussian { delta, p0, x0, norm } => {
            let psi = evolve_closed_form(state, x, t, units)?;
            let gp = gaussian_parts(delta, p0, x0, norm, x, t, units);
            psi * (-(gp.g * gp.g) / (4.0 * gp.a * gp.a) - 1.0 / (2.0 * gp.a))
        }
        WavePacket::LinearGaussian { beta, norm } => {
            let lp = linear_parts(beta, norm, x, t, units);
            let w1 = w_derivative_scaled(lp.xi, ZERO)?;
            let w2 = w_second_derivative_scaled(lp.xi, ZERO)?;
            lp.prefactor * I * PI.sqrt() * lp.kappa * lp.kappa * (2.0 * w1 + lp.xi * w2)
        }
        _ => return Err(unsupported(state, "evolve_closed_form")),
    };
    Ok(diffusion * psi_xx)
}

// ---------------------------------------------------------------------------
// Steepest-descent predictor

/// `int_0^inf u^n exp(-u^2) du = Gamma((n + 1)/2) / 2`.
pub fn gaussian_moment(n: u32) -> f64 {
    // Gamma at integers and half-integers by the recurrence.
    let mut x = if n.is_multiple_of(2) { 0.5 } else { 1.0 };
    let mut gamma = if n.is_multiple_of(2) { PI.sqrt() } else { 1.0 };
    let target = (n as f64 + 1.0) / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    gamma / 2.0
}

/// The two retained terms `c1 p` and `c2 p^2` after the substitution
/// `p = f u`, `f = (1 - i) sqrt(m hbar/t)`.
pub fn steepest_descent_terms(c1: Complex64, c2: Complex64, t: f64, units: &UnitSystem) -> Result<[SteepestDescentTerm; 2]> {
    ensure_finite("t", t)?;
    if t <= 0.0 {
        return Err(Error::Domain(format!("the asymptotic predictor needs t > 0, got {t}")));
    }
    let f = Complex64::new(1.0, -1.0) * (units.mass() * units.hbar() / t).sqrt();
    let inv_sqrt_h = units.h().sqrt().recip();
    let term = |c: Complex64, order: u32| {
        let moment = gaussian_moment(order);
        SteepestDescentTerm {
            f,
            order,
            moment,
            amplitude: inv_sqrt_h * c * f.powu(order + 1) * moment,
        }
    };
    Ok([term(c1, 1), term(c2, 2)])
}

/// Leading long-time approximation of `psi(0, t)` from the Taylor
/// coefficients of the momentum amplitude at `p = 0+`.
pub fn asymptotic_prediction(c1: Complex64, c2: Complex64, t: f64, units: &UnitSystem) -> Result<Complex64> {
    let [first, second] = steepest_descent_terms(c1, c2, t, units)?;
    Ok(first.amplitude + second.amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> UnitSystem {
        UnitSystem::atomic()
    }

    #[test]
    fn kernel_modulus_and_phase() {
        let units = UnitSystem::new(1.3, 0.7).unwrap();
        let k = propagator_kernel(0.4, -1.1, 2.5, &units).unwrap();
        assert!((k.norm_sqr() - 0.7 / (units.h() * 2.5)).abs() < 1e-15);
        let k0 = propagator_kernel(0.0, 0.0, 1.0, &u()).unwrap();
        let expected = Complex64::from_polar((1.0 / u().h()).sqrt(), -PI / 4.0);
        assert!((k0 - expected).norm() < 1e-15);
        assert!(matches!(propagator_kernel(0.0, 0.0, 0.0, &u()), Err(Error::Domain(_))));
    }

    #[test]
    fn moments() {
        assert!((gaussian_moment(0) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gaussian_moment(1) - 0.5).abs() < 1e-15);
        assert!((gaussian_moment(2) - PI.sqrt() / 4.0).abs() < 1e-15);
        assert!((gaussian_moment(3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn f_lies_on_the_minus_quarter_diagonal() {
        let [t1, _] = steepest_descent_terms(Complex64::new(1.0, 0.0), ZERO, 7.0, &u()).unwrap();
        assert!((t1.f.arg() + PI / 4.0).abs() < 1e-15);
        assert!((t1.f.norm_sqr() - 2.0 / 7.0).abs() < 1e-15);
        assert!(asymptotic_prediction(ZERO, ZERO, -1.0, &u()).is_err());
    }

    #[test]
    fn laplace_path_at_time_zero() {
        // Lorentzian squared at t = 0 has A = 0 exactly.
        let s = WavePacket::lorentzian_squared(1.0).unwrap();
        let q = evolve_quadrature(&s, 0.3, 0.0, &u(), &QuadratureConfig::cross_check()).unwrap();
        let exact = s.position_wavefunction_initial(0.3, &u()).unwrap();
        assert!((q - exact).norm() < 1e-13 * exact.norm());
    }

    #[test]
    fn complex_exp_m1_matches_direct_formula() {
        for z in [Complex64::new(0.3, -0.2), Complex64::new(-2.0, 1.5), Complex64::new(1e-9, 2e-9)] {
            let direct = z.exp() - 1.0;
            assert!((exp_m1(z) - direct).norm() <= 1e-15 * (1.0 + direct.norm()));
        }
        let tiny = Complex64::new(1e-12, -3e-12);
        assert!((exp_m1(tiny) - tiny).norm() < 1e-23);
    }

    #[test]
    fn closed_form_rejects_other_variants() {
        let s = WavePacket::lorentzian_squared(1.0).unwrap();
        assert!(matches!(evolve_closed_form(&s, 0.0, 1.0, &u()), Err(Error::Unsupported { .. })));
    }
}
