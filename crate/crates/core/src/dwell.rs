//! Dwell times `tau = int dt P_ab(t)`, by direct time integration, by the
//! momentum representation of the sojourn operator, and classically.
//!
//! For free motion the time integral collapses onto the energy shell:
//! `tau = sum_{s=+-} int dp (m h/|p|) <psi|p><p|D|sp><sp|psi>`. The `|p|^{-1}`
//! makes `tau` infinite unless the amplitude vanishes at `p = 0`.

use crate::asymptotics::least_squares;
use crate::error::{ensure_finite, Error, Result};
use crate::propagator::{evolve, Route};
use crate::quadrature::{
    geometric_breakpoints, integrate, integrate_from_neg_infinity, integrate_real, integrate_to_infinity,
    QuadratureConfig,
};
use crate::states::{Support, WavePacket};
use crate::units::UnitSystem;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Tail exponents at or above this are treated as a divergent `int t^n dt`.
pub const DIVERGENCE_THRESHOLD: f64 = -1.1;
/// Maximum initial probability allowed inside or beyond the interval for the
/// classical formula.
pub const CLASSICAL_OVERLAP: f64 = 1e-3;
/// Slope stabilisation required before the power-law tail is used.
const SLOPE_STABILITY: f64 = 0.01;
const MAX_DOUBLINGS: usize = 80;

/// The closed interval `[a, b]`, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialInterval {
    a: f64,
    b: f64,
}

impl SpatialInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        if a >= b {
            return Err(Error::InvalidInput(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(SpatialInterval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// A dwell time, or the verdict that it is infinite. Serialises as a number
/// or as the string `"divergent"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DwellValue {
    Finite(f64),
    Divergent,
}

impl DwellValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            DwellValue::Finite(v) => Some(*v),
            DwellValue::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, DwellValue::Divergent)
    }
}

impl Serialize for DwellValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DwellValue::Finite(v) => s.serialize_f64(*v),
            DwellValue::Divergent => s.serialize_str("divergent"),
        }
    }
}

impl<'de> Deserialize<'de> for DwellValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(DwellValue::Finite(v)),
            Raw::Text(t) if t == "divergent" => Ok(DwellValue::Divergent),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"divergent\", got {t:?}"))),
        }
    }
}

/// Outcome of the time-integral route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegralDwell {
    pub value: DwellValue,
    /// Fitted power of `P_ab(t)` beyond the cutoff, for `t -> +inf` and `t -> -inf`.
    pub tail_exponents: (f64, f64),
    /// Cutoffs `T*` used on each side.
    pub cutoffs: (f64, f64),
}

/// All dwell-time estimates for one state and interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellReport {
    pub time_route: DwellValue,
    pub momentum_route: DwellValue,
    /// Absent when the classical formula does not apply.
    pub classical_value: Option<DwellValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_note: Option<String>,
    /// The larger of the two fitted tail exponents.
    pub tail_exponent_used: f64,
    /// `|time - momentum| / momentum` when both are finite.
    pub relative_discrepancy: Option<f64>,
}

/// `psi(x, t)` by the closed form where one exists, else by quadrature.
fn psi(state: &WavePacket, x: f64, t: f64, units: &UnitSystem, cfg: &QuadratureConfig) -> Result<Complex64> {
    let route = match state {
        WavePacket::TruncatedGaussian { .. } | WavePacket::Gaussian { .. } | WavePacket::LinearGaussian { .. } => {
            Route::ClosedForm
        }
        _ => Route::Quadrature,
    };
    evolve(state, x, t, units, route, cfg)
}

/// `P_ab(t) = int_a^b |psi(x, t)|^2 dx`.
pub fn prob_in_interval(
    state: &WavePacket,
    interval: &SpatialInterval,
    t: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    ensure_finite("t", t)?;
    let (a, b) = (interval.a, interval.b);
    let breaks: Vec<f64> = (0..=4).map(|j| a + (b - a) * j as f64 / 4.0).collect();
    let err = std::cell::Cell::new(None);
    let density = |x: f64| match psi(state, x, t, units, cfg) {
        Ok(v) => v.norm_sqr(),
        Err(e) => {
            err.set(Some(e));
            0.0
        }
    };
    let (value, _) = integrate_real(density, &breaks, cfg)?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(value)
}

/// `<p|D(a,b)|p'> = (1/h) int_a^b exp(i(p' - p)x/hbar) dx`.
pub fn projector_matrix_element(interval: &SpatialInterval, p: f64, p_prime: f64, units: &UnitSystem) -> Complex64 {
    let q = (p_prime - p) / units.hbar();
    let half = 0.5 * interval.width();
    let sinc = if (q * half).abs() < 1e-8 {
        1.0 - (q * half).powi(2) / 6.0
    } else {
        (q * half).sin() / (q * half)
    };
    Complex64::from_polar(interval.width() / units.h() * sinc, q * interval.centre())
}

/// The sojourn integral has a `|p|^{-1}` singularity unless the amplitude
/// vanishes at `p = 0`.
fn amplitude_vanishes_at_origin(state: &WavePacket, units: &UnitSystem) -> bool {
    state.momentum_amplitude(0.0, units).norm() == 0.0 && state.momentum_amplitude(-0.0, units).norm() == 0.0
}

fn momentum_breakpoints(state: &WavePacket, cfg: &QuadratureConfig, units: &UnitSystem) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = state.momentum_window(cfg.momentum_cutoff_sigmas.max(14.0), units);
    let step = 1e-3 * state.momentum_scale(units);
    let positive = if hi > 0.0 {
        geometric_breakpoints(0.0, hi, step)
    } else {
        Vec::new()
    };
    let negative = if lo < 0.0 {
        geometric_breakpoints(0.0, lo, step)
    } else {
        Vec::new()
    };
    (positive, negative)
}

/// `int_{p>0} dp m (b - a) |<p|psi>|^2 / p` (and the mirror for `p < 0`).
fn flux_weighted_integral(
    state: &WavePacket,
    interval: &SpatialInterval,
    breaks: &[f64],
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let m = units.mass();
    let f = |p: f64| {
        if p == 0.0 {
            0.0
        } else {
            m * interval.width() * state.momentum_amplitude(p, units).norm_sqr() / p.abs()
        }
    };
    let (v, _) = integrate_real(f, breaks, cfg)?;
    Ok(v.abs())
}

/// `sum_{s=+-} int dp (m h/|p|) <psi|p><p|D|sp><sp|psi>`.
pub fn dwell_time_momentum_form(
    state: &WavePacket,
    interval: &SpatialInterval,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<DwellValue> {
    if !amplitude_vanishes_at_origin(state, units) {
        return Ok(DwellValue::Divergent);
    }
    let (positive, negative) = momentum_breakpoints(state, cfg, units);
    // s = +: <p|D|p> = (b - a)/h.
    let mut total = flux_weighted_integral(state, interval, &positive, units, cfg)?
        + flux_weighted_integral(state, interval, &negative, units, cfg)?;
    // s = -: zero unless the amplitude has both signs of momentum.
    if state.support() == Support::AllMomenta {
        let mh = units.mass() * units.h();
        let cross = |p: f64| {
            if p == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            mh / p.abs()
                * state.momentum_amplitude(p, units).conj()
                * projector_matrix_element(interval, p, -p, units)
                * state.momentum_amplitude(-p, units)
        };
        let mut value = Complex64::new(0.0, 0.0);
        for breaks in [&positive, &negative] {
            if breaks.len() >= 2 {
                let est = integrate(cross, breaks, cfg)?;
                value += if breaks[1] < breaks[0] { -est.value } else { est.value };
            }
        }
        if value.im.abs() > 1e-10 * (total + value.re.abs()).max(1e-300) {
            return Err(Error::NonConvergence {
                what: "cross term of the momentum form".into(),
                estimate: value,
                error_bound: value.im.abs(),
            });
        }
        total += value.re;
    }
    Ok(DwellValue::Finite(total))
}

/// One side of the time integral: `int_0^{+-inf} P_ab(t) dt`.
struct HalfLine {
    value: DwellValue,
    exponent: f64,
    cutoff: f64,
}

fn time_scale(state: &WavePacket, interval: &SpatialInterval, units: &UnitSystem) -> (f64, f64) {
    let v = state.momentum_scale(units) / units.mass();
    let t0 = state.length_scale(units).max(interval.width()) / v;
    let travel = ((interval.centre() - state.initial_position()).abs() + state.length_scale(units)) / v;
    (t0, 4.0 * (t0 + travel))
}

fn half_line(
    state: &WavePacket,
    interval: &SpatialInterval,
    direction: f64,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<HalfLine> {
    let (t0, t_min) = time_scale(state, interval, units);
    let p = |t: f64| prob_in_interval(state, interval, direction * t, units, cfg);

    // Double T until the log-log slope of P has settled.
    let mut times = vec![t0];
    let mut logs = vec![p(t0)?.max(f64::MIN_POSITIVE).ln()];
    let mut slopes: Vec<f64> = Vec::new();
    let mut stable = 0;
    let mut cutoff = None;
    for _ in 0..MAX_DOUBLINGS {
        let t = 2.0 * times[times.len() - 1];
        times.push(t);
        logs.push(p(t)?.max(f64::MIN_POSITIVE).ln());
        let n = logs.len();
        let slope = (logs[n - 1] - logs[n - 2]) / std::f64::consts::LN_2;
        if let Some(prev) = slopes.last() {
            if (slope - prev).abs() < SLOPE_STABILITY && slope < -0.5 {
                stable += 1;
            } else {
                stable = 0;
            }
        }
        slopes.push(slope);
        if stable >= 2 && t >= t_min {
            cutoff = Some(t);
            break;
        }
    }
    let cutoff = cutoff.ok_or_else(|| Error::NonConvergence {
        what: "tail slope of P_ab(t)".into(),
        estimate: Complex64::new(*slopes.last().unwrap_or(&f64::NAN), 0.0),
        error_bound: f64::INFINITY,
    })?;

    let n = logs.len();
    let fit: Vec<(f64, f64)> = (n - 3..n).map(|i| (times[i].ln(), logs[i])).collect();
    let (exponent, log_c, _) = least_squares(&fit);
    if exponent >= DIVERGENCE_THRESHOLD {
        return Ok(HalfLine {
            value: DwellValue::Divergent,
            exponent,
            cutoff,
        });
    }

    let mut breaks = vec![0.0];
    breaks.extend(times.iter().copied().filter(|t| *t <= cutoff));
    let (body, _) = integrate_real(|t| p(t).unwrap_or(f64::NAN), &breaks, cfg)?;
    if !body.is_finite() {
        // Re-run once to surface the underlying error.
        for t in &breaks {
            p(*t)?;
        }
        return Err(Error::NonConvergence {
            what: "time integral of P_ab".into(),
            estimate: Complex64::new(body, 0.0),
            error_bound: f64::INFINITY,
        });
    }
    // int_T^inf C t^n dt = -C T^{n+1}/(n + 1)
    let tail = -(log_c + (exponent + 1.0) * cutoff.ln()).exp() / (exponent + 1.0);
    Ok(HalfLine {
        value: DwellValue::Finite(body + tail),
        exponent,
        cutoff,
    })
}

/// `int_{-inf}^{inf} P_ab(t) dt`: adaptive quadrature out to a cutoff on each
/// side, where the local slope of `ln P` against `ln |t|` has stabilised, plus
/// the fitted power-law tail beyond it.
pub fn dwell_time_time_integral_detailed(
    state: &WavePacket,
    interval: &SpatialInterval,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<TimeIntegralDwell> {
    let forward = half_line(state, interval, 1.0, units, cfg)?;
    let backward = half_line(state, interval, -1.0, units, cfg)?;
    let value = match (forward.value, backward.value) {
        (DwellValue::Finite(f), DwellValue::Finite(b)) => DwellValue::Finite(f + b),
        _ => DwellValue::Divergent,
    };
    Ok(TimeIntegralDwell {
        value,
        tail_exponents: (forward.exponent, backward.exponent),
        cutoffs: (forward.cutoff, backward.cutoff),
    })
}

/// See [`dwell_time_time_integral_detailed`].
pub fn dwell_time_time_integral(
    state: &WavePacket,
    interval: &SpatialInterval,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<DwellValue> {
    Ok(dwell_time_time_integral_detailed(state, interval, units, cfg)?.value)
}

/// Initial probabilities `(left of a, inside, right of b)`.
pub fn initial_masses(state: &WavePacket, interval: &SpatialInterval, units: &UnitSystem) -> Result<(f64, f64, f64)> {
    let cfg = QuadratureConfig::default();
    let err = std::cell::Cell::new(None);
    let density = |x: f64| match state.position_wavefunction_initial(x, units) {
        Ok(v) => v.norm_sqr(),
        Err(e) => {
            err.set(Some(e));
            0.0
        }
    };
    let scale = state.length_scale(units);
    let inside_breaks: Vec<f64> = (0..=8).map(|j| interval.a + interval.width() * j as f64 / 8.0).collect();
    let (inside, _) = integrate_real(density, &inside_breaks, &cfg)?;
    let (left, _) = integrate_from_neg_infinity(density, interval.a, scale, &cfg)?;
    let (right, _) = integrate_to_infinity(density, interval.b, scale, &cfg)?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok((left, inside, right))
}

/// `int dp |<p|psi>|^2 m (b - a)/|p|` over the momenta that carry the packet
/// through the interval. Requires the initial packet to lie entirely on one
/// side of the interval.
pub fn classical_dwell(state: &WavePacket, interval: &SpatialInterval, units: &UnitSystem) -> Result<DwellValue> {
    let (left, inside, right) = initial_masses(state, interval, units)?;
    let total = left + inside + right;
    let from_left = inside + right <= CLASSICAL_OVERLAP * total;
    let from_right = inside + left <= CLASSICAL_OVERLAP * total;
    if !from_left && !from_right {
        return Err(Error::Precondition(format!(
            "initial probability outside one side of the interval is {:.3e} (left {left:.3e}, inside {inside:.3e}, right {right:.3e})",
            (inside + right).min(inside + left) / total
        )));
    }
    if !amplitude_vanishes_at_origin(state, units) {
        return Ok(DwellValue::Divergent);
    }
    let cfg = QuadratureConfig::cross_check();
    let (positive, negative) = momentum_breakpoints(state, &cfg, units);
    let breaks = if from_left { positive } else { negative };
    Ok(DwellValue::Finite(flux_weighted_integral(state, interval, &breaks, units, &cfg)?))
}

/// Runs all three routes.
pub fn dwell_report(
    state: &WavePacket,
    interval: &SpatialInterval,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<DwellReport> {
    let time = dwell_time_time_integral_detailed(state, interval, units, cfg)?;
    let momentum = dwell_time_momentum_form(state, interval, units, cfg)?;
    let (classical_value, classical_note) = match classical_dwell(state, interval, units) {
        Ok(v) => (Some(v), None),
        Err(Error::Precondition(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    let relative_discrepancy = match (time.value, momentum) {
        (DwellValue::Finite(t), DwellValue::Finite(m)) => Some((t - m).abs() / m),
        _ => None,
    };
    Ok(DwellReport {
        time_route: time.value,
        momentum_route: momentum,
        classical_value,
        classical_note,
        tail_exponent_used: time.tail_exponents.0.max(time.tail_exponents.1),
        relative_discrepancy,
    })
}
