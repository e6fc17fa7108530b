//! Catalogue of initial wave packets, given by their momentum amplitudes
//! `<p|psi(0)>` with the convention `<x|p> = h^{-1/2} exp(ipx/hbar)`.
//!
//! Near `p = 0` a state that vanishes at the origin is expanded as
//! `<p|psi(0)> ~ c1 p + c2 p^2`. The coefficients are called `c1`, `c2` rather
//! than `a`, `b` because `a`, `b` already name the endpoints of a dwell
//! interval.
//!
//! | state               | behaviour at `p -> 0+`     | density decay at fixed `x` |
//! |---------------------|----------------------------|----------------------------|
//! | `Gaussian`          | nonzero                    | `t^-1`                     |
//! | `LinearGaussian`    | `c1 != 0`                  | `t^-2`                     |
//! | `LorentzianSquared` | `c1 != 0`                  | `t^-2`                     |
//! | `TruncatedGaussian` | `c1 = 0`, `c2 != 0`        | `t^-3`                     |

use crate::error::{ensure_finite, Error, Result};
use crate::propagator;
use crate::quadrature::{geometric_breakpoints, integrate_real, QuadratureConfig};
use crate::units::UnitSystem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// An initial state. Normalisation constants are resolved at construction,
/// for the `hbar` of the [`UnitSystem`] passed to the constructor; use the
/// same unit system for every later call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum WavePacket {
    /// `C (1 - exp(-alpha p^2/hbar^2)) exp(-delta^2 (p - p0)^2/hbar^2 - i p x0/hbar) Theta(p)`
    TruncatedGaussian {
        alpha: f64,
        delta: f64,
        p0: f64,
        x0: f64,
        norm: f64,
    },
    /// `C' exp(-delta^2 (p - p0)^2/hbar^2 - i p x0/hbar)`, not truncated.
    Gaussian { delta: f64, p0: f64, x0: f64, norm: f64 },
    /// `psi(x, 0) = N / (x + i alpha)^2`, `N = sqrt(2 alpha^3/pi)`; in momentum
    /// space `-2 (alpha/hbar)^{3/2} p exp(-alpha p/hbar) Theta(p)`.
    LorentzianSquared { alpha: f64, norm: f64 },
    /// `2 / (pi^{1/4} beta^{3/4}) p exp(-p^2/(2 beta)) Theta(p)`
    LinearGaussian { beta: f64, norm: f64 },
    /// `(c1 p + c2 p^2) exp(-(p/cutoff)^2) Theta(p)`, deliberately left
    /// unnormalised so that `c1`, `c2` are its literal Taylor coefficients.
    TaylorStub {
        c1: Complex64,
        c2: Complex64,
        cutoff: f64,
    },
}

/// One-sided Taylor coefficients of `<p|psi(0)>` at `p = 0+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCoefficients {
    pub c1: Complex64,
    pub c2: Complex64,
}

/// Which part of the momentum axis carries the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Support {
    PositiveMomenta,
    AllMomenta,
}

/// `exp(log_coef) p^power (1 - exp(-suppression p^2)) exp(-quad p^2 + lin p)`,
/// the suppression factor being absent when `suppression == 0`. Every
/// catalogue amplitude is a short sum of such terms, which is what the contour
/// quadrature integrates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExpQuadTerm {
    pub(crate) log_coef: Complex64,
    pub(crate) power: u32,
    pub(crate) quad: f64,
    pub(crate) lin: Complex64,
    pub(crate) suppression: f64,
}

impl ExpQuadTerm {
    #[cfg(test)]
    pub(crate) fn eval(&self, p: f64) -> Complex64 {
        let exponent = self.log_coef - self.quad * p * p + self.lin * p;
        let mut v = exponent.exp() * p.powi(self.power as i32);
        if self.suppression > 0.0 {
            v *= -(-self.suppression * p * p).exp_m1();
        }
        v
    }

    /// Expands the suppression factor into two plain terms.
    pub(crate) fn split(&self) -> [ExpQuadTerm; 2] {
        let plain = ExpQuadTerm {
            suppression: 0.0,
            ..*self
        };
        let shifted = ExpQuadTerm {
            log_coef: self.log_coef + I * PI,
            quad: self.quad + self.suppression,
            suppression: 0.0,
            ..*self
        };
        [plain, shifted]
    }
}

fn log_of(c: f64) -> Complex64 {
    Complex64::new(c, 0.0).ln()
}

impl WavePacket {
    /// The truncated Gaussian with `C` found by quadrature.
    pub fn truncated_gaussian(alpha: f64, delta: f64, p0: f64, x0: f64, units: &UnitSystem) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("delta", delta), ("p0", p0), ("x0", x0)] {
            ensure_finite(name, v)?;
        }
        if alpha <= 0.0 {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        if delta <= 0.0 {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        let unnormalised = WavePacket::TruncatedGaussian {
            alpha,
            delta,
            p0,
            x0,
            norm: 1.0,
        };
        let norm = 1.0 / unnormalised.norm_squared_by_quadrature(units)?.sqrt();
        Ok(WavePacket::TruncatedGaussian {
            alpha,
            delta,
            p0,
            x0,
            norm,
        })
    }

    pub fn gaussian(delta: f64, p0: f64, x0: f64, units: &UnitSystem) -> Result<Self> {
        for (name, v) in [("delta", delta), ("p0", p0), ("x0", x0)] {
            ensure_finite(name, v)?;
        }
        if delta <= 0.0 {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        let hbar = units.hbar();
        let norm = (2.0 * delta * delta / (PI * hbar * hbar)).powf(0.25);
        Ok(WavePacket::Gaussian { delta, p0, x0, norm })
    }

    pub fn lorentzian_squared(alpha: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        if alpha <= 0.0 {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        Ok(WavePacket::LorentzianSquared {
            alpha,
            norm: (2.0 * alpha.powi(3) / PI).sqrt(),
        })
    }

    pub fn linear_gaussian(beta: f64) -> Result<Self> {
        ensure_finite("beta", beta)?;
        if beta <= 0.0 {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        Ok(WavePacket::LinearGaussian {
            beta,
            norm: 2.0 / (PI.powf(0.25) * beta.powf(0.75)),
        })
    }

    pub fn taylor_stub(c1: Complex64, c2: Complex64, cutoff: f64) -> Result<Self> {
        crate::error::ensure_finite_complex("c1", c1)?;
        crate::error::ensure_finite_complex("c2", c2)?;
        ensure_finite("cutoff", cutoff)?;
        if cutoff <= 0.0 {
            return Err(Error::InvalidInput(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(WavePacket::TaylorStub { c1, c2, cutoff })
    }

    /// Default parameters: `alpha = 0.5, delta = 1, p0 = 1, x0 = -10`.
    pub fn figure1_truncated(units: &UnitSystem) -> Result<Self> {
        Self::truncated_gaussian(0.5, 1.0, 1.0, -10.0, units)
    }

    /// The untruncated comparison Gaussian: `delta = 1, p0 = 1, x0 = -10`.
    pub fn figure1_gaussian(units: &UnitSystem) -> Result<Self> {
        Self::gaussian(1.0, 1.0, -10.0, units)
    }

    pub fn name(&self) -> &'static str {
        match self {
            WavePacket::TruncatedGaussian { .. } => "truncated_gaussian",
            WavePacket::Gaussian { .. } => "gaussian",
            WavePacket::LorentzianSquared { .. } => "lorentzian_squared",
            WavePacket::LinearGaussian { .. } => "linear_gaussian",
            WavePacket::TaylorStub { .. } => "taylor_stub",
        }
    }

    /// True when the amplitude vanishes identically for `p < 0`.
    pub fn is_truncated(&self) -> bool {
        self.support() == Support::PositiveMomenta
    }

    pub(crate) fn support(&self) -> Support {
        match self {
            WavePacket::Gaussian { .. } => Support::AllMomenta,
            _ => Support::PositiveMomenta,
        }
    }

    /// `<p|psi(0)>`.
    pub fn momentum_amplitude(&self, p: f64, units: &UnitSystem) -> Complex64 {
        let hbar = units.hbar();
        match *self {
            WavePacket::TruncatedGaussian {
                alpha,
                delta,
                p0,
                x0,
                norm,
            } => {
                if p < 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = p / hbar;
                let dk = (p - p0) / hbar;
                let envelope = -(-alpha * k * k).exp_m1() * (-delta * delta * dk * dk).exp();
                norm * envelope * (-I * k * x0).exp()
            }
            WavePacket::Gaussian { delta, p0, x0, norm } => {
                let dk = (p - p0) / hbar;
                norm * (-delta * delta * dk * dk).exp() * (-I * (p / hbar) * x0).exp()
            }
            WavePacket::LorentzianSquared { alpha, .. } => {
                if p < 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let a = alpha / hbar;
                Complex64::new(-2.0 * a.powf(1.5) * p * (-a * p).exp(), 0.0)
            }
            WavePacket::LinearGaussian { beta, norm } => {
                if p < 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(norm * p * (-p * p / (2.0 * beta)).exp(), 0.0)
            }
            WavePacket::TaylorStub { c1, c2, cutoff } => {
                if p < 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let s = p / cutoff;
                (c1 * p + c2 * p * p) * (-s * s).exp()
            }
        }
    }

    /// The amplitude written as a sum of [`ExpQuadTerm`]s.
    pub(crate) fn exp_quad_terms(&self, units: &UnitSystem) -> Vec<ExpQuadTerm> {
        let hbar = units.hbar();
        match *self {
            WavePacket::TruncatedGaussian {
                alpha,
                delta,
                p0,
                x0,
                norm,
            } => {
                let k0 = p0 / hbar;
                let log_c = log_of(norm) - delta * delta * k0 * k0;
                let lin = Complex64::new(2.0 * delta * delta * k0 / hbar, -x0 / hbar);
                let q = delta * delta / (hbar * hbar);
                vec![ExpQuadTerm {
                    log_coef: log_c,
                    power: 0,
                    quad: q,
                    lin,
                    suppression: alpha / (hbar * hbar),
                }]
            }
            WavePacket::Gaussian { delta, p0, x0, norm } => {
                let k0 = p0 / hbar;
                vec![ExpQuadTerm {
                    log_coef: log_of(norm) - delta * delta * k0 * k0,
                    power: 0,
                    quad: delta * delta / (hbar * hbar),
                    lin: Complex64::new(2.0 * delta * delta * k0 / hbar, -x0 / hbar),
                    suppression: 0.0,
                }]
            }
            WavePacket::LorentzianSquared { alpha, .. } => {
                let a = alpha / hbar;
                vec![ExpQuadTerm {
                    log_coef: log_of(-2.0 * a.powf(1.5)),
                    power: 1,
                    quad: 0.0,
                    lin: Complex64::new(-a, 0.0),
                    suppression: 0.0,
                }]
            }
            WavePacket::LinearGaussian { beta, norm } => vec![ExpQuadTerm {
                log_coef: log_of(norm),
                power: 1,
                quad: 1.0 / (2.0 * beta),
                lin: Complex64::new(0.0, 0.0),
                suppression: 0.0,
            }],
            WavePacket::TaylorStub { c1, c2, cutoff } => {
                let quad = 1.0 / (cutoff * cutoff);
                let zero = Complex64::new(0.0, 0.0);
                [(c1, 1), (c2, 2)]
                    .into_iter()
                    .filter(|(c, _)| *c != zero)
                    .map(|(c, power)| ExpQuadTerm {
                        log_coef: c.ln(),
                        power,
                        quad,
                        lin: zero,
                        suppression: 0.0,
                    })
                    .collect()
            }
        }
    }

    /// Characteristic momentum spread, used to size integration domains.
    pub fn momentum_scale(&self, units: &UnitSystem) -> f64 {
        let hbar = units.hbar();
        match *self {
            WavePacket::TruncatedGaussian { alpha, delta, .. } => (hbar / delta).min(hbar / alpha.sqrt()),
            WavePacket::Gaussian { delta, .. } => hbar / delta,
            WavePacket::LorentzianSquared { alpha, .. } => hbar / alpha,
            WavePacket::LinearGaussian { beta, .. } => beta.sqrt(),
            WavePacket::TaylorStub { cutoff, .. } => cutoff,
        }
    }

    /// Characteristic length of the initial packet.
    pub fn length_scale(&self, units: &UnitSystem) -> f64 {
        let hbar = units.hbar();
        match *self {
            WavePacket::TruncatedGaussian { alpha, delta, .. } => delta.max(alpha.sqrt()),
            WavePacket::Gaussian { delta, .. } => delta,
            WavePacket::LorentzianSquared { alpha, .. } => alpha,
            WavePacket::LinearGaussian { beta, .. } => hbar / beta.sqrt(),
            WavePacket::TaylorStub { cutoff, .. } => hbar / cutoff,
        }
    }

    /// Momentum interval outside which the amplitude is below
    /// `exp(-sigmas^2 / 2)` of its peak scale.
    pub fn momentum_window(&self, sigmas: f64, units: &UnitSystem) -> (f64, f64) {
        let hbar = units.hbar();
        match *self {
            WavePacket::TruncatedGaussian { delta, p0, .. } => {
                let spread = sigmas * hbar / delta;
                ((p0 - spread).max(0.0), (p0 + spread).max(spread))
            }
            WavePacket::Gaussian { delta, p0, .. } => {
                let spread = sigmas * hbar / delta;
                (p0 - spread, p0 + spread)
            }
            WavePacket::LorentzianSquared { alpha, .. } => (0.0, 0.5 * sigmas * sigmas * hbar / alpha),
            WavePacket::LinearGaussian { beta, .. } => (0.0, sigmas * beta.sqrt()),
            WavePacket::TaylorStub { cutoff, .. } => (0.0, sigmas * cutoff / 2f64.sqrt()),
        }
    }

    /// A nominal centre for the initial position density.
    pub fn initial_position(&self) -> f64 {
        match *self {
            WavePacket::TruncatedGaussian { x0, .. } | WavePacket::Gaussian { x0, .. } => x0,
            _ => 0.0,
        }
    }

    /// `int |<p|psi(0)>|^2 dp` by adaptive quadrature.
    pub fn norm_squared_by_quadrature(&self, units: &UnitSystem) -> Result<f64> {
        let cfg = QuadratureConfig::cross_check().with_rel_tol(1e-13)?;
        let (lo, hi) = self.momentum_window(cfg.momentum_cutoff_sigmas.max(14.0), units);
        let step = self.momentum_scale(units) * 1e-3;
        let mut total = 0.0;
        // Integrate outward from p = 0 where the Theta cut and the zero of the
        // amplitude sit, plus the bulk of the packet.
        let mut breaks = geometric_breakpoints(lo.max(0.0), hi.max(lo.max(0.0) + step), step);
        if lo < 0.0 {
            let mut neg = geometric_breakpoints(0.0, lo, step);
            neg.reverse();
            neg.pop();
            neg.extend(breaks);
            breaks = neg;
        }
        let (v, _) = integrate_real(|p| self.momentum_amplitude(p, units).norm_sqr(), &breaks, &cfg)?;
        total += v;
        Ok(total)
    }

    /// The constant that makes `int |<p|psi>|^2 dp = 1`.
    ///
    /// For `LorentzianSquared` this is the position-space `N = sqrt(2 alpha^3/pi)`;
    /// for `LinearGaussian` the momentum prefactor `2/(pi^{1/4} beta^{3/4})`.
    pub fn normalization_constant(&self) -> Result<f64> {
        match *self {
            WavePacket::TruncatedGaussian { norm, .. }
            | WavePacket::Gaussian { norm, .. }
            | WavePacket::LorentzianSquared { norm, .. }
            | WavePacket::LinearGaussian { norm, .. } => Ok(norm),
            WavePacket::TaylorStub { .. } => Err(Error::Unsupported {
                operation: "normalization_constant",
                variant: "taylor_stub",
            }),
        }
    }

    /// `c1 = d/dp <p|psi>` and `c2 = (1/2) d^2/dp^2 <p|psi>` at `p = 0+`.
    pub fn taylor_coefficients(&self, units: &UnitSystem) -> TaylorCoefficients {
        let hbar = units.hbar();
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            WavePacket::TruncatedGaussian {
                alpha, delta, p0, norm, ..
            } => {
                let k0 = p0 / hbar;
                TaylorCoefficients {
                    c1: zero,
                    c2: Complex64::new(norm * alpha / (hbar * hbar) * (-delta * delta * k0 * k0).exp(), 0.0),
                }
            }
            WavePacket::Gaussian { delta, p0, x0, norm } => {
                let k0 = p0 / hbar;
                let at_zero = norm * (-delta * delta * k0 * k0).exp();
                let slope = Complex64::new(2.0 * delta * delta * k0 / hbar, -x0 / hbar);
                let curvature = -2.0 * delta * delta / (hbar * hbar);
                TaylorCoefficients {
                    c1: at_zero * slope,
                    c2: 0.5 * at_zero * (slope * slope + curvature),
                }
            }
            WavePacket::LorentzianSquared { alpha, .. } => {
                let a = alpha / hbar;
                let c1 = -2.0 * a.powf(1.5);
                TaylorCoefficients {
                    c1: Complex64::new(c1, 0.0),
                    c2: Complex64::new(-c1 * a, 0.0),
                }
            }
            WavePacket::LinearGaussian { norm, .. } => TaylorCoefficients {
                c1: Complex64::new(norm, 0.0),
                c2: zero,
            },
            WavePacket::TaylorStub { c1, c2, .. } => TaylorCoefficients { c1, c2 },
        }
    }

    /// `psi(x, 0)`: closed form for `LorentzianSquared`, the `t = 0` closed
    /// form for the Gaussian family, and quadrature for `TaylorStub`.
    pub fn position_wavefunction_initial(&self, x: f64, units: &UnitSystem) -> Result<Complex64> {
        ensure_finite("x", x)?;
        match *self {
            WavePacket::LorentzianSquared { alpha, norm } => {
                let d = Complex64::new(x, alpha);
                Ok(norm / (d * d))
            }
            WavePacket::TaylorStub { .. } => {
                propagator::evolve_quadrature(self, x, 0.0, units, &QuadratureConfig::cross_check())
            }
            _ => propagator::evolve_closed_form(self, x, 0.0, units),
        }
    }
}

/// A state description as read from a config: `state=<name>` plus numeric
/// parameters. Missing parameters fall back to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl StateSpec {
    pub fn named(state: &str) -> Self {
        StateSpec {
            state: state.to_string(),
            alpha: None,
            delta: None,
            p0: None,
            x0: None,
            beta: None,
            c1: None,
            c2: None,
            cutoff: None,
        }
    }

    /// Parses either a JSON object or whitespace-separated `key=value` pairs,
    /// e.g. `state=truncated_gaussian alpha=0.5 delta=1 p0=1 x0=-10`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed)
                .map_err(|e| Error::InvalidInput(format!("state spec: {e}")));
        }
        let mut spec: Option<StateSpec> = None;
        let mut numbers = Vec::new();
        for token in trimmed.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got `{token}`")))?;
            if key == "state" {
                spec = Some(StateSpec::named(value));
            } else {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("field `{key}`: `{value}` is not a number")))?;
                numbers.push((key.to_string(), v));
            }
        }
        let mut spec = spec.ok_or_else(|| Error::InvalidInput("missing `state=` field".into()))?;
        for (key, v) in numbers {
            spec.set(&key, v)?;
        }
        Ok(spec)
    }

    pub fn set(&mut self, key: &str, v: f64) -> Result<()> {
        let slot = match key {
            "alpha" => &mut self.alpha,
            "delta" => &mut self.delta,
            "p0" => &mut self.p0,
            "x0" => &mut self.x0,
            "beta" => &mut self.beta,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "cutoff" => &mut self.cutoff,
            other => return Err(Error::InvalidInput(format!("unknown state field `{other}`"))),
        };
        *slot = Some(v);
        Ok(())
    }

    pub fn build(&self, units: &UnitSystem) -> Result<WavePacket> {
        let alpha = self.alpha.unwrap_or(0.5);
        let delta = self.delta.unwrap_or(1.0);
        let p0 = self.p0.unwrap_or(1.0);
        let x0 = self.x0.unwrap_or(-10.0);
        match self.state.as_str() {
            "truncated_gaussian" => WavePacket::truncated_gaussian(alpha, delta, p0, x0, units),
            "gaussian" => WavePacket::gaussian(delta, p0, x0, units),
            "lorentzian_squared" => WavePacket::lorentzian_squared(self.alpha.unwrap_or(1.0)),
            "linear_gaussian" => WavePacket::linear_gaussian(self.beta.unwrap_or(1.0)),
            "taylor_stub" => WavePacket::taylor_stub(
                Complex64::new(self.c1.unwrap_or(1.0), 0.0),
                Complex64::new(self.c2.unwrap_or(0.0), 0.0),
                self.cutoff.unwrap_or(1.0),
            ),
            other => Err(Error::InvalidInput(format!("unknown state `{other}`"))),
        }
    }
}
