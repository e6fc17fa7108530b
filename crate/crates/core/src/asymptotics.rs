//! Decay exponents of `|psi(x, t)|^2` from density traces on log-spaced times.

use crate::error::{ensure_finite, Error, Result};
use crate::propagator::{evolve, evolve_time_derivative, Route};
use crate::quadrature::QuadratureConfig;
use crate::states::WavePacket;
use crate::units::UnitSystem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Log-spaced times `t_min ... t_max`, both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    values: Vec<f64>,
}

impl TimeGrid {
    /// The number of points is `ceil(decades * points_per_decade) + 1`, so the
    /// actual density is at least the requested one. `t_min == t_max` gives a
    /// single-point grid.
    pub fn new(t_min: f64, t_max: f64, points_per_decade: usize) -> Result<Self> {
        ensure_finite("t_min", t_min)?;
        ensure_finite("t_max", t_max)?;
        if t_min <= 0.0 {
            return Err(Error::InvalidInput(format!("t_min must be positive, got {t_min}")));
        }
        if t_max < t_min {
            return Err(Error::InvalidInput(format!("t_max ({t_max}) must not be below t_min ({t_min})")));
        }
        if points_per_decade < 4 {
            return Err(Error::InvalidInput(format!(
                "points_per_decade must be >= 4, got {points_per_decade}"
            )));
        }
        let decades = (t_max / t_min).log10();
        let intervals = (decades * points_per_decade as f64 - 1e-9).ceil().max(0.0) as usize;
        let values = if intervals == 0 {
            vec![t_min]
        } else {
            let (l0, l1) = (t_min.ln(), t_max.ln());
            let step = (l1 - l0) / intervals as f64;
            let mut v: Vec<f64> = (0..=intervals).map(|i| (l0 + step * i as f64).exp()).collect();
            v[0] = t_min;
            v[intervals] = t_max;
            v
        };
        Ok(TimeGrid {
            t_min,
            t_max,
            points_per_decade,
            values,
        })
    }

    /// Default slope-plot grid: `[0.1, 1e6]` at 16 points per decade.
    pub fn figure1() -> Self {
        Self::new(0.1, 1e6, 16).expect("valid constants")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Uniform spacing in `ln t` (zero for a single point).
    pub fn log_step(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            (self.t_max / self.t_min).ln() / (self.values.len() - 1) as f64
        }
    }

    pub fn decades(&self) -> f64 {
        (self.t_max / self.t_min).log10()
    }
}

/// `|psi(x, t)|^2` sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub x: f64,
    pub grid: TimeGrid,
    pub density: Vec<f64>,
    pub route: Route,
}

impl DensityTrace {
    /// Evaluates the density at every grid time, in parallel.
    pub fn compute(
        state: &WavePacket,
        x: f64,
        grid: &TimeGrid,
        units: &UnitSystem,
        route: Route,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let density = grid
            .values()
            .par_iter()
            .map(|&t| evolve(state, x, t, units, route, cfg).map(|psi| psi.norm_sqr()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(DensityTrace {
            x,
            grid: grid.clone(),
            density,
            route,
        })
    }

    pub fn from_values(x: f64, grid: TimeGrid, density: Vec<f64>, route: Route) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} density values for {} grid points",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|d| d.is_nan() || *d < 0.0) {
            return Err(Error::InvalidInput("densities must be non-negative".into()));
        }
        Ok(DensityTrace { x, grid, density, route })
    }
}

/// Result of [`fit_exponent`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    /// `(ln t, d ln rho / d ln t)` over the whole trace.
    pub slope_curve: Vec<(f64, f64)>,
    pub asymptotic_exponent: f64,
    /// Fitted intercept: `ln rho ~ log_amplitude + exponent * ln t`.
    pub log_amplitude: f64,
    /// `(t_first, t_last)` of the points used in the fit.
    pub fit_window: (f64, f64),
    /// RMS deviation of `ln rho` from the fitted line.
    pub residual: f64,
}

fn log_density(trace: &DensityTrace) -> Result<Vec<f64>> {
    let bad: Vec<usize> = trace
        .density
        .iter()
        .enumerate()
        .filter(|(_, d)| !(**d > 0.0 && d.is_finite()))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::Degenerate { indices: bad });
    }
    Ok(trace.density.iter().map(|d| d.ln()).collect())
}

/// `d ln rho / d ln t` by finite differences on the uniform `ln t` grid:
/// fourth-order central stencils inside, fourth-order one-sided stencils at
/// the two outermost points of each end (lower order for very short traces).
pub fn log_derivative_curve(trace: &DensityTrace) -> Result<Vec<(f64, f64)>> {
    let f = log_density(trace)?;
    let n = f.len();
    if n < 2 {
        return Err(Error::InsufficientSpan("a slope needs at least two grid points".into()));
    }
    let h = trace.grid.log_step();
    let ln_t: Vec<f64> = trace.grid.values().iter().map(|t| t.ln()).collect();
    let d = |i: usize| -> f64 {
        if n >= 5 {
            let c = |j: usize| f[j];
            if i >= 2 && i + 2 < n {
                (c(i - 2) - 8.0 * c(i - 1) + 8.0 * c(i + 1) - c(i + 2)) / (12.0 * h)
            } else if i == 0 {
                (-25.0 * c(0) + 48.0 * c(1) - 36.0 * c(2) + 16.0 * c(3) - 3.0 * c(4)) / (12.0 * h)
            } else if i == 1 {
                (-3.0 * c(0) - 10.0 * c(1) + 18.0 * c(2) - 6.0 * c(3) + c(4)) / (12.0 * h)
            } else if i == n - 1 {
                (25.0 * c(n - 1) - 48.0 * c(n - 2) + 36.0 * c(n - 3) - 16.0 * c(n - 4) + 3.0 * c(n - 5)) / (12.0 * h)
            } else {
                (3.0 * c(n - 1) + 10.0 * c(n - 2) - 18.0 * c(n - 3) + 6.0 * c(n - 4) - c(n - 5)) / (12.0 * h)
            }
        } else if n >= 3 {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        } else {
            (f[1] - f[0]) / h
        }
    };
    Ok((0..n).map(|i| (ln_t[i], d(i))).collect())
}

/// Least-squares slope of `ln rho` against `ln t` over the last
/// `window_decades` decades of the trace.
pub fn fit_exponent(trace: &DensityTrace, window_decades: f64) -> Result<ExponentEstimate> {
    ensure_finite("window_decades", window_decades)?;
    if window_decades <= 0.0 {
        return Err(Error::InvalidInput(format!("window_decades must be positive, got {window_decades}")));
    }
    let span = trace.grid.decades();
    if span + 1e-9 < window_decades + 1.0 {
        return Err(Error::InsufficientSpan(format!(
            "trace spans {span:.3} decades, the fit needs {:.3}",
            window_decades + 1.0
        )));
    }
    let slope_curve = log_derivative_curve(trace)?;
    let f = log_density(trace)?;
    let start = trace.grid.t_max.ln() - window_decades * std::f64::consts::LN_10 - 1e-9;
    let first = trace.grid.values().iter().position(|t| t.ln() >= start).unwrap_or(0);
    let times = &trace.grid.values()[first..];
    let points: Vec<(f64, f64)> = times.iter().zip(&f[first..]).map(|(t, y)| (t.ln(), *y)).collect();
    if points.len() < 2 {
        return Err(Error::InsufficientSpan("fewer than two points in the fit window".into()));
    }
    let (slope, intercept, residual) = least_squares(&points);
    Ok(ExponentEstimate {
        slope_curve,
        asymptotic_exponent: slope,
        log_amplitude: intercept,
        fit_window: (times[0], times[times.len() - 1]),
        residual,
    })
}

/// `(slope, intercept, rms residual)` of a straight-line fit, centred for
/// numerical stability.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// `d ln |psi(x,t)|^2 / d ln t = 2t Re(psi_t / psi)`, with `psi_t` computed
/// analytically by the chosen route rather than by differencing.
pub fn log_derivative_at(
    state: &WavePacket,
    x: f64,
    t: f64,
    units: &UnitSystem,
    route: Route,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let psi = evolve(state, x, t, units, route, cfg)?;
    if psi.norm() == 0.0 {
        return Err(Error::Degenerate { indices: vec![0] });
    }
    let psi_t = evolve_time_derivative(state, x, t, units, route, cfg)?;
    Ok(2.0 * t * (psi_t / psi).re)
}

/// [`log_derivative_at`] over a grid, in parallel.
pub fn analytic_log_derivative_curve(
    state: &WavePacket,
    x: f64,
    grid: &TimeGrid,
    units: &UnitSystem,
    route: Route,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    grid.values()
        .par_iter()
        .map(|&t| log_derivative_at(state, x, t, units, route, cfg).map(|d| (t.ln(), d)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(grid: &TimeGrid, c: f64, n: f64) -> DensityTrace {
        let density = grid.values().iter().map(|t| c * t.powf(n)).collect();
        DensityTrace::from_values(0.0, grid.clone(), density, Route::ClosedForm).unwrap()
    }

    #[test]
    fn grid_is_log_uniform() {
        let g = TimeGrid::new(0.1, 1e6, 16).unwrap();
        assert_eq!(g.len(), 7 * 16 + 1);
        let v = g.values();
        let r = v[1] / v[0];
        for w in v.windows(2) {
            assert!((w[1] / w[0] / r - 1.0).abs() < 1e-12);
        }
        assert_eq!(TimeGrid::new(5.0, 5.0, 4).unwrap().values(), &[5.0]);
        assert!(TimeGrid::new(0.0, 1.0, 8).is_err());
        assert!(TimeGrid::new(2.0, 1.0, 8).is_err());
        assert!(TimeGrid::new(1.0, 10.0, 3).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let g = TimeGrid::new(1.0, 1e5, 8).unwrap();
        for (_, d) in log_derivative_curve(&power_law(&g, 2.5, -3.0)).unwrap() {
            assert!((d + 3.0).abs() < 1e-10);
        }
        let est = fit_exponent(&power_law(&g, 4.0, -1.0), 1.5).unwrap();
        assert!((est.asymptotic_exponent + 1.0).abs() < 1e-10);
        assert!(est.residual < 1e-10);
        assert!((est.log_amplitude - 4f64.ln()).abs() < 1e-9);
        assert!(est.fit_window.0 >= g.t_min && est.fit_window.1 <= g.t_max);
    }

    #[test]
    fn zero_density_is_degenerate() {
        let g = TimeGrid::new(1.0, 100.0, 4).unwrap();
        let mut d: Vec<f64> = g.values().iter().map(|t| 1.0 / t).collect();
        d[3] = 0.0;
        let tr = DensityTrace::from_values(0.0, g, d, Route::Quadrature).unwrap();
        assert_eq!(log_derivative_curve(&tr), Err(Error::Degenerate { indices: vec![3] }));
    }

    #[test]
    fn short_trace_is_rejected_by_the_fit() {
        let g = TimeGrid::new(1.0, 100.0, 8).unwrap();
        assert!(matches!(fit_exponent(&power_law(&g, 1.0, -2.0), 1.5), Err(Error::InsufficientSpan(_))));
    }

    #[test]
    fn short_stencils() {
        for pts in [2, 3, 4] {
            let g = TimeGrid::new(1.0, 10f64.powf((pts - 1) as f64 / 4.0), 4).unwrap();
            assert_eq!(g.len(), pts);
            for (_, d) in log_derivative_curve(&power_law(&g, 1.0, -2.0)).unwrap() {
                assert!((d + 2.0).abs() < 1e-12);
            }
        }
    }
}
