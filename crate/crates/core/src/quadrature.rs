//! Globally adaptive 21-point Gauss-Kronrod quadrature for complex-valued
//! integrands on finite intervals.

// Nodes and weights are kept as tabulated.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation of real-axis momentum integrals, in units of the state's
    /// momentum spread.
    pub momentum_cutoff_sigmas: f64,
}

impl QuadratureConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        momentum_cutoff_sigmas: f64,
    ) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must lie in (0, 1e-3], got {rel_tol}"
            )));
        }
        if !(abs_tol >= 0.0) {
            return Err(Error::InvalidInput(format!("abs_tol must be >= 0, got {abs_tol}")));
        }
        if max_subdivisions < 10 {
            return Err(Error::InvalidInput(format!(
                "max_subdivisions must be >= 10, got {max_subdivisions}"
            )));
        }
        if !(momentum_cutoff_sigmas > 0.0) {
            return Err(Error::InvalidInput(
                "momentum_cutoff_sigmas must be positive".into(),
            ));
        }
        Ok(QuadratureConfig {
            rel_tol,
            abs_tol,
            max_subdivisions,
            momentum_cutoff_sigmas,
        })
    }

    /// Tolerances used when two routes are compared against each other.
    pub fn cross_check() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, self.abs_tol, self.max_subdivisions, self.momentum_cutoff_sigmas)
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_subdivisions: 4000,
            momentum_cutoff_sigmas: 12.0,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

// Kronrod abscissae and weights for the 10/21 point pair (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        asc += ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm()) * WGK[j];
    }
    let value = kronrod * half;
    let magnitude = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).norm();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if magnitude > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * magnitude);
    }
    Segment {
        a,
        b,
        value,
        error,
        magnitude,
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, using the
/// interior breakpoints as the initial partition.
pub fn integrate<F>(f: F, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<QuadEstimate>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput("need at least two breakpoints".into()));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("breakpoints must be finite".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for pair in breakpoints.windows(2) {
        if pair[1] != pair[0] {
            heap.push(gauss_kronrod(&f, pair[0], pair[1]));
            evaluations += 21;
        }
    }
    let fold = |heap: &BinaryHeap<Segment>| {
        heap.iter().fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.magnitude)
        })
    };
    let (mut value, mut error, mut magnitude) = fold(&heap);
    loop {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonConvergence {
                what: "quadrature".into(),
                estimate: value,
                error_bound: f64::INFINITY,
            });
        }
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        let roundoff = 1e3 * f64::EPSILON * magnitude;
        if error <= tolerance || error <= roundoff || heap.is_empty() {
            // Re-sum exactly; the running totals drift slightly.
            let (value, error, _) = fold(&heap);
            return Ok(QuadEstimate {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if heap.len() >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                what: "quadrature".into(),
                estimate: value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("non-empty");
        value -= worst.value;
        error -= worst.error;
        magnitude -= worst.magnitude;
        let mid = 0.5 * (worst.a + worst.b);
        let pieces = if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // The interval can no longer be split; keep its estimate.
            vec![Segment { error: 0.0, ..worst }]
        } else {
            evaluations += 42;
            vec![gauss_kronrod(&f, worst.a, mid), gauss_kronrod(&f, mid, worst.b)]
        };
        for seg in pieces {
            value += seg.value;
            error += seg.error;
            magnitude += seg.magnitude;
            heap.push(seg);
        }
        error = error.max(0.0);
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let est = integrate(|x| Complex64::new(f(x), 0.0), breakpoints, cfg)?;
    Ok((est.value.re, est.abs_error))
}

/// `int_a^inf f(x) dx` through `x = a + scale * u / (1 - u)`.
pub fn integrate_to_infinity<F>(f: F, a: f64, scale: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let x = a + scale * u / one_minus;
        let v = f(x) * scale / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let breaks: Vec<f64> = (0..=16).map(|k| 1.0 - 0.5f64.powi(k)).chain([1.0]).collect();
    integrate_real(g, &breaks, cfg)
}

/// `int_-inf^b f(x) dx`.
pub fn integrate_from_neg_infinity<F>(f: F, b: f64, scale: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    integrate_to_infinity(|x| f(2.0 * b - x), b, scale, cfg)
}

/// Breakpoints `[start, start + scale * 2^k ...]` reaching `end`, a convenient
/// initial partition for integrands concentrated near `start`.
pub fn geometric_breakpoints(start: f64, end: f64, first_step: f64) -> Vec<f64> {
    let mut pts = vec![start];
    let span = end - start;
    let mut step = first_step.abs().min(span.abs()).max(span.abs() * 1e-12);
    while step < span.abs() {
        pts.push(start + step * span.signum());
        step *= 2.0;
    }
    pts.push(end);
    pts
}
