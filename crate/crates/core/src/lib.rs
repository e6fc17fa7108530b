//! Free-particle wave-packet evolution in one dimension: the Faddeeva
//! function, a catalogue of initial states, three evolution routes, long-time
//! decay exponents and dwell times.

pub mod asymptotics;
pub mod complexfn;
pub mod dwell;
pub mod error;
pub mod propagator;
pub mod quadrature;
pub mod states;
pub mod units;

pub use asymptotics::{fit_exponent, log_derivative_at, log_derivative_curve, DensityTrace, ExponentEstimate, TimeGrid};
pub use complexfn::{w, w_derivative, w_series, ComplexValue};
pub use dwell::{DwellReport, DwellValue, SpatialInterval};
pub use error::{Error, Result};
pub use propagator::{asymptotic_prediction, evolve, evolve_closed_form, evolve_quadrature, Route};
pub use quadrature::QuadratureConfig;
pub use states::{StateSpec, TaylorCoefficients, WavePacket};
pub use units::UnitSystem;
