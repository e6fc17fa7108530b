use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reduced Planck constant and particle mass. Atomic units (`hbar = m = 1`)
/// are the default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    hbar: f64,
    mass: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        Ok(UnitSystem { hbar, mass })
    }

    pub fn atomic() -> Self {
        UnitSystem { hbar: 1.0, mass: 1.0 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Planck's constant, `2 pi hbar`.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::atomic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planck_constant_is_derived() {
        let u = UnitSystem::new(0.5, 3.0).unwrap();
        assert_eq!(u.h(), 2.0 * PI * 0.5);
        assert_eq!(UnitSystem::default(), UnitSystem::atomic());
    }

    #[test]
    fn rejects_non_positive_constants() {
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0).is_err());
        assert!(UnitSystem::new(f64::NAN, 1.0).is_err());
    }
}
