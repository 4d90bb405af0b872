use std::ops::Deref;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A point in parameter space: non-empty, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidState("dimension must be at least 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!("entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Position and momentum of the extended Hamiltonian system.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub position: DVector<f64>,
    pub momentum: DVector<f64>,
}

impl PhasePoint {
    pub fn new(position: DVector<f64>, momentum: DVector<f64>) -> Result<Self> {
        if position.len() != momentum.len() {
            return Err(Error::DimensionMismatch {
                expected: position.len(),
                found: momentum.len(),
            });
        }
        Ok(Self { position, momentum })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }
}

/// Kinetic energy for an identity mass matrix, `ξᵀξ/2`.
pub fn kinetic_energy(momentum: &DVector<f64>) -> f64 {
    0.5 * momentum.norm_squared()
}

/// Step size, trajectory length, chain length, burn-in fraction and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub epsilon: f64,
    pub n_leapfrog: usize,
    pub n_steps: usize,
    pub burn_in_frac: f64,
    pub seed: u64,
}

impl KernelConfig {
    pub const DEFAULT_BURN_IN: f64 = 0.25;

    pub fn new(epsilon: f64, n_leapfrog: usize, n_steps: usize, seed: u64) -> Result<Self> {
        let config = Self {
            epsilon,
            n_leapfrog,
            n_steps,
            burn_in_frac: Self::DEFAULT_BURN_IN,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_burn_in(mut self, burn_in_frac: f64) -> Result<Self> {
        self.burn_in_frac = burn_in_frac;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be positive and finite"));
        }
        if self.n_leapfrog == 0 {
            return Err(Error::config("n_leapfrog", "must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::config("n_steps", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in_frac) {
            return Err(Error::config("burn_in_frac", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_vector_invariants() {
        assert!(StateVector::from_slice(&[]).is_err());
        assert!(StateVector::from_slice(&[1.0, f64::NAN]).is_err());
        assert!(StateVector::from_slice(&[1.0, f64::INFINITY]).is_err());
        assert_eq!(StateVector::from_slice(&[1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn phase_point_lengths_must_agree() {
        assert!(PhasePoint::new(DVector::zeros(2), DVector::zeros(3)).is_err());
    }

    #[test]
    fn kinetic_energy_is_even_and_nonnegative() {
        let p = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(kinetic_energy(&p), 2.625);
        assert_eq!(kinetic_energy(&p), kinetic_energy(&-&p));
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::new(0.1, 10, 100, 0).is_ok());
        assert!(KernelConfig::new(0.0, 10, 100, 0).is_err());
        assert!(KernelConfig::new(-1.0, 10, 100, 0).is_err());
        assert!(KernelConfig::new(0.1, 0, 100, 0).is_err());
        assert!(KernelConfig::new(0.1, 1, 0, 0).is_err());
        let c = KernelConfig::new(0.1, 1, 1, 0).unwrap();
        assert!(c.clone().with_burn_in(1.0).is_err());
        assert!(c.clone().with_burn_in(-0.1).is_err());
        assert_eq!(c.with_burn_in(0.0).unwrap().burn_in_frac, 0.0);
    }
}
