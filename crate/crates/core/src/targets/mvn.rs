use nalgebra::{DMatrix, DVector};

use super::{GradientLogDensity, LogDensity};
use crate::error::{Error, Result};
use crate::linalg;

/// Zero-mean Gaussian given by its precision matrix, log p(x) = -xᵀAx/2.
#[derive(Debug, Clone)]
pub struct MvnTarget {
    precision: DMatrix<f64>,
}

impl MvnTarget {
    pub fn new(precision: DMatrix<f64>) -> Result<Self> {
        linalg::check_symmetric(&precision, 1e-12)?;
        linalg::cholesky(&precision)?;
        Ok(Self { precision })
    }

    /// Builds the target from a covariance matrix by inverting it once.
    pub fn from_covariance(covariance: &DMatrix<f64>) -> Result<Self> {
        linalg::check_symmetric(covariance, 1e-12)?;
        let precision = linalg::spd_inverse(covariance)?;
        Self::new(precision)
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
}

impl LogDensity for MvnTarget {
    fn dim(&self) -> usize {
        self.precision.nrows()
    }

    fn log_density(&self, x: &DVector<f64>) -> f64 {
        -0.5 * x.dot(&(&self.precision * x))
    }
}

impl GradientLogDensity for MvnTarget {
    fn log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let ax = &self.precision * x;
        (-0.5 * x.dot(&ax), -ax)
    }
}

/// Returns `(-xᵀAx/2, -Ax)`.
pub fn mvn_log_density_and_grad(
    x: &DVector<f64>,
    precision: &DMatrix<f64>,
) -> Result<(f64, DVector<f64>)> {
    if precision.nrows() != precision.ncols() {
        return Err(Error::DimensionMismatch {
            expected: precision.nrows(),
            found: precision.ncols(),
        });
    }
    if x.len() != precision.nrows() {
        return Err(Error::DimensionMismatch {
            expected: precision.nrows(),
            found: x.len(),
        });
    }
    let ax = precision * x;
    Ok((-0.5 * x.dot(&ax), -ax))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng::seeded;
    use crate::targets::gradient_check;

    fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = seeded(seed);
        let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(dim, dim)
    }

    #[test]
    fn identity_precision_values() {
        let a = DMatrix::identity(2, 2);
        let (v, g) = mvn_log_density_and_grad(&DVector::zeros(2), &a).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, DVector::zeros(2));
        let (v, g) = mvn_log_density_and_grad(&DVector::from_vec(vec![3.0, 4.0]), &a).unwrap();
        assert_eq!(v, -12.5);
        assert_eq!(g, DVector::from_vec(vec![-3.0, -4.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let a = DMatrix::identity(2, 2);
        assert!(mvn_log_density_and_grad(&DVector::zeros(3), &a).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let target = MvnTarget::new(random_spd(5, 3)).unwrap();
        let mut rng = seeded(11);
        for _ in 0..20 {
            let x = DVector::from_fn(5, |_, _| rng.random_range(-2.0..2.0));
            assert!(gradient_check(&target, &x, 1e-5) < 1e-6);
        }
    }

    #[test]
    fn log_density_is_even() {
        let target = MvnTarget::new(random_spd(6, 5)).unwrap();
        let mut rng = seeded(12);
        for _ in 0..20 {
            let x = DVector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
            assert_eq!(target.log_density(&x), target.log_density(&-&x));
        }
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = 0.5;
        assert!(matches!(MvnTarget::new(a), Err(Error::NotSymmetric(_))));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(MvnTarget::new(b), Err(Error::Factorization(_))));
    }
}
