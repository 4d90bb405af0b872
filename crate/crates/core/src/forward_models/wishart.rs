use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{seeded, ChainRng};

/// Wishart distribution with identity scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartSpec {
    pub dim: usize,
    pub dof: usize,
    pub seed: u64,
}

impl WishartSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.dof < self.dim {
            return Err(Error::config("dof", format!("must be at least dim = {}", self.dim)));
        }
        Ok(())
    }
}

/// Draws `B Bᵀ` where `B` is the Bartlett factor: lower triangular, with
/// `sqrt(χ²(dof - i))` on the (0-based) diagonal and standard normals below it.
pub fn sample_wishart_with<R: Rng + ?Sized>(dim: usize, dof: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    WishartSpec { dim, dof, seed: 0 }.validate()?;
    let mut b = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let chi = ChiSquared::new((dof - i) as f64).map_err(|_| Error::config("dof", "invalid chi-square"))?;
        b[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            b[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(&b * b.transpose())
}

/// Positive-definite precision matrix drawn from the Wishart distribution.
pub fn sample_wishart_precision(spec: &WishartSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let mut rng: ChainRng = seeded(spec.seed);
    sample_wishart_with(spec.dim, spec.dof, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky;

    #[test]
    fn scalar_case_is_chi_square() {
        let mut rng = seeded(1);
        let n = 100_000;
        let dof = 7;
        let mean = (0..n).map(|_| sample_wishart_with(1, dof, &mut rng).unwrap()[(0, 0)]).sum::<f64>() / n as f64;
        assert!((mean / dof as f64 - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn draws_are_positive_definite() {
        for seed in 0..10 {
            let a = sample_wishart_precision(&WishartSpec { dim: 30, dof: 30, seed }).unwrap();
            assert!(cholesky(&a).is_ok());
            assert!((&a - a.transpose()).amax() < 1e-12 * a.amax());
        }
    }

    #[test]
    fn entrywise_mean_is_dof_identity() {
        let mut rng = seeded(2);
        let n = 10_000;
        let mut acc = DMatrix::zeros(5, 5);
        for _ in 0..n {
            acc += sample_wishart_with(5, 50, &mut rng).unwrap();
        }
        let mean = acc / n as f64;
        for i in 0..5 {
            assert!((mean[(i, i)] / 50.0 - 1.0).abs() < 0.05, "{}", mean[(i, i)]);
            for j in 0..5 {
                if i != j {
                    // off-diagonal mean is 0; 5% of the diagonal scale
                    assert!(mean[(i, j)].abs() < 0.05 * 50.0, "{}", mean[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn dof_below_dim_rejected() {
        assert!(sample_wishart_precision(&WishartSpec { dim: 5, dof: 4, seed: 0 }).is_err());
    }
}
