//! Dense linear-algebra helpers shared by the targets and the forward models.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Fails unless `m` is square and symmetric to `tol` relative to its largest entry.
pub fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > tol * scale {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

pub fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or(Error::Factorization("Cholesky: matrix not positive definite"))
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = cholesky(m)?.inverse();
    Ok(symmetrize(&inv))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Rank-`k` operator stored as `U diag(s) Vᵀ` with orthonormal columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct LowRankOperator {
    u: DMatrix<f64>,
    s: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl LowRankOperator {
    pub fn new(u: DMatrix<f64>, s: DVector<f64>, v_t: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: u.ncols(),
            });
        }
        if v_t.nrows() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: v_t.nrows(),
            });
        }
        Ok(Self { u, s, v_t })
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v_t.ncols()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn v_t(&self) -> &DMatrix<f64> {
        &self.v_t
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let z = (&self.v_t * x).component_mul(&self.s);
        &self.u * z
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.s[j];
        }
        us * &self.v_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_check() {
        let mut m = DMatrix::identity(3, 3);
        assert!(check_symmetric(&m, 1e-12).is_ok());
        m[(2, 0)] = 1e-6;
        assert!(check_symmetric(&m, 1e-12).is_err());
        assert!(check_symmetric(&DMatrix::zeros(2, 3), 1e-12).is_err());
    }

    #[test]
    fn low_rank_apply_matches_dense() {
        let u = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let s = DVector::from_vec(vec![2.0, 0.5]);
        let v_t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let op = LowRankOperator::new(u, s, v_t).unwrap();
        let x = DVector::from_vec(vec![3.0, -1.0]);
        assert_eq!(op.apply(&x), op.to_dense() * &x);
        assert_eq!(op.apply(&x), DVector::from_vec(vec![-2.0, 1.5, 0.0]));
    }
}
