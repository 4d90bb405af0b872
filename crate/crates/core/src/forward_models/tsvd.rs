use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::LowRankOperator;

/// Full singular value decomposition, sorted by decreasing singular value, from
/// which rank-`k` truncations can be taken repeatedly.
#[derive(Debug, Clone)]
pub struct Tsvd {
    u: DMatrix<f64>,
    s: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl Tsvd {
    pub fn new(forward: &DMatrix<f64>) -> Result<Self> {
        let svd = forward
            .clone()
            .try_svd(true, true, f64::EPSILON, 0)
            .ok_or(Error::Factorization("SVD did not converge"))?;
        let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
            return Err(Error::Factorization("SVD factors missing"));
        };
        Ok(Self {
            u,
            s: svd.singular_values,
            v_t,
        })
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn max_rank(&self) -> usize {
        self.s.len()
    }

    pub fn truncate(&self, k: usize) -> Result<LowRankOperator> {
        if k == 0 || k > self.max_rank() {
            return Err(Error::RankOutOfRange {
                rank: k,
                max: self.max_rank(),
            });
        }
        LowRankOperator::new(
            self.u.columns(0, k).into_owned(),
            self.s.rows(0, k).into_owned(),
            self.v_t.rows(0, k).into_owned(),
        )
    }
}

/// Dense rank-`k` truncated SVD of `forward`.
pub fn tsvd_truncate(forward: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let max = forward.nrows().min(forward.ncols());
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { rank: k, max });
    }
    Ok(Tsvd::new(forward)?.truncate(k)?.to_dense())
}
