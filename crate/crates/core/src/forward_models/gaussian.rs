use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Surrogate covariance `Σ_HF + (γ/d)·tr(Σ_HF)·I`.
pub fn build_lf_covariance(sigma_hf: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    linalg::check_symmetric(sigma_hf, 1e-12)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::config("gamma", "must be non-negative"));
    }
    let d = sigma_hf.nrows();
    let shift = gamma / d as f64 * sigma_hf.trace();
    let mut sigma_lf = sigma_hf.clone();
    for i in 0..d {
        sigma_lf[(i, i)] += shift;
    }
    Ok(sigma_lf)
}

/// Relative Frobenius discrepancy `‖A_LF − A_HF‖_F / ‖A_HF‖_F` between precision matrices.
pub fn relative_precision_error(precision_lf: &DMatrix<f64>, precision_hf: &DMatrix<f64>) -> f64 {
    (precision_lf - precision_hf).norm() / precision_hf.norm()
}

/// Closed-form Gaussian posterior for `y = Fx + N(0, σ_n² I)` with prior `N(0, σ_p² I)`.
///
/// Returns `(mean, covariance)` with covariance `(FᵀF/σ_n² + I/σ_p²)⁻¹` and
/// mean `covariance · Fᵀy/σ_n²`.
pub fn conjugate_posterior(
    forward: &DMatrix<f64>,
    data: &DVector<f64>,
    sigma_noise: f64,
    sigma_prior: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !(sigma_noise > 0.0 && sigma_prior > 0.0) {
        return Err(Error::config("sigma", "noise and prior standard deviations must be positive"));
    }
    if forward.nrows() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: forward.nrows(),
            found: data.len(),
        });
    }
    let inv_var_noise = 1.0 / (sigma_noise * sigma_noise);
    let mut precision = forward.tr_mul(forward) * inv_var_noise;
    for i in 0..precision.nrows() {
        precision[(i, i)] += 1.0 / (sigma_prior * sigma_prior);
    }
    let chol = linalg::cholesky(&precision)?;
    let mean = chol.solve(&(forward.tr_mul(data) * inv_var_noise));
    Ok((mean, linalg::symmetrize(&chol.inverse())))
}
