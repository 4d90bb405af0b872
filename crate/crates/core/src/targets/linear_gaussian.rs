use nalgebra::{DMatrix, DVector};

use super::{GradientLogDensity, LogDensity};
use crate::error::{Error, Result};
use crate::linalg::LowRankOperator;

/// Posterior of `y = Fx + η` with `η ~ N(0, σ_n² I)` and prior `x ~ N(0, σ_p² I)`:
///
/// log p(x | y) = -‖y - Fx‖²/(2σ_n²) - ‖x‖²/(2σ_p²) + const.
///
/// A dense forward map is folded into its normal matrix once, so each
/// evaluation costs a single matrix-vector product. A low-rank map (a TSVD
/// surrogate) is kept factored and costs two thin products.
#[derive(Debug, Clone)]
pub struct LinearGaussianPosterior {
    dim: usize,
    repr: Repr,
    inv_var_noise: f64,
    inv_var_prior: f64,
    /// ‖y‖²/(2σ_n²)
    data_energy: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    /// `normal = FᵀF/σ_n² + I/σ_p²`, `shift = Fᵀy/σ_n²`.
    Normal {
        normal: DMatrix<f64>,
        shift: DVector<f64>,
    },
    /// `F = U diag(s) Vᵀ`; `sy = s ∘ Uᵀy`.
    Factored {
        v_t: DMatrix<f64>,
        s: DVector<f64>,
        sy: DVector<f64>,
    },
}

fn check_sigmas(sigma_noise: f64, sigma_prior: f64) -> Result<()> {
    if !(sigma_noise > 0.0 && sigma_noise.is_finite()) {
        return Err(Error::config("sigma_noise", "must be positive"));
    }
    if !(sigma_prior > 0.0 && sigma_prior.is_finite()) {
        return Err(Error::config("sigma_prior", "must be positive"));
    }
    Ok(())
}

impl LinearGaussianPosterior {
    pub fn new(
        forward: &DMatrix<f64>,
        data: &DVector<f64>,
        sigma_noise: f64,
        sigma_prior: f64,
    ) -> Result<Self> {
        check_sigmas(sigma_noise, sigma_prior)?;
        if forward.nrows() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: forward.nrows(),
                found: data.len(),
            });
        }
        let inv_var_noise = 1.0 / (sigma_noise * sigma_noise);
        let inv_var_prior = 1.0 / (sigma_prior * sigma_prior);
        let dim = forward.ncols();
        let mut normal = forward.tr_mul(forward) * inv_var_noise;
        for i in 0..dim {
            normal[(i, i)] += inv_var_prior;
        }
        let shift = forward.tr_mul(data) * inv_var_noise;
        Ok(Self {
            dim,
            repr: Repr::Normal { normal, shift },
            inv_var_noise,
            inv_var_prior,
            data_energy: 0.5 * data.norm_squared() * inv_var_noise,
        })
    }

    /// Builds the posterior on a low-rank forward map without densifying it.
    ///
    /// When the rank is at least half the parameter dimension the dense
    /// normal-matrix form is cheaper and is used instead.
    pub fn from_low_rank(
        forward: &LowRankOperator,
        data: &DVector<f64>,
        sigma_noise: f64,
        sigma_prior: f64,
    ) -> Result<Self> {
        if 2 * forward.rank() >= forward.ncols() {
            return Self::new(&forward.to_dense(), data, sigma_noise, sigma_prior);
        }
        check_sigmas(sigma_noise, sigma_prior)?;
        if forward.nrows() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: forward.nrows(),
                found: data.len(),
            });
        }
        let inv_var_noise = 1.0 / (sigma_noise * sigma_noise);
        let s = forward.singular_values().clone();
        let sy = forward.u().tr_mul(data).component_mul(&s);
        Ok(Self {
            dim: forward.ncols(),
            repr: Repr::Factored {
                v_t: forward.v_t().clone(),
                s,
                sy,
            },
            inv_var_noise,
            inv_var_prior: 1.0 / (sigma_prior * sigma_prior),
            data_energy: 0.5 * data.norm_squared() * inv_var_noise,
        })
    }

    fn evaluate(&self, x: &DVector<f64>, want_gradient: bool) -> (f64, Option<DVector<f64>>) {
        match &self.repr {
            Repr::Normal { normal, shift } => {
                let hx = normal * x;
                let value = -0.5 * x.dot(&hx) + shift.dot(x) - self.data_energy;
                (value, want_gradient.then(|| shift - hx))
            }
            Repr::Factored { v_t, s, sy } => {
                // ‖y - U s∘z‖² = ‖y‖² - 2 (s∘z)·(Uᵀy) + ‖s∘z‖² for orthonormal U
                let z = v_t * x;
                let sz = z.component_mul(s);
                let misfit = self.data_energy + 0.5 * self.inv_var_noise * (sz.norm_squared() - 2.0 * sy.dot(&z));
                let value = -misfit - 0.5 * self.inv_var_prior * x.norm_squared();
                let gradient = want_gradient.then(|| {
                    let w = (sy - sz.component_mul(s)) * self.inv_var_noise;
                    v_t.tr_mul(&w) - x * self.inv_var_prior
                });
                (value, gradient)
            }
        }
    }
}

impl LogDensity for LinearGaussianPosterior {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &DVector<f64>) -> f64 {
        self.evaluate(x, false).0
    }
}

impl GradientLogDensity for LinearGaussianPosterior {
    fn log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let (value, gradient) = self.evaluate(x, true);
        (value, gradient.expect("gradient requested"))
    }
}

/// Direct residual-form evaluation of the linear-Gaussian log-posterior and its
/// gradient `Fᵀ(y - Fx)/σ_n² - x/σ_p²`.
pub fn linear_gaussian_log_density_and_grad(
    x: &DVector<f64>,
    forward: &DMatrix<f64>,
    data: &DVector<f64>,
    sigma_noise: f64,
    sigma_prior: f64,
) -> Result<(f64, DVector<f64>)> {
    check_sigmas(sigma_noise, sigma_prior)?;
    if forward.ncols() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: forward.ncols(),
            found: x.len(),
        });
    }
    if forward.nrows() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: forward.nrows(),
            found: data.len(),
        });
    }
    let var_noise = sigma_noise * sigma_noise;
    let var_prior = sigma_prior * sigma_prior;
    let residual = data - forward * x;
    let value = -residual.norm_squared() / (2.0 * var_noise) - x.norm_squared() / (2.0 * var_prior);
    let gradient = forward.tr_mul(&residual) / var_noise - x / var_prior;
    Ok((value, gradient))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng::seeded;
    use crate::targets::gradient_check;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = seeded(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn scalar_cases() {
        let f = DMatrix::from_element(1, 1, 1.0);
        let (v, g) =
            linear_gaussian_log_density_and_grad(&DVector::zeros(1), &f, &DVector::zeros(1), 1.0, 1.0).unwrap();
        assert_eq!((v, g[0]), (0.0, 0.0));
        let y = DVector::from_element(1, 1.0);
        let (v, g) = linear_gaussian_log_density_and_grad(&DVector::zeros(1), &f, &y, 1.0, 1.0).unwrap();
        assert_eq!((v, g[0]), (-0.5, 1.0));
        let post = LinearGaussianPosterior::new(&f, &y, 1.0, 1.0).unwrap();
        let (v, g) = post.log_density_and_gradient(&DVector::zeros(1));
        assert_eq!((v, g[0]), (-0.5, 1.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = DMatrix::identity(2, 2);
        let y = DVector::zeros(2);
        assert!(LinearGaussianPosterior::new(&f, &y, 0.0, 1.0).is_err());
        assert!(LinearGaussianPosterior::new(&f, &y, 1.0, -1.0).is_err());
        assert!(LinearGaussianPosterior::new(&f, &DVector::zeros(3), 1.0, 1.0).is_err());
        assert!(linear_gaussian_log_density_and_grad(&DVector::zeros(3), &f, &y, 1.0, 1.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = random_matrix(3, 4, 1);
        let y = DVector::from_vec(vec![0.3, -0.2, 1.1]);
        let post = LinearGaussianPosterior::new(&f, &y, 0.7, 1.3).unwrap();
        let mut rng = seeded(2);
        for _ in 0..20 {
            let x = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            assert!(gradient_check(&post, &x, 1e-5) < 1e-6);
            let (v_direct, g_direct) = linear_gaussian_log_density_and_grad(&x, &f, &y, 0.7, 1.3).unwrap();
            let (v, g) = post.log_density_and_gradient(&x);
            assert!((v - v_direct).abs() < 1e-10 * v.abs().max(1.0));
            assert!((g - g_direct).amax() < 1e-10);
        }
    }

    #[test]
    fn zero_forward_map_is_pure_prior() {
        let f = DMatrix::zeros(3, 3);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let post = LinearGaussianPosterior::new(&f, &y, 0.5, 0.1).unwrap();
        let x = DVector::from_vec(vec![0.2, -0.4, 1.0]);
        let (_, g) = post.log_density_and_gradient(&x);
        assert!((g + &x / 0.01).amax() < 1e-12);
    }

    #[test]
    fn factored_form_matches_dense_truncation() {
        let f = random_matrix(12, 12, 9);
        let svd = f.clone().svd(true, true);
        let k = 3;
        let op = LowRankOperator::new(
            svd.u.as_ref().unwrap().columns(0, k).into_owned(),
            svd.singular_values.rows(0, k).into_owned(),
            svd.v_t.as_ref().unwrap().rows(0, k).into_owned(),
        )
        .unwrap();
        let y = DVector::from_fn(12, |i, _| (i as f64).sin());
        let factored = LinearGaussianPosterior::from_low_rank(&op, &y, 0.3, 0.8).unwrap();
        let dense = op.to_dense();
        let mut rng = seeded(4);
        for _ in 0..10 {
            let x = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
            let (v, g) = factored.log_density_and_gradient(&x);
            let (v_ref, g_ref) = linear_gaussian_log_density_and_grad(&x, &dense, &y, 0.3, 0.8).unwrap();
            assert!((v - v_ref).abs() < 1e-9 * v_ref.abs().max(1.0), "{v} vs {v_ref}");
            assert!((&g - &g_ref).amax() < 1e-9 * g_ref.amax().max(1.0));
            assert!(gradient_check(&factored, &x, 1e-5) < 1e-6);
        }
    }
}
