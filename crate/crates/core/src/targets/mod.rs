//! Log-density interfaces and the concrete Gaussian-family posteriors.
//!
//! All densities are unnormalized: implementations may drop any additive
//! constant, and the kernels only ever use differences of log-densities.

mod linear_gaussian;
mod mvn;

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub use linear_gaussian::{linear_gaussian_log_density_and_grad, LinearGaussianPosterior};
pub use mvn::{mvn_log_density_and_grad, MvnTarget};
pub use crate::matrix_csv::{load_linear_operator, save_linear_operator};

/// A black-box log-density: value only.
pub trait LogDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &DVector<f64>) -> f64;
}

/// A log-density that also provides its gradient.
pub trait GradientLogDensity: LogDensity {
    /// Returns the log-density and its gradient at `x`, computed together.
    fn log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>);
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &DVector<f64>) -> f64 {
        (**self).log_density(x)
    }
}

impl<T: GradientLogDensity + ?Sized> GradientLogDensity for &T {
    fn log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (**self).log_density_and_gradient(x)
    }
}

impl<T: LogDensity + ?Sized> LogDensity for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &DVector<f64>) -> f64 {
        (**self).log_density(x)
    }
}

impl<T: GradientLogDensity + ?Sized> GradientLogDensity for Arc<T> {
    fn log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (**self).log_density_and_gradient(x)
    }
}

/// Pairs an expensive high-fidelity posterior, queried by value only, with a
/// cheap differentiable low-fidelity surrogate posterior over the same space.
#[derive(Debug, Clone)]
pub struct DualFidelityTarget<H, L> {
    high: H,
    low: L,
}

impl<H: LogDensity, L: GradientLogDensity> DualFidelityTarget<H, L> {
    pub fn new(high: H, low: L) -> Result<Self> {
        if high.dim() != low.dim() {
            return Err(Error::DimensionMismatch {
                expected: high.dim(),
                found: low.dim(),
            });
        }
        Ok(Self { high, low })
    }

    pub fn dim(&self) -> usize {
        self.high.dim()
    }

    pub fn hf_log_density(&self, x: &DVector<f64>) -> f64 {
        self.high.log_density(x)
    }

    pub fn lf_log_density(&self, x: &DVector<f64>) -> f64 {
        self.low.log_density(x)
    }

    pub fn lf_log_density_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.low.log_density_and_gradient(x)
    }

    pub fn high(&self) -> &H {
        &self.high
    }

    pub fn low(&self) -> &L {
        &self.low
    }
}

/// Largest relative discrepancy between the analytic gradient of `target` and
/// central finite differences with step `h` at `x`.
pub fn gradient_check<T: GradientLogDensity + ?Sized>(target: &T, x: &DVector<f64>, h: f64) -> f64 {
    let (_, grad) = target.log_density_and_gradient(x);
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let mut up = x.clone();
        let mut down = x.clone();
        up[i] += h;
        down[i] -= h;
        let fd = (target.log_density(&up) - target.log_density(&down)) / (2.0 * h);
        let scale = grad[i].abs().max(fd.abs()).max(1.0);
        worst = worst.max((grad[i] - fd).abs() / scale);
    }
    worst
}
