use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::seeded;

/// Grid and time stepping for the 2-D transient heat equation on a square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatOperatorSpec {
    /// Interior nodes per side; the state has `grid_n²` entries.
    pub grid_n: usize,
    pub domain_length: f64,
    /// Thermal diffusivity.
    pub alpha: f64,
    pub n_time_steps: usize,
    pub final_time: f64,
}

impl Default for HeatOperatorSpec {
    fn default() -> Self {
        Self {
            grid_n: 32,
            domain_length: 2.0 * std::f64::consts::PI,
            alpha: 0.64,
            n_time_steps: 100,
            final_time: 1.0,
        }
    }
}

impl HeatOperatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::config("grid_n", "must be at least 2"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha", "must be non-negative"));
        }
        if self.n_time_steps == 0 {
            return Err(Error::config("n_time_steps", "must be at least 1"));
        }
        if !(self.domain_length > 0.0 && self.final_time > 0.0) {
            return Err(Error::config("domain_length", "domain length and final time must be positive"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.grid_n * self.grid_n
    }

    /// Node spacing; the zero-valued boundary sits one spacing outside the
    /// outermost unknowns.
    pub fn spacing(&self) -> f64 {
        self.domain_length / (self.grid_n + 1) as f64
    }

    pub fn time_step(&self) -> f64 {
        self.final_time / self.n_time_steps as f64
    }
}

/// Five-point Laplacian with homogeneous Dirichlet boundary, row-major node order.
pub fn dirichlet_laplacian(grid_n: usize, spacing: f64) -> DMatrix<f64> {
    let n = grid_n * grid_n;
    let inv_h2 = 1.0 / (spacing * spacing);
    let mut lap = DMatrix::zeros(n, n);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let k = i * grid_n + j;
            lap[(k, k)] = -4.0 * inv_h2;
            if i > 0 {
                lap[(k, k - grid_n)] = inv_h2;
            }
            if i + 1 < grid_n {
                lap[(k, k + grid_n)] = inv_h2;
            }
            if j > 0 {
                lap[(k, k - 1)] = inv_h2;
            }
            if j + 1 < grid_n {
                lap[(k, k + 1)] = inv_h2;
            }
        }
    }
    lap
}

/// Dense map from initial to final temperature under backward Euler:
/// `F = M^{-n_t}` with `M = I - Δt·α·L_h`.
pub fn build_heat_operator(spec: &HeatOperatorSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.dim();
    let mut step = dirichlet_laplacian(spec.grid_n, spec.spacing()) * (-spec.time_step() * spec.alpha);
    for i in 0..n {
        step[(i, i)] += 1.0;
    }
    let step_inverse = linalg::spd_inverse(&step)?;
    Ok(linalg::symmetrize(&matrix_power(&step_inverse, spec.n_time_steps)))
}

/// `m^k` by repeated squaring.
fn matrix_power(m: &DMatrix<f64>, mut k: usize) -> DMatrix<f64> {
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = m.clone();
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                Some(r) => &r * &base,
                None => base.clone(),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = &base * &base;
    }
    result.unwrap_or_else(|| DMatrix::identity(m.nrows(), m.ncols()))
}

/// Noisy final-time observation `y = F·x_true + η`, `η ~ N(0, noise_sigma² I)`.
pub fn make_heat_measurement(
    forward: &DMatrix<f64>,
    x_true: &DVector<f64>,
    noise_sigma: f64,
    seed: u64,
) -> Result<DVector<f64>> {
    if forward.ncols() != x_true.len() {
        return Err(Error::DimensionMismatch {
            expected: forward.ncols(),
            found: x_true.len(),
        });
    }
    let mut rng = seeded(seed);
    let clean = forward * x_true;
    Ok(DVector::from_fn(clean.len(), |i, _| {
        let noise: f64 = rng.sample(StandardNormal);
        clean[i] + noise_sigma * noise
    }))
}

/// Smooth stand-in initial field: two Gaussian bumps of opposite sign on a
/// `grid_n × grid_n` grid over the unit square, row-major.
pub fn default_initial_field(grid_n: usize) -> DVector<f64> {
    let bump = |x: f64, y: f64, cx: f64, cy: f64, w: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp();
    DVector::from_fn(grid_n * grid_n, |k, _| {
        let (i, j) = (k / grid_n, k % grid_n);
        let y = (i as f64 + 1.0) / (grid_n as f64 + 1.0);
        let x = (j as f64 + 1.0) / (grid_n as f64 + 1.0);
        0.5 * bump(x, y, 0.35, 0.4, 0.12) - 0.3 * bump(x, y, 0.68, 0.62, 0.1)
    })
}
