//! Validation problems: a Wishart-distributed Gaussian with a γ-family of
//! surrogates, and linear heat-equation inversion with TSVD surrogates.

mod gaussian;
mod heat;
mod tsvd;
mod wishart;

pub use gaussian::{build_lf_covariance, conjugate_posterior, relative_precision_error};
pub use heat::{
    build_heat_operator, default_initial_field, dirichlet_laplacian, make_heat_measurement, HeatOperatorSpec,
};
pub use tsvd::{tsvd_truncate, Tsvd};
pub use wishart::{sample_wishart_precision, sample_wishart_with, WishartSpec};
