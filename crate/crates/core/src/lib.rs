//! Two-stage multi-fidelity Hamiltonian Monte Carlo.

pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod forward_models;
pub mod linalg;
pub mod matrix_csv;
pub mod rng;
pub mod sampler;
pub mod targets;

pub use error::{Error, Result};
