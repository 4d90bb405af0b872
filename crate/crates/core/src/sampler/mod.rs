//! Leapfrog integration and the HMC / MFHMC transition kernels.

mod chain;
mod kernel;
mod leapfrog;
mod state;

pub use chain::{run_hmc, run_hmc_with, run_mfhmc, run_mfhmc_with, ChainRecord, KernelKind};
pub use kernel::{
    acceptance_probability, hmc_step, mfhmc_step, second_stage_log_ratio, DensityCache, HmcOutcome,
    MfhmcOutcome,
};
pub use leapfrog::{integrate, leapfrog_trajectory};
pub use state::{kinetic_energy, KernelConfig, PhasePoint, StateVector};
