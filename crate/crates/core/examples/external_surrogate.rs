//! Plugging in a surrogate forward operator from a CSV file.
//!
//! A coarse-in-time heat solve (10 backward-Euler steps instead of 100)
//! stands in for an externally trained model. It is written to disk, read
//! back, and used as the low-fidelity map while the fine solve stays the
//! high-fidelity one.

use mfhmc::diagnostics::{diagnose, Reference};
use mfhmc::experiments::{HeatExperimentConfig, HeatProblem};
use mfhmc::forward_models::{build_heat_operator, HeatOperatorSpec};
use mfhmc::sampler::{run_mfhmc, KernelConfig, StateVector};
use mfhmc::targets::{load_linear_operator, save_linear_operator, DualFidelityTarget, LinearGaussianPosterior};

fn main() {
    let heat = HeatOperatorSpec {
        grid_n: 10,
        ..Default::default()
    };
    let config = HeatExperimentConfig {
        heat,
        ..Default::default()
    };
    let problem = HeatProblem::new(&config, 1).unwrap();

    let coarse = build_heat_operator(&HeatOperatorSpec {
        n_time_steps: 10,
        ..heat
    })
    .unwrap();
    let dir = std::env::temp_dir().join("mfhmc-external-surrogate");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("coarse_operator.csv");
    save_linear_operator(&coarse, &path).unwrap();
    let surrogate = load_linear_operator(&path).unwrap();

    let hf = problem.hf_target(&config).unwrap();
    let lf = LinearGaussianPosterior::new(&surrogate, &problem.data, config.sigma_noise, config.sigma_prior).unwrap();
    let target = DualFidelityTarget::new(&hf, &lf).unwrap();
    let kernel = KernelConfig::new(0.05, 10, 4_000, 9).unwrap();
    let chain = run_mfhmc(&StateVector::zeros(problem.dim()).unwrap(), &target, &kernel).unwrap();

    let reference = Reference {
        truth: &problem.posterior_mean,
        posterior_mean: Some(&problem.posterior_mean),
        posterior_covariance: None,
    };
    let report = diagnose(&chain, kernel.burn_in_frac, reference).unwrap();
    println!("surrogate read from {}", path.display());
    for (name, value) in report.rows() {
        println!("{name:>20} {value:.4}");
    }
}
