//! HMC vs MFHMC on a Wishart Gaussian at fixed HF budgets.
//!
//! Runs a reduced sweep by default; pass `full` for the dim-50 grid.

use mfhmc::experiments::{average_over_seeds, run_mvn_experiment, SweepSpec};
use mfhmc::sampler::KernelKind;

fn main() {
    let full = std::env::args().any(|a| a == "full");
    let (dim, spec) = if full {
        (50, SweepSpec::default())
    } else {
        let spec = SweepSpec {
            budgets: vec![2_000, 4_000],
            trajectories: vec![(0.1, 20)],
            gammas: vec![1e-3, 1e-5],
            n_seeds: 2,
            ..SweepSpec::default()
        };
        (10, spec)
    };

    let cells = run_mvn_experiment(&spec, dim, dim, 0).unwrap();
    println!(
        "{:>6} {:>8} {:>6} {:>3} {:>7} {:>11} {:>11} {:>9}",
        "alg", "gamma", "eps", "L", "budget", "acc/n_hf", "ESS/n_hf", "cov err%"
    );
    for c in average_over_seeds(&cells).unwrap() {
        let gamma = match c.algorithm {
            KernelKind::Hmc => "-".to_string(),
            KernelKind::Mfhmc => c.fidelity.to_string(),
        };
        println!(
            "{:>6} {gamma:>8} {:>6} {:>3} {:>7} {:>11.4} {:>11.5} {:>9.2}",
            c.algorithm.name(),
            c.epsilon,
            c.n_leapfrog,
            c.budget,
            c.report.accepted_per_hf,
            c.report.ess_per_hf,
            c.rel_err_pct()
        );
    }
}
