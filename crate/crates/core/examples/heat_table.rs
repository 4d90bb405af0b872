//! Initial-condition inversion for the heat equation with TSVD surrogates.
//!
//! The default run uses a 12×12 grid and short chains. Pass `full` for the
//! 32×32 problem with 20,000 steps and five seeds (tens of minutes on one core).

use mfhmc::experiments::{run_heat_experiment, HeatExperimentConfig};
use mfhmc::forward_models::HeatOperatorSpec;

fn main() {
    let full = std::env::args().any(|a| a == "full");
    let (modes, config) = if full {
        (vec![25, 50, 75, 100, 200, 1024], HeatExperimentConfig::default())
    } else {
        let config = HeatExperimentConfig {
            heat: HeatOperatorSpec {
                grid_n: 12,
                ..Default::default()
            },
            epsilon: 0.05,
            n_steps: 2_000,
            n_seeds: 2,
            ..Default::default()
        };
        (vec![5, 10, 20, 144], config)
    };

    let table = run_heat_experiment(&modes, &config, 2024).unwrap();
    println!(
        "{:>6} {:>6} {:>8} {:>8} {:>9} {:>9} {:>8}",
        "alg", "modes", "LF acc", "HF acc", "n_hf", "rejected", "err %"
    );
    for r in &table.rows {
        println!(
            "{:>6} {:>6} {:>8.3} {:>8.3} {:>9.0} {:>9.0} {:>8.2}",
            r.algorithm.name(),
            r.fidelity,
            r.lf_acceptance,
            r.hf_acceptance,
            r.n_hf,
            r.rejected_hf,
            r.error_mean_pct
        );
    }
}
