use std::fs;
use std::path::Path;

use nalgebra::DVector;

use super::config::{Command, Problem, RunConfig};
use super::output::{write_chain, write_report, write_with};
use crate::diagnostics::{diagnose, DiagnosticsReport, Reference};
use crate::error::{Error, Result};
use crate::experiments::{average_over_seeds, run_heat_experiment, run_mvn_experiment, write_cells, HeatProblem, MvnProblem};
use crate::matrix_csv::load_linear_operator;
use crate::rng::{cell_stream, ChainRng};
use crate::sampler::{run_hmc_with, run_mfhmc_with, ChainRecord, KernelKind, StateVector};
use crate::targets::{DualFidelityTarget, GradientLogDensity, LinearGaussianPosterior};

/// Loads a field stored as an `n×1` (or `1×n`) matrix CSV.
pub fn load_field(path: &Path) -> Result<DVector<f64>> {
    let m = load_linear_operator(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::config("true_field", format!("{} must be a single row or column", path.display())));
    }
    Ok(DVector::from_iterator(m.len(), m.iter().copied()))
}

fn single<T: Copy>(key: &str, values: &[T]) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::config(key, "`sample` takes exactly one value")),
    }
}

fn sample_chain<H, L>(config: &RunConfig, hf: &H, lf: Option<&L>, start: &StateVector, rng: &mut ChainRng) -> Result<ChainRecord>
where
    H: GradientLogDensity,
    L: GradientLogDensity,
{
    match (config.algorithm, lf) {
        (KernelKind::Mfhmc, Some(lf)) => {
            run_mfhmc_with(start, &DualFidelityTarget::new(hf, lf)?, &config.kernel, rng, config.budget)
        }
        _ => run_hmc_with(start, hf, &config.kernel, rng, config.budget),
    }
}

/// Runs `sample`, returning the chain and its diagnostics.
pub fn run_sample(config: &RunConfig) -> Result<(ChainRecord, DiagnosticsReport)> {
    let burn = config.kernel.burn_in_frac;
    match config.problem {
        Problem::Mvn => {
            let problem = MvnProblem::new(config.dim, config.dof, config.kernel.seed)?;
            let hf = problem.hf_target()?;
            let lf = problem.lf_target(single("gamma", &config.gammas)?)?;
            let mut rng = cell_stream(config.kernel.seed, 1);
            let chain = sample_chain(config, &hf, Some(&lf), &StateVector::zeros(config.dim)?, &mut rng)?;
            let truth = DVector::zeros(config.dim);
            let reference = Reference {
                truth: &truth,
                posterior_mean: None,
                posterior_covariance: Some(&problem.covariance),
            };
            let report = diagnose(&chain, burn, reference)?;
            Ok((chain, report))
        }
        Problem::Heat => {
            let heat = heat_config(config)?;
            let problem = HeatProblem::new(&heat, config.kernel.seed)?;
            let hf = problem.hf_target(&heat)?;
            let lf: LinearGaussianPosterior = match &heat.lf_operator {
                Some(op) => LinearGaussianPosterior::new(op, &problem.data, heat.sigma_noise, heat.sigma_prior)?,
                None => problem.tsvd_target(single("modes", &config.modes)?, &heat)?,
            };
            let mut rng = cell_stream(config.kernel.seed, 1);
            let start = problem.prior_draw(&heat, &mut rng)?;
            let chain = sample_chain(config, &hf, Some(&lf), &start, &mut rng)?;
            let reference = Reference {
                truth: &problem.posterior_mean,
                posterior_mean: Some(&problem.posterior_mean),
                posterior_covariance: None,
            };
            let report = diagnose(&chain, burn, reference)?;
            Ok((chain, report))
        }
    }
}

fn heat_config(config: &RunConfig) -> Result<crate::experiments::HeatExperimentConfig> {
    let field = config.true_field.as_deref().map(load_field).transpose()?;
    let op = config.lf_operator.as_deref().map(load_linear_operator).transpose()?;
    let heat = config.heat_config(field, op);
    heat.validate()?;
    Ok(heat)
}

/// Executes the configured command, writing its files under `out_dir`.
/// Returns a short human-readable summary.
pub fn execute(config: &RunConfig) -> Result<String> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match config.command {
        Command::Sample => {
            let (chain, report) = run_sample(config)?;
            write_chain(&chain, &dir.join("chain.csv"), config.thin)?;
            write_report(&report, &dir.join("report.csv"))?;
            Ok(format!(
                "{} chain: {} iterations, stage-1 acceptance {:.3}, stage-2 acceptance {:.3}, ESS/n_hf {:.4}",
                config.algorithm.name(),
                chain.n_iterations(),
                report.stage1_acceptance,
                report.stage2_acceptance,
                report.ess_per_hf
            ))
        }
        Command::MvnSweep => {
            let cells = run_mvn_experiment(&config.sweep_spec(), config.dim, config.dof, config.kernel.seed)?;
            let summary = average_over_seeds(&cells)?;
            write_with(&dir.join("mvn_cells.csv"), |w| write_cells(w, &cells))?;
            write_with(&dir.join("mvn_summary.csv"), |w| write_cells(w, &summary))?;
            Ok(format!("{} cells, {} seed-averaged rows", cells.len(), summary.len()))
        }
        Command::HeatTable => {
            let heat = heat_config(config)?;
            let table = run_heat_experiment(&config.modes, &heat, config.kernel.seed)?;
            write_with(&dir.join("heat_table.csv"), |w| table.write_csv(w))?;
            write_with(&dir.join("heat_cells.csv"), |w| write_cells(w, &table.cells))?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(|e| Error::io(dir, e))?;
            Ok(String::from_utf8_lossy(&buf).trim_end().to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::parse_config;

    fn config(args: &[&str], dir: &Path) -> RunConfig {
        let out = format!("--out-dir={}", dir.display());
        let argv = std::iter::once("mfhmc").chain(args.iter().copied()).chain([out.as_str(), "--seed", "5"]);
        parse_config(argv, None).unwrap()
    }

    #[test]
    fn sample_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(&["sample", "--dim", "4", "--n-steps", "300", "--gamma", "1e-3"], dir.path());
        execute(&c).unwrap();
        let first = fs::read(dir.path().join("report.csv")).unwrap();
        let chain = fs::read(dir.path().join("chain.csv")).unwrap();
        execute(&c).unwrap();
        assert_eq!(first, fs::read(dir.path().join("report.csv")).unwrap());
        assert_eq!(chain, fs::read(dir.path().join("chain.csv")).unwrap());
    }

    #[test]
    fn sample_rejects_several_gammas() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(&["sample", "--dim", "3", "--gamma", "1e-3,1e-4"], dir.path());
        let err = execute(&c).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn small_heat_sample_with_external_operator() {
        let dir = tempfile::tempdir().unwrap();
        let op = crate::forward_models::build_heat_operator(&crate::forward_models::HeatOperatorSpec {
            grid_n: 4,
            ..Default::default()
        })
        .unwrap();
        let op_path = dir.path().join("lf.csv");
        crate::matrix_csv::save_linear_operator(&op, &op_path).unwrap();
        let lf_arg = format!("--lf-operator={}", op_path.display());
        let c = config(
            &["sample", "--problem", "heat", "--grid-n", "4", "--n-steps", "200", "--epsilon", "0.05", &lf_arg],
            dir.path(),
        );
        let (chain, report) = run_sample(&c).unwrap();
        assert_eq!(chain.dim(), 16);
        assert_eq!(report.stage2_acceptance, 1.0);
    }
}
