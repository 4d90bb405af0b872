use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{CellResult, Fidelity};
use crate::diagnostics::{diagnose, Reference};
use crate::error::{Error, Result};
use crate::forward_models::{
    build_heat_operator, conjugate_posterior, default_initial_field, make_heat_measurement, HeatOperatorSpec, Tsvd,
};
use crate::rng::{cell_stream, sample_momentum, ChainRng};
use crate::sampler::{run_hmc_with, run_mfhmc_with, ChainRecord, KernelConfig, KernelKind, StateVector};
use crate::targets::{DualFidelityTarget, LinearGaussianPosterior};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatExperimentConfig {
    pub heat: HeatOperatorSpec,
    pub sigma_noise: f64,
    pub sigma_prior: f64,
    pub epsilon: f64,
    pub n_leapfrog: usize,
    pub n_steps: usize,
    pub burn_in_frac: f64,
    pub n_seeds: usize,
    pub include_hmc: bool,
    /// Initial field used to synthesize the data; the built-in two-bump field
    /// when `None`.
    pub true_field: Option<DVector<f64>>,
    /// Extra dense surrogate forward operator, reported as its own row.
    pub lf_operator: Option<DMatrix<f64>>,
}

impl Default for HeatExperimentConfig {
    fn default() -> Self {
        Self {
            heat: HeatOperatorSpec::default(),
            sigma_noise: 0.1,
            sigma_prior: 0.1,
            epsilon: 0.039,
            n_leapfrog: 10,
            n_steps: 20_000,
            burn_in_frac: KernelConfig::DEFAULT_BURN_IN,
            n_seeds: 5,
            include_hmc: true,
            true_field: None,
            lf_operator: None,
        }
    }
}

impl HeatExperimentConfig {
    pub fn kernel_config(&self, seed: u64) -> Result<KernelConfig> {
        KernelConfig::new(self.epsilon, self.n_leapfrog, self.n_steps, seed)?.with_burn_in(self.burn_in_frac)
    }

    pub fn validate(&self) -> Result<()> {
        self.heat.validate()?;
        self.kernel_config(0)?;
        if self.n_seeds == 0 {
            return Err(Error::config("n_seeds", "must be at least 1"));
        }
        if !(self.sigma_noise > 0.0) {
            return Err(Error::config("sigma_noise", "must be positive"));
        }
        if !(self.sigma_prior > 0.0) {
            return Err(Error::config("sigma_prior", "must be positive"));
        }
        let dim = self.heat.dim();
        if let Some(f) = &self.true_field {
            if f.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: f.len() });
            }
        }
        if let Some(m) = &self.lf_operator {
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
                });
            }
        }
        Ok(())
    }
}

/// Synthetic initial-condition inversion with its analytic posterior.
#[derive(Debug, Clone)]
pub struct HeatProblem {
    pub forward: DMatrix<f64>,
    pub truth: DVector<f64>,
    pub data: DVector<f64>,
    pub posterior_mean: DVector<f64>,
    pub posterior_covariance: DMatrix<f64>,
    pub tsvd: Tsvd,
}

impl HeatProblem {
    /// Builds the operator and posterior; the measurement noise is drawn from `seed`.
    pub fn new(config: &HeatExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let forward = build_heat_operator(&config.heat)?;
        let truth = config
            .true_field
            .clone()
            .unwrap_or_else(|| default_initial_field(config.heat.grid_n));
        let data = make_heat_measurement(&forward, &truth, config.sigma_noise, seed)?;
        let (posterior_mean, posterior_covariance) =
            conjugate_posterior(&forward, &data, config.sigma_noise, config.sigma_prior)?;
        let tsvd = Tsvd::new(&forward)?;
        Ok(Self {
            forward,
            truth,
            data,
            posterior_mean,
            posterior_covariance,
            tsvd,
        })
    }

    pub fn dim(&self) -> usize {
        self.forward.ncols()
    }

    pub fn hf_target(&self, config: &HeatExperimentConfig) -> Result<LinearGaussianPosterior> {
        LinearGaussianPosterior::new(&self.forward, &self.data, config.sigma_noise, config.sigma_prior)
    }

    /// Starting state drawn from the prior. Starting every coordinate at zero
    /// puts the nearly isotropic posterior directions in phase, and their
    /// leapfrog energy errors then add up instead of cancelling.
    pub fn prior_draw(&self, config: &HeatExperimentConfig, rng: &mut ChainRng) -> Result<StateVector> {
        StateVector::new(sample_momentum(rng, self.dim()) * config.sigma_prior)
    }

    pub fn tsvd_target(&self, modes: usize, config: &HeatExperimentConfig) -> Result<LinearGaussianPosterior> {
        let op = self.tsvd.truncate(modes)?;
        LinearGaussianPosterior::from_low_rank(&op, &self.data, config.sigma_noise, config.sigma_prior)
    }
}

/// One row of the summary table, averaged over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatRow {
    pub algorithm: KernelKind,
    pub fidelity: Fidelity,
    /// Stage-1 acceptance rate; `NaN` for single-stage HMC.
    pub lf_acceptance: f64,
    /// Stage-2 acceptance rate, or the plain acceptance rate for HMC.
    pub hf_acceptance: f64,
    pub n_hf: f64,
    /// HF work spent on proposals that were finally rejected.
    pub rejected_hf: f64,
    pub error_mean_pct: f64,
    pub coverage95: f64,
    pub ess_per_hf: f64,
}

#[derive(Debug, Clone)]
pub struct HeatTable {
    pub rows: Vec<HeatRow>,
    pub cells: Vec<CellResult>,
}

pub const HEAT_TABLE_HEADER: &str =
    "algorithm,modes,lf_acceptance,hf_acceptance,n_hf,rejected_hf,error_mean_pct,coverage95,ess_per_hf";

impl HeatTable {
    pub fn row(&self, fidelity: Fidelity) -> Option<&HeatRow> {
        self.rows.iter().find(|r| r.fidelity == fidelity)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        use crate::matrix_csv::format_f64;
        writeln!(out, "{HEAT_TABLE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.algorithm.name(),
                r.fidelity,
                format_f64(r.lf_acceptance),
                format_f64(r.hf_acceptance),
                format_f64(r.n_hf),
                format_f64(r.rejected_hf),
                format_f64(r.error_mean_pct),
                format_f64(r.coverage95),
                format_f64(r.ess_per_hf),
            )?;
        }
        Ok(())
    }
}

struct SeedRun {
    cell: CellResult,
    lf_acceptance: f64,
    hf_acceptance: f64,
    n_hf: f64,
    rejected_hf: f64,
}

fn summarize(chain: &ChainRecord, algorithm: KernelKind, fidelity: Fidelity, seed: usize, problem: &HeatProblem, config: &HeatExperimentConfig) -> Result<SeedRun> {
    let reference = Reference {
        truth: &problem.posterior_mean,
        posterior_mean: Some(&problem.posterior_mean),
        posterior_covariance: None,
    };
    let report = diagnose(chain, config.burn_in_frac, reference)?;
    let m = chain.n_iterations() as f64;
    let stage1 = chain.stage1_acceptances() as f64;
    let accepted = chain.accepted_moves() as f64;
    let (lf_acceptance, hf_acceptance, n_hf, rejected_hf) = match algorithm {
        KernelKind::Hmc => {
            let per_iter = 2.0 * chain.n_leapfrog() as f64;
            (f64::NAN, accepted / m, per_iter * m, per_iter * (m - accepted))
        }
        KernelKind::Mfhmc => (
            stage1 / m,
            report.stage2_acceptance,
            chain.hf_density_evaluations() as f64,
            stage1 - accepted,
        ),
    };
    Ok(SeedRun {
        cell: CellResult {
            algorithm,
            fidelity,
            epsilon: config.epsilon,
            n_leapfrog: config.n_leapfrog,
            budget: chain.hf_work(),
            seed: Some(seed),
            report,
        },
        lf_acceptance,
        hf_acceptance,
        n_hf,
        rejected_hf,
    })
}

/// Runs HMC on the HF posterior (when enabled) and MFHMC with a TSVD surrogate
/// for each entry of `modes_list`, plus the optional external surrogate.
///
/// The measurement is drawn once from `seed0`; each (model, seed) chain gets
/// its own stream, which also supplies its prior-drawn starting state. Coverage is scored against the analytic posterior mean.
pub fn run_heat_experiment(modes_list: &[usize], config: &HeatExperimentConfig, seed0: u64) -> Result<HeatTable> {
    let problem = HeatProblem::new(config, seed0)?;
    let max_rank = problem.tsvd.max_rank();
    if let Some(&bad) = modes_list.iter().find(|&&k| k == 0 || k > max_rank) {
        return Err(Error::RankOutOfRange { rank: bad, max: max_rank });
    }
    let hf = problem.hf_target(config)?;
    let mut models: Vec<(KernelKind, Fidelity, Option<LinearGaussianPosterior>)> = Vec::new();
    if config.include_hmc {
        models.push((KernelKind::Hmc, Fidelity::High, None));
    }
    for &k in modes_list {
        models.push((KernelKind::Mfhmc, Fidelity::Modes(k), Some(problem.tsvd_target(k, config)?)));
    }
    if let Some(op) = &config.lf_operator {
        let lf = LinearGaussianPosterior::new(op, &problem.data, config.sigma_noise, config.sigma_prior)?;
        models.push((KernelKind::Mfhmc, Fidelity::External, Some(lf)));
    }

    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| (0..config.n_seeds).map(move |s| (m, s)))
        .collect();
    let runs: Vec<SeedRun> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(model, seed))| {
            let (algorithm, fidelity, lf) = &models[model];
            let kernel = config.kernel_config(seed0)?;
            let mut rng = cell_stream(seed0, index as u64 + 1);
            let start = problem.prior_draw(config, &mut rng)?;
            let chain = match lf {
                Some(lf) => run_mfhmc_with(&start, &DualFidelityTarget::new(&hf, lf)?, &kernel, &mut rng, None)?,
                None => run_hmc_with(&start, &hf, &kernel, &mut rng, None)?,
            };
            summarize(&chain, *algorithm, *fidelity, seed, &problem, config)
        })
        .collect::<Result<_>>()?;

    let rows = runs
        .chunks(config.n_seeds)
        .map(|group| {
            let avg = |f: fn(&SeedRun) -> f64| group.iter().map(f).sum::<f64>() / group.len() as f64;
            HeatRow {
                algorithm: group[0].cell.algorithm,
                fidelity: group[0].cell.fidelity,
                lf_acceptance: avg(|r| r.lf_acceptance),
                hf_acceptance: avg(|r| r.hf_acceptance),
                n_hf: avg(|r| r.n_hf),
                rejected_hf: avg(|r| r.rejected_hf),
                error_mean_pct: avg(|r| r.cell.rel_err_pct()),
                coverage95: avg(|r| r.cell.report.coverage95),
                ess_per_hf: avg(|r| r.cell.report.ess_per_hf),
            }
        })
        .collect();
    Ok(HeatTable {
        rows,
        cells: runs.into_iter().map(|r| r.cell).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> HeatExperimentConfig {
        HeatExperimentConfig {
            heat: HeatOperatorSpec {
                grid_n: 6,
                ..Default::default()
            },
            n_steps: 400,
            n_seeds: 2,
            epsilon: 0.05,
            ..Default::default()
        }
    }

    #[test]
    fn full_rank_surrogate_never_rejects() {
        let config = small_config();
        let table = run_heat_experiment(&[4, 36], &config, 11).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.cells.len(), 6);
        let full = table.row(Fidelity::Modes(36)).unwrap();
        assert_eq!(full.hf_acceptance, 1.0);
        assert_eq!(full.rejected_hf, 0.0);
        let hmc = table.row(Fidelity::High).unwrap();
        assert!(hmc.lf_acceptance.is_nan());
        assert_eq!(hmc.n_hf, 2.0 * 10.0 * 400.0);
    }

    #[test]
    fn rows_are_seed_means() {
        let config = small_config();
        let table = run_heat_experiment(&[10], &config, 2).unwrap();
        let row = table.row(Fidelity::Modes(10)).unwrap();
        let cells: Vec<_> = table.cells.iter().filter(|c| c.fidelity == Fidelity::Modes(10)).collect();
        let mean = (cells[0].rel_err_pct() + cells[1].rel_err_pct()) / 2.0;
        assert_eq!(row.error_mean_pct, mean);
    }

    #[test]
    fn rejects_bad_modes_and_fields() {
        let config = small_config();
        assert!(matches!(
            run_heat_experiment(&[37], &config, 0),
            Err(Error::RankOutOfRange { rank: 37, max: 36 })
        ));
        let bad = HeatExperimentConfig {
            true_field: Some(DVector::zeros(5)),
            ..small_config()
        };
        assert!(HeatProblem::new(&bad, 0).is_err());
    }

    #[test]
    fn external_surrogate_row() {
        let config = small_config();
        let problem = HeatProblem::new(&config, 4).unwrap();
        let config = HeatExperimentConfig {
            lf_operator: Some(problem.forward.clone()),
            include_hmc: false,
            ..config
        };
        let table = run_heat_experiment(&[], &config, 4).unwrap();
        let row = table.row(Fidelity::External).unwrap();
        assert_eq!(row.rejected_hf, 0.0);
    }
}
