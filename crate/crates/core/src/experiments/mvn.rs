use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{CellResult, Fidelity};
use crate::diagnostics::{diagnose, Reference};
use crate::error::{Error, Result};
use crate::forward_models::{build_lf_covariance, sample_wishart_precision, WishartSpec};
use crate::linalg;
use crate::rng::cell_stream;
use crate::sampler::{run_hmc_with, run_mfhmc_with, ChainRecord, KernelConfig, KernelKind, StateVector};
use crate::targets::{DualFidelityTarget, MvnTarget};

/// Grid of budgets, trajectories and surrogates for a Gaussian sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// HF-evaluation caps, strictly increasing.
    pub budgets: Vec<u64>,
    /// `(ε, L)` pairs.
    pub trajectories: Vec<(f64, usize)>,
    pub gammas: Vec<f64>,
    pub n_seeds: usize,
    pub burn_in_frac: f64,
    /// Iteration ceiling for chains whose budget is never reached.
    pub max_iterations: usize,
    pub include_hmc: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            budgets: vec![10_000, 20_000, 30_000, 40_000, 50_000],
            trajectories: vec![(0.05, 10), (0.08, 25), (0.1, 50)],
            gammas: vec![1e-4, 1e-5, 1e-6, 1e-7],
            n_seeds: 5,
            burn_in_frac: KernelConfig::DEFAULT_BURN_IN,
            max_iterations: 500_000,
            include_hmc: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("budgets", "must be non-empty and strictly increasing"));
        }
        if self.n_seeds == 0 {
            return Err(Error::config("n_seeds", "must be at least 1"));
        }
        if self.trajectories.is_empty() {
            return Err(Error::config("trajectories", "must be non-empty"));
        }
        for &(eps, l) in &self.trajectories {
            KernelConfig::new(eps, l, 1, 0)?;
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::config("gammas", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.burn_in_frac) {
            return Err(Error::config("burn_in_frac", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Longest trajectory `ε·L` in the grid.
    pub fn longest_trajectory(&self) -> (f64, usize) {
        self.trajectories
            .iter()
            .copied()
            .max_by(|a, b| (a.0 * a.1 as f64).total_cmp(&(b.0 * b.1 as f64)))
            .expect("validated non-empty")
    }
}

/// Zero-mean Gaussian with a Wishart-drawn precision.
#[derive(Debug, Clone)]
pub struct MvnProblem {
    pub precision: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
}

impl MvnProblem {
    pub fn new(dim: usize, dof: usize, seed: u64) -> Result<Self> {
        let precision = sample_wishart_precision(&WishartSpec { dim, dof, seed })?;
        let covariance = linalg::spd_inverse(&precision)?;
        Ok(Self { precision, covariance })
    }

    pub fn dim(&self) -> usize {
        self.precision.nrows()
    }

    pub fn hf_target(&self) -> Result<MvnTarget> {
        MvnTarget::new(self.precision.clone())
    }

    /// Surrogate with covariance `Σ + (γ/d)·tr(Σ)·I`.
    pub fn lf_target(&self, gamma: f64) -> Result<MvnTarget> {
        if gamma == 0.0 {
            return self.hf_target();
        }
        MvnTarget::from_covariance(&build_lf_covariance(&self.covariance, gamma)?)
    }
}

struct ChainJob {
    algorithm: KernelKind,
    fidelity: Fidelity,
    epsilon: f64,
    n_leapfrog: usize,
    seed: usize,
    stream: u64,
}

/// Runs every sweep cell for a Wishart(`dim`, `dof`) Gaussian rooted at `seed0`.
///
/// One chain is run per (algorithm, surrogate, trajectory, seed) up to the
/// largest budget; each smaller budget is scored on the prefix of that chain
/// that stops once its cap is reached, which is exactly the chain a separate
/// capped run would have produced. Covariance error is measured against the
/// exact HF covariance. Per-seed cells are returned; see
/// [`super::average_over_seeds`].
pub fn run_mvn_experiment(spec: &SweepSpec, dim: usize, dof: usize, seed0: u64) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let problem = MvnProblem::new(dim, dof, seed0)?;
    let hf = problem.hf_target()?;
    let lfs: Vec<(f64, MvnTarget)> = spec
        .gammas
        .iter()
        .map(|&g| Ok((g, problem.lf_target(g)?)))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for &(epsilon, n_leapfrog) in &spec.trajectories {
        let fidelities = spec
            .include_hmc
            .then_some((KernelKind::Hmc, Fidelity::High))
            .into_iter()
            .chain(spec.gammas.iter().map(|&g| (KernelKind::Mfhmc, Fidelity::Gamma(g))));
        for (algorithm, fidelity) in fidelities {
            for seed in 0..spec.n_seeds {
                let stream = jobs.len() as u64 + 1;
                jobs.push(ChainJob {
                    algorithm,
                    fidelity,
                    epsilon,
                    n_leapfrog,
                    seed,
                    stream,
                });
            }
        }
    }

    let cap = *spec.budgets.last().expect("validated non-empty");
    let truth = DVector::zeros(dim);
    let reference = Reference {
        truth: &truth,
        posterior_mean: None,
        posterior_covariance: Some(&problem.covariance),
    };
    let per_job: Vec<Vec<CellResult>> = jobs
        .par_iter()
        .map(|job| {
            let config = KernelConfig {
                epsilon: job.epsilon,
                n_leapfrog: job.n_leapfrog,
                n_steps: spec.max_iterations,
                burn_in_frac: spec.burn_in_frac,
                seed: seed0,
            };
            let mut rng = cell_stream(seed0, job.stream);
            let start = StateVector::zeros(dim)?;
            let chain: ChainRecord = match job.fidelity {
                Fidelity::Gamma(g) => {
                    let lf = &lfs.iter().find(|(gg, _)| *gg == g).expect("built above").1;
                    let target = DualFidelityTarget::new(&hf, lf)?;
                    run_mfhmc_with(&start, &target, &config, &mut rng, Some(cap))?
                }
                _ => run_hmc_with(&start, &hf, &config, &mut rng, Some(cap))?,
            };
            spec.budgets
                .iter()
                .map(|&budget| {
                    let prefix = chain.truncate_to_budget(budget);
                    Ok(CellResult {
                        algorithm: job.algorithm,
                        fidelity: job.fidelity,
                        epsilon: job.epsilon,
                        n_leapfrog: job.n_leapfrog,
                        budget,
                        seed: Some(job.seed),
                        report: diagnose(&prefix, spec.burn_in_frac, reference)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::average_over_seeds;

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::default();
        assert!(spec.validate().is_ok());
        spec.budgets = vec![10, 10];
        assert!(spec.validate().is_err());
        let spec = SweepSpec {
            n_seeds: 0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn lf_with_zero_gamma_is_hf() {
        let p = MvnProblem::new(4, 6, 1).unwrap();
        assert_eq!(p.lf_target(0.0).unwrap().precision(), &p.precision);
    }

    #[test]
    fn small_sweep_accounting() {
        let spec = SweepSpec {
            budgets: vec![200, 400],
            trajectories: vec![(0.05, 5)],
            gammas: vec![0.0, 1e-2],
            n_seeds: 2,
            max_iterations: 5_000,
            ..Default::default()
        };
        let cells = run_mvn_experiment(&spec, 5, 8, 3).unwrap();
        assert_eq!(cells.len(), 3 * 2 * 2);
        for c in &cells {
            match c.algorithm {
                // HMC overshoots by less than one iteration's 2L
                KernelKind::Hmc => assert!(c.report.n_hf_total < c.budget + 10),
                KernelKind::Mfhmc => assert!(c.report.n_hf_total <= c.budget + 1),
            }
            if c.fidelity == Fidelity::Gamma(0.0) {
                assert_eq!(c.report.stage2_acceptance, 1.0);
            }
        }
        let avg = average_over_seeds(&cells).unwrap();
        assert_eq!(avg.len(), 3 * 2);
        let first: Vec<&CellResult> = cells.iter().filter(|c| avg[0].same_cell(c)).collect();
        let expect = (first[0].report.ess_per_hf + first[1].report.ess_per_hf) / 2.0;
        assert_eq!(avg[0].report.ess_per_hf, expect);
    }
}
