use std::ops::Range;

use nalgebra::DVector;

use super::kernel::{hmc_step, mfhmc_step, DensityCache};
use super::state::{KernelConfig, StateVector};
use crate::error::{Error, Result};
use crate::rng::{seeded, ChainRng};
use crate::targets::{DualFidelityTarget, GradientLogDensity, LogDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Hmc,
    Mfhmc,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Hmc => "hmc",
            KernelKind::Mfhmc => "mfhmc",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hmc" => Ok(KernelKind::Hmc),
            "mfhmc" => Ok(KernelKind::Mfhmc),
            other => Err(Error::config("algorithm", format!("expected `hmc` or `mfhmc`, got `{other}`"))),
        }
    }
}

/// A full chain: the starting state plus one sample per iteration, with the
/// accept flags and cumulative cost counters of every iteration.
///
/// Samples are stored row-major in one flat buffer. For HMC chains
/// `stage2_accepted` mirrors `stage1_accepted`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    kernel: KernelKind,
    n_leapfrog: usize,
    dim: usize,
    samples: Vec<f64>,
    stage1_accepted: Vec<bool>,
    stage2_accepted: Vec<bool>,
    n_hf_cumulative: Vec<u64>,
    n_grad_lf_cumulative: Vec<u64>,
}

impl ChainRecord {
    fn start(kernel: KernelKind, n_leapfrog: usize, start: &StateVector, capacity: usize) -> Self {
        let dim = start.dim();
        let mut samples = Vec::with_capacity((capacity + 1) * dim);
        samples.extend_from_slice(start.as_slice());
        Self {
            kernel,
            n_leapfrog,
            dim,
            samples,
            stage1_accepted: Vec::with_capacity(capacity),
            stage2_accepted: Vec::with_capacity(capacity),
            n_hf_cumulative: Vec::with_capacity(capacity),
            n_grad_lf_cumulative: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, x: &[f64], stage1: bool, stage2: bool, n_hf: u64, n_grad: u64) {
        self.samples.extend_from_slice(x);
        self.stage1_accepted.push(stage1);
        self.stage2_accepted.push(stage2);
        self.n_hf_cumulative.push(n_hf);
        self.n_grad_lf_cumulative.push(n_grad);
    }

    /// Assembles a record from raw parts, checking the structural invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        kernel: KernelKind,
        n_leapfrog: usize,
        dim: usize,
        samples: Vec<f64>,
        stage1_accepted: Vec<bool>,
        stage2_accepted: Vec<bool>,
        n_hf_cumulative: Vec<u64>,
        n_grad_lf_cumulative: Vec<u64>,
    ) -> Result<Self> {
        let m = stage1_accepted.len();
        if dim == 0 || samples.len() != (m + 1) * dim {
            return Err(Error::DimensionMismatch {
                expected: (m + 1) * dim,
                found: samples.len(),
            });
        }
        for len in [stage2_accepted.len(), n_hf_cumulative.len(), n_grad_lf_cumulative.len()] {
            if len != m {
                return Err(Error::DimensionMismatch { expected: m, found: len });
            }
        }
        if n_hf_cumulative.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidState("n_hf_cumulative must be non-decreasing".into()));
        }
        if stage1_accepted.iter().zip(&stage2_accepted).any(|(&s1, &s2)| s2 && !s1) {
            return Err(Error::InvalidState("stage-2 acceptance without stage-1 acceptance".into()));
        }
        Ok(Self {
            kernel,
            n_leapfrog,
            dim,
            samples,
            stage1_accepted,
            stage2_accepted,
            n_hf_cumulative,
            n_grad_lf_cumulative,
        })
    }

    /// Wraps a plain sequence of draws (`rows[0]` is the start) as a chain in
    /// which every move was accepted at the cost of one evaluation.
    pub fn from_samples(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if dim == 0 || rows.is_empty() || !rows.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let m = rows.len() / dim - 1;
        Self::from_parts(
            KernelKind::Mfhmc,
            1,
            dim,
            rows,
            vec![true; m],
            vec![true; m],
            (2..=m as u64 + 1).collect(),
            vec![0; m],
        )
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub fn n_leapfrog(&self) -> usize {
        self.n_leapfrog
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of iterations (samples minus the start).
    pub fn n_iterations(&self) -> usize {
        self.stage1_accepted.len()
    }

    /// Sample `i`, where 0 is the starting state.
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim)
    }

    pub fn stage1_accepted(&self) -> &[bool] {
        &self.stage1_accepted
    }

    pub fn stage2_accepted(&self) -> &[bool] {
        &self.stage2_accepted
    }

    pub fn n_hf_cumulative(&self) -> &[u64] {
        &self.n_hf_cumulative
    }

    pub fn n_grad_lf_cumulative(&self) -> &[u64] {
        &self.n_grad_lf_cumulative
    }

    /// Sample indices kept after discarding the first `floor(frac·m)` iterations.
    /// The starting state is never kept.
    pub fn post_burn_in(&self, burn_in_frac: f64) -> Range<usize> {
        let m = self.n_iterations();
        let burn = (burn_in_frac * m as f64).floor() as usize;
        (burn.min(m) + 1)..(m + 1)
    }

    /// High-fidelity log-density evaluations, including the one at the start.
    pub fn hf_density_evaluations(&self) -> u64 {
        self.n_hf_cumulative.last().copied().unwrap_or(1)
    }

    pub fn gradient_evaluations(&self) -> u64 {
        self.n_grad_lf_cumulative.last().copied().unwrap_or(0)
    }

    /// Cumulative high-fidelity cost after iteration `i` (1-based; 0 is the
    /// start). MFHMC pays one density evaluation per stage-1 acceptance plus
    /// the initial one. HMC pays `2·L` per iteration: every gradient needs a
    /// forward and an adjoint solve.
    pub fn hf_work_after(&self, i: usize) -> u64 {
        match self.kernel {
            KernelKind::Mfhmc => {
                if i == 0 {
                    1
                } else {
                    self.n_hf_cumulative[i - 1]
                }
            }
            KernelKind::Hmc => 2 * self.n_leapfrog as u64 * i as u64,
        }
    }

    pub fn hf_work(&self) -> u64 {
        self.hf_work_after(self.n_iterations())
    }

    /// Number of moves accepted by the final (high-fidelity) decision.
    pub fn accepted_moves(&self) -> usize {
        self.stage2_accepted.iter().filter(|&&a| a).count()
    }

    pub fn stage1_acceptances(&self) -> usize {
        self.stage1_accepted.iter().filter(|&&a| a).count()
    }

    /// Prefix of the chain that stops after the first iteration at which the
    /// high-fidelity work reaches `cap`.
    pub fn truncate_to_budget(&self, cap: u64) -> ChainRecord {
        let m = self.n_iterations();
        let keep = (1..=m).find(|&i| self.hf_work_after(i) >= cap).unwrap_or(m);
        self.prefix(keep)
    }

    /// First `iterations` iterations of the chain.
    pub fn prefix(&self, iterations: usize) -> ChainRecord {
        let k = iterations.min(self.n_iterations());
        ChainRecord {
            kernel: self.kernel,
            n_leapfrog: self.n_leapfrog,
            dim: self.dim,
            samples: self.samples[..(k + 1) * self.dim].to_vec(),
            stage1_accepted: self.stage1_accepted[..k].to_vec(),
            stage2_accepted: self.stage2_accepted[..k].to_vec(),
            n_hf_cumulative: self.n_hf_cumulative[..k].to_vec(),
            n_grad_lf_cumulative: self.n_grad_lf_cumulative[..k].to_vec(),
        }
    }

    /// Per-coordinate mean over the given sample indices.
    pub fn mean(&self, range: Range<usize>) -> DVector<f64> {
        let n = range.len() as f64;
        let mut acc = DVector::zeros(self.dim);
        for i in range {
            for (a, v) in acc.iter_mut().zip(self.sample(i)) {
                *a += v;
            }
        }
        acc / n
    }
}

fn check_start(dim: usize, start: &StateVector) -> Result<()> {
    if start.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: start.dim(),
        });
    }
    Ok(())
}

/// Runs `config.n_steps` HMC iterations from `start`, seeded by `config.seed`.
pub fn run_hmc<T: GradientLogDensity + ?Sized>(
    start: &StateVector,
    target: &T,
    config: &KernelConfig,
) -> Result<ChainRecord> {
    run_hmc_with(start, target, config, &mut seeded(config.seed), None)
}

/// HMC chain on an explicit random stream, optionally stopping once the
/// high-fidelity work reaches `budget`.
pub fn run_hmc_with<T: GradientLogDensity + ?Sized>(
    start: &StateVector,
    target: &T,
    config: &KernelConfig,
    rng: &mut ChainRng,
    budget: Option<u64>,
) -> Result<ChainRecord> {
    config.validate()?;
    check_start(target.dim(), start)?;
    let mut log_density = target.log_density(start);
    if !log_density.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let mut record = ChainRecord::start(KernelKind::Hmc, config.n_leapfrog, start, config.n_steps);
    let mut current = start.clone();
    let per_iteration = config.n_leapfrog as u64 + 1;
    for i in 1..=config.n_steps {
        let out = hmc_step(&current, log_density, target, config, rng).map_err(|e| e.at_iteration(i))?;
        current = out.next;
        log_density = out.log_density;
        record.push(
            current.as_slice(),
            out.accepted,
            out.accepted,
            1 + i as u64,
            per_iteration * i as u64,
        );
        if budget.is_some_and(|cap| record.hf_work() >= cap) {
            break;
        }
    }
    Ok(record)
}

/// Runs `config.n_steps` MFHMC iterations from `start`, seeded by `config.seed`.
pub fn run_mfhmc<H: LogDensity, L: GradientLogDensity>(
    start: &StateVector,
    target: &DualFidelityTarget<H, L>,
    config: &KernelConfig,
) -> Result<ChainRecord> {
    run_mfhmc_with(start, target, config, &mut seeded(config.seed), None)
}

/// MFHMC chain on an explicit random stream, optionally stopping once the
/// high-fidelity evaluation count reaches `budget`.
pub fn run_mfhmc_with<H: LogDensity, L: GradientLogDensity>(
    start: &StateVector,
    target: &DualFidelityTarget<H, L>,
    config: &KernelConfig,
    rng: &mut ChainRng,
    budget: Option<u64>,
) -> Result<ChainRecord> {
    config.validate()?;
    check_start(target.dim(), start)?;
    let mut cache = DensityCache {
        hf: target.hf_log_density(start),
        lf: target.lf_log_density(start),
    };
    if !(cache.hf.is_finite() && cache.lf.is_finite()) {
        return Err(Error::NonFiniteStart);
    }
    let mut record = ChainRecord::start(KernelKind::Mfhmc, config.n_leapfrog, start, config.n_steps);
    let mut current = start.clone();
    let mut n_hf = 1u64;
    let per_iteration = config.n_leapfrog as u64 + 1;
    for i in 1..=config.n_steps {
        let out = mfhmc_step(&current, cache, target, config, rng).map_err(|e| e.at_iteration(i))?;
        n_hf += u64::from(out.stage1);
        current = out.next;
        cache = out.cache;
        record.push(
            current.as_slice(),
            out.stage1,
            out.stage2,
            n_hf,
            per_iteration * i as u64,
        );
        if budget.is_some_and(|cap| n_hf >= cap) {
            break;
        }
    }
    Ok(record)
}
