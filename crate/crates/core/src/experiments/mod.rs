//! Seeded, seed-averaged reproductions of the two validation studies.

mod heat;
mod mvn;

use std::fmt;
use std::io::Write;

pub use heat::{run_heat_experiment, HeatExperimentConfig, HeatProblem, HeatRow, HeatTable, HEAT_TABLE_HEADER};
pub use mvn::{run_mvn_experiment, MvnProblem, SweepSpec};

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::matrix_csv::format_f64;
use crate::sampler::KernelKind;

/// Which surrogate a cell used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fidelity {
    /// The high-fidelity target itself (single-stage HMC).
    High,
    /// γ-perturbed Gaussian surrogate.
    Gamma(f64),
    /// TSVD surrogate with this many retained modes.
    Modes(usize),
    /// Surrogate supplied from outside the library.
    External,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Fidelity::High => "hf".to_string(),
            Fidelity::Gamma(g) => format!("{g:e}"),
            Fidelity::Modes(k) => k.to_string(),
            Fidelity::External => "external".to_string(),
        };
        f.pad(&label)
    }
}

/// One (algorithm, fidelity, trajectory, budget, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub algorithm: KernelKind,
    pub fidelity: Fidelity,
    pub epsilon: f64,
    pub n_leapfrog: usize,
    pub budget: u64,
    /// Seed index, or `None` for a seed-averaged row.
    pub seed: Option<usize>,
    pub report: DiagnosticsReport,
}

impl CellResult {
    /// Error in the posterior mean when a reference mean exists, otherwise
    /// the covariance error.
    pub fn rel_err_pct(&self) -> f64 {
        self.report
            .rel_error_mean_pct
            .or(self.report.rel_error_cov_pct)
            .unwrap_or(f64::NAN)
    }

    fn same_cell(&self, other: &CellResult) -> bool {
        self.algorithm == other.algorithm
            && self.fidelity == other.fidelity
            && self.epsilon == other.epsilon
            && self.n_leapfrog == other.n_leapfrog
            && self.budget == other.budget
    }
}

pub const CELL_CSV_HEADER: &str =
    "algorithm,gamma_or_modes,epsilon,L,budget,seed,accepted_per_hf,ess_per_hf,esjd_per_hf,rel_err_pct,coverage95,n_hf";

pub fn write_cells<W: Write>(out: &mut W, cells: &[CellResult]) -> std::io::Result<()> {
    writeln!(out, "{CELL_CSV_HEADER}")?;
    for c in cells {
        let seed = c.seed.map_or_else(|| "mean".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.algorithm.name(),
            c.fidelity,
            format_f64(c.epsilon),
            c.n_leapfrog,
            c.budget,
            seed,
            format_f64(c.report.accepted_per_hf),
            format_f64(c.report.ess_per_hf),
            format_f64(c.report.esjd_per_hf),
            format_f64(c.rel_err_pct()),
            format_f64(c.report.coverage95),
            c.report.n_hf_total,
        )?;
    }
    Ok(())
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn mean_opt<'a>(reports: &[&'a DiagnosticsReport], f: impl Fn(&'a DiagnosticsReport) -> Option<f64>) -> Option<f64> {
    let values: Option<Vec<f64>> = reports.iter().map(|r| f(r)).collect();
    values.map(|v| mean_of(v.into_iter()))
}

/// Arithmetic mean of each metric over a group of per-seed reports. Counts are
/// rounded to the nearest integer.
pub fn average_reports(reports: &[&DiagnosticsReport]) -> Result<DiagnosticsReport> {
    if reports.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, found: 0 });
    }
    let avg = |f: fn(&DiagnosticsReport) -> f64| mean_of(reports.iter().map(|r| f(r)));
    Ok(DiagnosticsReport {
        accepted_per_hf: avg(|r| r.accepted_per_hf),
        ess_per_hf: avg(|r| r.ess_per_hf),
        esjd_per_hf: avg(|r| r.esjd_per_hf),
        rel_error_mean_pct: mean_opt(reports, |r| r.rel_error_mean_pct),
        rel_error_cov_pct: mean_opt(reports, |r| r.rel_error_cov_pct),
        coverage95: avg(|r| r.coverage95),
        n_hf_total: avg(|r| r.n_hf_total as f64).round() as u64,
        n_hf_density_evals: avg(|r| r.n_hf_density_evals as f64).round() as u64,
        n_grad_evals: avg(|r| r.n_grad_evals as f64).round() as u64,
        stage1_acceptance: avg(|r| r.stage1_acceptance),
        stage2_acceptance: avg(|r| r.stage2_acceptance),
        m_post_burnin: avg(|r| r.m_post_burnin as f64).round() as usize,
    })
}

/// Collapses per-seed cells into one seed-averaged cell per configuration,
/// preserving first-appearance order.
pub fn average_over_seeds(cells: &[CellResult]) -> Result<Vec<CellResult>> {
    let mut groups: Vec<Vec<&CellResult>> = Vec::new();
    for cell in cells {
        match groups.iter_mut().find(|g| g[0].same_cell(cell)) {
            Some(g) => g.push(cell),
            None => groups.push(vec![cell]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let reports: Vec<&DiagnosticsReport> = g.iter().map(|c| &c.report).collect();
            Ok(CellResult {
                seed: None,
                report: average_reports(&reports)?,
                ..g[0].clone()
            })
        })
        .collect()
}
