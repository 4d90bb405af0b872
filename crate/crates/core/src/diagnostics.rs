//! Sampler efficiency and accuracy metrics, all normalized by high-fidelity
//! cost where the metric is a rate.
//!
//! Conventions:
//! - Burn-in drops the first `floor(frac·m)` iterations; the starting state is
//!   never part of the statistics.
//! - Autocovariances use the biased `1/M` normalization.
//! - The ESS lag sum stops before the first lag whose autocorrelation drops
//!   below [`ESS_TRUNCATION`].
//! - Normalizing HF counts include burn-in. MFHMC cost is density evaluations;
//!   HMC cost is `2·L` per iteration (forward + adjoint solve per gradient).

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sampler::{ChainRecord, KernelKind};

pub const ESS_TRUNCATION: f64 = 0.05;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Lag-`lag` autocorrelation of `series` with the biased estimator.
pub fn autocorrelation(series: &[f64], lag: usize) -> Result<f64> {
    let m = series.len();
    if m < 2 {
        return Err(Error::SeriesTooShort { needed: 2, found: m });
    }
    if lag >= m {
        return Err(Error::SeriesTooShort {
            needed: lag + 1,
            found: m,
        });
    }
    let mean = series.iter().sum::<f64>() / m as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let cov = series
        .iter()
        .zip(&series[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / m as f64;
    Ok(cov / var)
}

/// All autocorrelations of `series` at lags `0..M`, via zero-padded FFT.
fn autocorrelations(series: &[f64], planner: &mut FftPlanner<f64>) -> Option<Vec<f64>> {
    let m = series.len();
    let mean = series.iter().sum::<f64>() / m as f64;
    let n = (2 * m).next_power_of_two();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    forward.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    inverse.process(&mut buf);
    let c0 = buf[0].re;
    if !(c0 > 0.0) || c0 < 1e-300 * n as f64 {
        return None;
    }
    Some(buf[..m].iter().map(|c| c.re / c0).collect())
}

/// Effective sample size of one series; zero for a constant series.
fn ess_of_series(series: &[f64], planner: &mut FftPlanner<f64>) -> f64 {
    let m = series.len();
    let mean = series.iter().sum::<f64>() / m as f64;
    if series.iter().all(|&x| x == mean) {
        return 0.0;
    }
    let Some(rho) = autocorrelations(series, planner) else {
        return 0.0;
    };
    let mut sum = 0.0;
    for (s, &r) in rho.iter().enumerate().skip(1) {
        if r < ESS_TRUNCATION {
            break;
        }
        sum += (1.0 - s as f64 / m as f64) * r;
    }
    m as f64 / (1.0 + 2.0 * sum)
}

fn column(chain: &ChainRecord, range: Range<usize>, d: usize) -> Vec<f64> {
    range.map(|i| chain.sample(i)[d]).collect()
}

/// Minimum over coordinates of the effective sample size of the given samples.
pub fn min_ess(chain: &ChainRecord, range: Range<usize>) -> f64 {
    let mut planner = FftPlanner::new();
    (0..chain.dim())
        .map(|d| ess_of_series(&column(chain, range.clone(), d), &mut planner))
        .fold(f64::INFINITY, f64::min)
}

/// Per-coordinate effective sample sizes.
pub fn ess_per_dimension(chain: &ChainRecord, range: Range<usize>) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    (0..chain.dim())
        .map(|d| ess_of_series(&column(chain, range.clone(), d), &mut planner))
        .collect()
}

/// Minimum per-coordinate ESS of the post-burn-in chain divided by `n_hf_total`.
pub fn ess_per_hf(chain: &ChainRecord, burn_in_frac: f64, n_hf_total: u64) -> Result<f64> {
    let range = chain.post_burn_in(burn_in_frac);
    if range.len() < 10 {
        return Err(Error::SeriesTooShort {
            needed: 10,
            found: range.len(),
        });
    }
    if n_hf_total == 0 {
        return Err(Error::NoHfEvaluations);
    }
    Ok(min_ess(chain, range) / n_hf_total as f64)
}

/// Mean squared Euclidean jump between consecutive rows.
pub fn esjd<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<f64> {
    let mut rows = rows.into_iter();
    let Some(mut prev) = rows.next() else {
        return Err(Error::SeriesTooShort { needed: 2, found: 0 });
    };
    let mut total = 0.0;
    let mut count = 0usize;
    for row in rows {
        total += row.iter().zip(prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        count += 1;
        prev = row;
    }
    if count == 0 {
        return Err(Error::SeriesTooShort { needed: 2, found: 1 });
    }
    Ok(total / count as f64)
}

/// Post-burn-in expected squared jump distance divided by `n_hf_total`.
pub fn esjd_per_hf(chain: &ChainRecord, burn_in_frac: f64, n_hf_total: u64) -> Result<f64> {
    if n_hf_total == 0 {
        return Err(Error::NoHfEvaluations);
    }
    let range = chain.post_burn_in(burn_in_frac);
    Ok(esjd(range.map(|i| chain.sample(i)))? / n_hf_total as f64)
}

/// `‖estimate − truth‖₂ / ‖truth‖₂ × 100` over flattened arrays.
pub fn relative_error_pct(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    let norm = truth.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let diff = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * diff / norm)
}

/// Fraction of entries whose true value lies within `mean ± 1.96·std`.
pub fn coverage95(post_mean: &[f64], post_std: &[f64], truth: &[f64]) -> Result<f64> {
    if post_mean.len() != truth.len() || post_std.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: post_mean.len().min(post_std.len()),
        });
    }
    if truth.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, found: 0 });
    }
    let inside = post_mean
        .iter()
        .zip(post_std)
        .zip(truth)
        .filter(|((m, s), t)| (*t - *m).abs() <= Z95 * **s)
        .count();
    Ok(inside as f64 / truth.len() as f64)
}

/// Accepted moves per unit of high-fidelity cost over the whole chain.
pub fn accepted_moves_per_hf(chain: &ChainRecord) -> Result<f64> {
    let work = chain.hf_work();
    if work == 0 {
        return Err(Error::NoHfEvaluations);
    }
    Ok(chain.accepted_moves() as f64 / work as f64)
}

/// Per-coordinate sample mean and standard deviation (`1/(M−1)`).
pub fn sample_mean_std(chain: &ChainRecord, range: Range<usize>) -> (DVector<f64>, DVector<f64>) {
    let n = range.len();
    let mean = chain.mean(range.clone());
    let mut ss = DVector::zeros(chain.dim());
    for i in range {
        for ((s, x), m) in ss.iter_mut().zip(chain.sample(i)).zip(mean.iter()) {
            *s += (x - m).powi(2);
        }
    }
    let std = ss.map(|s: f64| (s / (n.max(2) - 1) as f64).sqrt());
    (mean, std)
}

/// Sample covariance (`1/(M−1)`).
pub fn sample_covariance(chain: &ChainRecord, range: Range<usize>) -> DMatrix<f64> {
    let n = range.len();
    let mean = chain.mean(range.clone());
    let mut centered = DMatrix::zeros(chain.dim(), n);
    for (c, i) in range.enumerate() {
        for (d, x) in chain.sample(i).iter().enumerate() {
            centered[(d, c)] = x - mean[d];
        }
    }
    let mut cov = DMatrix::zeros(chain.dim(), chain.dim());
    centered.mul_to(&centered.transpose(), &mut cov);
    cov / (n.max(2) - 1) as f64
}

/// Ground truth a chain is scored against.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    /// True parameter used for coverage.
    pub truth: &'a DVector<f64>,
    pub posterior_mean: Option<&'a DVector<f64>>,
    pub posterior_covariance: Option<&'a DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub accepted_per_hf: f64,
    pub ess_per_hf: f64,
    pub esjd_per_hf: f64,
    pub rel_error_mean_pct: Option<f64>,
    pub rel_error_cov_pct: Option<f64>,
    pub coverage95: f64,
    /// HF cost used for normalization (see module docs).
    pub n_hf_total: u64,
    pub n_hf_density_evals: u64,
    pub n_grad_evals: u64,
    pub stage1_acceptance: f64,
    /// Second-stage acceptances per second-stage trial.
    pub stage2_acceptance: f64,
    pub m_post_burnin: usize,
}

impl DiagnosticsReport {
    /// `(name, value)` rows in a fixed order; absent optional metrics are NaN.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("accepted_per_hf", self.accepted_per_hf),
            ("ess_per_hf", self.ess_per_hf),
            ("esjd_per_hf", self.esjd_per_hf),
            ("rel_error_mean_pct", self.rel_error_mean_pct.unwrap_or(f64::NAN)),
            ("rel_error_cov_pct", self.rel_error_cov_pct.unwrap_or(f64::NAN)),
            ("coverage95", self.coverage95),
            ("n_hf_total", self.n_hf_total as f64),
            ("n_hf_density_evals", self.n_hf_density_evals as f64),
            ("n_grad_evals", self.n_grad_evals as f64),
            ("stage1_acceptance", self.stage1_acceptance),
            ("stage2_acceptance", self.stage2_acceptance),
            ("m_post_burnin", self.m_post_burnin as f64),
        ]
    }
}

/// Computes every metric for `chain` against `reference`.
pub fn diagnose(chain: &ChainRecord, burn_in_frac: f64, reference: Reference<'_>) -> Result<DiagnosticsReport> {
    let n_hf_total = chain.hf_work();
    let range = chain.post_burn_in(burn_in_frac);
    let (mean, std) = sample_mean_std(chain, range.clone());
    let rel_error_mean_pct = reference
        .posterior_mean
        .map(|m| relative_error_pct(mean.as_slice(), m.as_slice()))
        .transpose()?;
    let rel_error_cov_pct = reference
        .posterior_covariance
        .map(|c| relative_error_pct(sample_covariance(chain, range.clone()).as_slice(), c.as_slice()))
        .transpose()?;
    let stage1 = chain.stage1_acceptances();
    let m = chain.n_iterations().max(1);
    let stage2_acceptance = match chain.kernel() {
        KernelKind::Hmc => stage1 as f64 / m as f64,
        KernelKind::Mfhmc if stage1 > 0 => chain.accepted_moves() as f64 / stage1 as f64,
        KernelKind::Mfhmc => 0.0,
    };
    Ok(DiagnosticsReport {
        accepted_per_hf: accepted_moves_per_hf(chain)?,
        ess_per_hf: ess_per_hf(chain, burn_in_frac, n_hf_total)?,
        esjd_per_hf: esjd_per_hf(chain, burn_in_frac, n_hf_total)?,
        rel_error_mean_pct,
        rel_error_cov_pct,
        coverage95: coverage95(mean.as_slice(), std.as_slice(), reference.truth.as_slice())?,
        n_hf_total,
        n_hf_density_evals: chain.hf_density_evaluations(),
        n_grad_evals: chain.gradient_evaluations(),
        stage1_acceptance: stage1 as f64 / m as f64,
        stage2_acceptance,
        m_post_burnin: range.len(),
    })
}
