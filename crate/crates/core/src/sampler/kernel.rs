//! Single transitions of the one-stage HMC kernel and the two-stage
//! multi-fidelity kernel.

use nalgebra::DVector;
use rand::Rng;

use super::leapfrog::integrate;
use super::state::{kinetic_energy, KernelConfig, PhasePoint, StateVector};
use crate::error::Result;
use crate::rng::{sample_momentum, uniform};
use crate::targets::{DualFidelityTarget, GradientLogDensity, LogDensity};

/// Result of one HMC transition.
#[derive(Debug, Clone)]
pub struct HmcOutcome {
    pub next: StateVector,
    pub accepted: bool,
    /// Energy error of the proposal; `+∞` when the proposal has zero density.
    pub delta_h: f64,
    /// Log-density at `next`.
    pub log_density: f64,
}

/// Log-densities of the retained state, carried between MFHMC iterations so
/// the high-fidelity model is never re-evaluated at a state it has seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCache {
    pub hf: f64,
    pub lf: f64,
}

/// Result of one MFHMC transition.
#[derive(Debug, Clone)]
pub struct MfhmcOutcome {
    pub next: StateVector,
    pub stage1: bool,
    pub stage2: bool,
    pub delta_h: f64,
    pub cache: DensityCache,
}

/// `min(1, exp(log_ratio))`, with NaN mapped to zero.
pub fn acceptance_probability(log_ratio: f64) -> f64 {
    if log_ratio.is_nan() {
        0.0
    } else {
        log_ratio.min(0.0).exp()
    }
}

/// Second-stage log acceptance ratio for moving from `current` to `proposal`.
///
/// Both are cached unnormalized log-posteriors. A non-finite high-fidelity
/// value at the proposal gives `-∞`.
pub fn second_stage_log_ratio(current: DensityCache, proposal: DensityCache) -> f64 {
    if !proposal.hf.is_finite() {
        return f64::NEG_INFINITY;
    }
    (proposal.hf - current.hf) + (current.lf - proposal.lf)
}

struct Proposal {
    position: DVector<f64>,
    log_density: f64,
    delta_h: f64,
}

/// Draws a momentum, integrates under `target`, and returns the end point
/// together with its energy error.
fn propose<T>(
    current: &StateVector,
    current_log_density: f64,
    target: &T,
    config: &KernelConfig,
    momentum: DVector<f64>,
) -> Result<Proposal>
where
    T: GradientLogDensity + ?Sized,
{
    let h0 = -current_log_density + kinetic_energy(&momentum);
    let start = PhasePoint {
        position: (**current).clone(),
        momentum,
    };
    let (end, u_end) = integrate(&start, config.epsilon, config.n_leapfrog, |x| {
        let (log_p, grad) = target.log_density_and_gradient(x);
        (-log_p, -grad)
    })?;
    let log_density = -u_end;
    let delta_h = if log_density.is_finite() && end.position.iter().all(|v| v.is_finite()) {
        let h1 = u_end + kinetic_energy(&end.momentum);
        let dh = h1 - h0;
        if dh.is_nan() {
            f64::INFINITY
        } else {
            dh
        }
    } else {
        f64::INFINITY
    };
    Ok(Proposal {
        position: end.position,
        log_density,
        delta_h,
    })
}

/// One HMC transition from `current`, whose log-density is `current_log_density`.
///
/// Consumes, in order, the momentum draw and two uniforms from `rng`; the
/// second uniform is unused so that the stream matches [`mfhmc_step`].
pub fn hmc_step<T, R>(
    current: &StateVector,
    current_log_density: f64,
    target: &T,
    config: &KernelConfig,
    rng: &mut R,
) -> Result<HmcOutcome>
where
    T: GradientLogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let momentum = sample_momentum(rng, current.dim());
    let u1 = uniform(rng);
    let _u2 = uniform(rng);
    let proposal = propose(current, current_log_density, target, config, momentum)?;
    let accepted = u1 < acceptance_probability(-proposal.delta_h);
    Ok(if accepted {
        HmcOutcome {
            next: StateVector::new(proposal.position)?,
            accepted,
            delta_h: proposal.delta_h,
            log_density: proposal.log_density,
        }
    } else {
        HmcOutcome {
            next: current.clone(),
            accepted,
            delta_h: proposal.delta_h,
            log_density: current_log_density,
        }
    })
}

/// One two-stage transition.
///
/// Stage 1 is a full HMC proposal and accept/reject under the low-fidelity
/// posterior. A stage-1 rejection returns `current` without touching the
/// high-fidelity model. A stage-1 acceptance costs exactly one high-fidelity
/// evaluation at the proposal, followed by a Metropolis correction against
/// the high-fidelity posterior.
pub fn mfhmc_step<H, L, R>(
    current: &StateVector,
    cache: DensityCache,
    target: &DualFidelityTarget<H, L>,
    config: &KernelConfig,
    rng: &mut R,
) -> Result<MfhmcOutcome>
where
    H: LogDensity,
    L: GradientLogDensity,
    R: Rng + ?Sized,
{
    let momentum = sample_momentum(rng, current.dim());
    let u1 = uniform(rng);
    let u2 = uniform(rng);
    let proposal = propose(current, cache.lf, target.low(), config, momentum)?;
    let stage1 = u1 < acceptance_probability(-proposal.delta_h);
    if !stage1 {
        return Ok(MfhmcOutcome {
            next: current.clone(),
            stage1,
            stage2: false,
            delta_h: proposal.delta_h,
            cache,
        });
    }
    let proposed = DensityCache {
        hf: target.hf_log_density(&proposal.position),
        lf: proposal.log_density,
    };
    let stage2 = u2 < acceptance_probability(second_stage_log_ratio(cache, proposed));
    Ok(if stage2 {
        MfhmcOutcome {
            next: StateVector::new(proposal.position)?,
            stage1,
            stage2,
            delta_h: proposal.delta_h,
            cache: proposed,
        }
    } else {
        MfhmcOutcome {
            next: current.clone(),
            stage1,
            stage2,
            delta_h: proposal.delta_h,
            cache,
        }
    })
}
