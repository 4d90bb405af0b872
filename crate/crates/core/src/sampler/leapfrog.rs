use nalgebra::DVector;

use super::state::PhasePoint;
use crate::error::{Error, Result};

/// Integrates `n_leapfrog` leapfrog steps of size `epsilon` from `start` and
/// negates the final momentum.
///
/// `oracle` returns the potential energy and its gradient at a position. It is
/// called exactly `n_leapfrog + 1` times: once at the start and once after
/// every drift. The potential from the last call is returned alongside the end
/// point. A non-finite gradient aborts with the index of the offending call.
pub fn integrate<F>(
    start: &PhasePoint,
    epsilon: f64,
    n_leapfrog: usize,
    mut oracle: F,
) -> Result<(PhasePoint, f64)>
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let mut evaluate = |x: &DVector<f64>, step: usize| {
        let (u, grad) = oracle(x);
        if grad.iter().all(|g| g.is_finite()) {
            Ok((u, grad))
        } else {
            Err(Error::IntegrationFailure { step })
        }
    };

    let mut x = start.position.clone();
    let mut p = start.momentum.clone();
    let (_, grad) = evaluate(&x, 0)?;
    p.axpy(-0.5 * epsilon, &grad, 1.0);
    for step in 1..n_leapfrog {
        x.axpy(epsilon, &p, 1.0);
        let (_, grad) = evaluate(&x, step)?;
        p.axpy(-epsilon, &grad, 1.0);
    }
    x.axpy(epsilon, &p, 1.0);
    let (u_end, grad) = evaluate(&x, n_leapfrog)?;
    p.axpy(-0.5 * epsilon, &grad, 1.0);
    p.neg_mut();
    Ok((PhasePoint { position: x, momentum: p }, u_end))
}

/// Leapfrog trajectory driven by a gradient-of-potential oracle alone.
pub fn leapfrog_trajectory<F>(
    start: &PhasePoint,
    epsilon: f64,
    n_leapfrog: usize,
    mut grad_potential: F,
) -> Result<PhasePoint>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    integrate(start, epsilon, n_leapfrog, |x| (0.0, grad_potential(x))).map(|(end, _)| end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::state::kinetic_energy;

    fn point(x: &[f64], p: &[f64]) -> PhasePoint {
        PhasePoint::new(DVector::from_column_slice(x), DVector::from_column_slice(p)).unwrap()
    }

    #[test]
    fn harmonic_single_step_by_hand() {
        // half kick: ξ = -0.05; drift: x = 0.995; half kick: ξ = -0.05 - 0.04975
        let start = point(&[1.0], &[0.0]);
        let end = leapfrog_trajectory(&start, 0.1, 1, |x| x.clone()).unwrap();
        assert!((end.position[0] - 0.995).abs() < 1e-15);
        assert!((end.momentum[0] - 0.09975).abs() < 1e-15);
        let h0 = 0.5;
        let h1 = 0.5 * end.position[0].powi(2) + kinetic_energy(&end.momentum);
        // exactly 0.995²/2 + 0.09975²/2 - 1/2
        assert!((h1 - h0 + 1.246875e-5).abs() < 1e-15, "{}", h1 - h0);
    }

    #[test]
    fn free_particle_drifts() {
        let start = point(&[1.0, -2.0], &[0.5, 0.25]);
        let end = leapfrog_trajectory(&start, 0.3, 7, |x| DVector::zeros(x.len())).unwrap();
        let drift = 0.3 * 7.0;
        assert!((end.position[0] - (1.0 + drift * 0.5)).abs() < 1e-12);
        assert!((end.position[1] - (-2.0 + drift * 0.25)).abs() < 1e-12);
        assert_eq!(end.momentum, -&start.momentum);
    }

    #[test]
    fn gradient_called_l_plus_one_times() {
        for l in [1usize, 2, 5, 13] {
            let mut calls = 0;
            leapfrog_trajectory(&point(&[0.3], &[1.0]), 0.1, l, |x| {
                calls += 1;
                x.clone()
            })
            .unwrap();
            assert_eq!(calls, l + 1);
        }
    }

    #[test]
    fn reversibility() {
        let start = point(&[0.7, -0.2, 1.5], &[0.1, 0.9, -0.4]);
        let grad = |x: &DVector<f64>| DVector::from_fn(3, |i, _| (i as f64 + 1.0) * x[i]);
        let there = leapfrog_trajectory(&start, 0.05, 20, grad).unwrap();
        let back = leapfrog_trajectory(&there, 0.05, 20, grad).unwrap();
        assert!((back.position - &start.position).amax() < 1e-12);
        assert!((back.momentum - &start.momentum).amax() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_reports_step() {
        let mut calls = 0;
        let err = leapfrog_trajectory(&point(&[0.0], &[1.0]), 0.1, 5, |_| {
            calls += 1;
            if calls == 3 {
                DVector::from_element(1, f64::NAN)
            } else {
                DVector::zeros(1)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { step: 2 }));
    }
}
