//! Seeded random streams.
//!
//! Every chain owns a [`ChainRng`], a ChaCha8 generator. Both kernels consume
//! the stream in the same fixed order each iteration: `D` standard normals for
//! the momentum, one uniform for the first accept/reject decision, one uniform
//! for the second. HMC draws and discards the second uniform so that an HMC
//! chain and an MFHMC chain with identical fidelities stay in lockstep.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type ChainRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for cell `cell` of a sweep rooted at `seed0`.
pub fn cell_stream(seed0: u64, cell: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed0);
    rng.set_stream(cell);
    rng
}

/// Draws a momentum vector of `dim` i.i.d. standard normals.
pub fn sample_momentum<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Uniform on `[0, 1)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_is_deterministic_for_seed() {
        let a = sample_momentum(&mut seeded(42), 3);
        let b = sample_momentum(&mut seeded(42), 3);
        assert_eq!(a, b);
        assert_ne!(a, sample_momentum(&mut seeded(43), 3));
    }

    #[test]
    fn momentum_moments() {
        let mut rng = seeded(7);
        let n = 100_000;
        let dim = 3;
        let mut sum = DVector::zeros(dim);
        let mut sum_sq = DVector::zeros(dim);
        for _ in 0..n {
            let p = sample_momentum(&mut rng, dim);
            sum += &p;
            sum_sq += p.component_mul(&p);
        }
        for d in 0..dim {
            let mean = sum[d] / n as f64;
            let var = sum_sq[d] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.02, "mean {mean}");
            assert!((var - 1.0).abs() < 0.03, "var {var}");
        }
    }

    #[test]
    fn cell_streams_differ() {
        let a = sample_momentum(&mut cell_stream(1, 0), 4);
        let b = sample_momentum(&mut cell_stream(1, 1), 4);
        assert_ne!(a, b);
    }
}
