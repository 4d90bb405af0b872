//! MFHMC on a correlated 2-D Gaussian with a deliberately wrong surrogate.
//! The second stage corrects the bias, so the chain still targets the
//! high-fidelity distribution.

use mfhmc::diagnostics::{min_ess, sample_covariance};
use mfhmc::sampler::{run_mfhmc, KernelConfig, StateVector};
use mfhmc::targets::{DualFidelityTarget, MvnTarget};
use nalgebra::{DMatrix, DVector};

fn main() {
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]);
    let hf = MvnTarget::from_covariance(&cov).unwrap();
    // surrogate is too wide and ignores the correlation
    let lf = MvnTarget::from_covariance(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 1.5]))).unwrap();
    let target = DualFidelityTarget::new(&hf, &lf).unwrap();

    let config = KernelConfig::new(0.3, 5, 20_000, 3).unwrap();
    let chain = run_mfhmc(&StateVector::zeros(2).unwrap(), &target, &config).unwrap();
    let range = chain.post_burn_in(config.burn_in_frac);

    println!("stage-1 acceptances: {}", chain.stage1_acceptances());
    println!("accepted moves:      {}", chain.accepted_moves());
    println!("HF evaluations:      {}", chain.hf_density_evaluations());
    println!("min ESS:             {:.0}", min_ess(&chain, range.clone()));
    println!("mean:       {:.3?}", chain.mean(range.clone()).as_slice());
    println!("covariance: {:.3?}", sample_covariance(&chain, range).as_slice());
    println!("target:     {:.3?}", cov.as_slice());
}
