//! ESS, ESJD and coverage on synthetic chains with known answers.

use mfhmc::diagnostics::{coverage95, esjd, min_ess};
use mfhmc::rng::seeded;
use mfhmc::sampler::ChainRecord;
use rand::Rng;
use rand_distr::StandardNormal;

fn ar1(phi: f64, n: usize, seed: u64) -> ChainRecord {
    let mut rng = seeded(seed);
    let mut x = 0.0;
    let rows = (0..=n)
        .map(|_| {
            let e: f64 = rng.sample(StandardNormal);
            x = phi * x + (1.0 - phi * phi).sqrt() * e;
            x
        })
        .collect();
    ChainRecord::from_samples(1, rows).unwrap()
}

fn main() {
    let n = 20_000;
    println!("{:>6} {:>10} {:>10} {:>8}", "phi", "ESS", "theory", "ESJD");
    for phi in [0.0, 0.5, 0.9] {
        let chain = ar1(phi, n, 1);
        let theory = n as f64 * (1.0 - phi) / (1.0 + phi);
        let ess = min_ess(&chain, 1..n + 1);
        let jump = esjd(chain.samples()).unwrap();
        println!("{phi:>6} {ess:>10.0} {theory:>10.0} {jump:>8.3}");
    }

    let mut rng = seeded(2);
    let truth: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
    let mean = vec![0.0; truth.len()];
    let std = vec![1.0; truth.len()];
    println!("coverage95 of N(0,1) truth: {:.4}", coverage95(&mean, &std, &truth).unwrap());
}
