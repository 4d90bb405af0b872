//! Energy error and time reversibility of the leapfrog integrator on a
//! 10-D standard Gaussian, holding the trajectory length fixed.

use mfhmc::rng::{sample_momentum, seeded};
use mfhmc::sampler::{integrate, kinetic_energy, PhasePoint};
use nalgebra::DVector;

fn potential(x: &DVector<f64>) -> (f64, DVector<f64>) {
    (0.5 * x.norm_squared(), x.clone())
}

fn main() {
    let mut rng = seeded(7);
    let x0 = sample_momentum(&mut rng, 10);
    let p0 = sample_momentum(&mut rng, 10);
    let h0 = potential(&x0).0 + kinetic_energy(&p0);

    println!("{:>8} {:>6} {:>14} {:>14}", "eps", "L", "|dH|", "reversal");
    for (eps, steps) in [(0.2, 5), (0.1, 10), (0.05, 20), (0.025, 40)] {
        let start = PhasePoint::new(x0.clone(), p0.clone()).unwrap();
        let (end, u_end) = integrate(&start, eps, steps, potential).unwrap();
        let dh = u_end + kinetic_energy(&end.momentum) - h0;

        // integrate() already negates the momentum, so a second pass runs backwards
        let (back, _) = integrate(&end, eps, steps, potential).unwrap();
        let residual = (&back.position - &x0).amax();
        println!("{eps:>8} {steps:>6} {:>14.3e} {residual:>14.3e}", dh.abs());
    }
}
