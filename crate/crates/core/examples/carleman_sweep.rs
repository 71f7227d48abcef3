//! A small Carleman sweep in both dimensions plus the perturbed family.
use dirac_lab::build2d::Construction2D;
use dirac_lab::params::{ConstructionParams, Dimension};
use dirac_lab::verify::{carleman_sweep, perturbed_sweep};

fn main() -> dirac_lab::Result<()> {
    let (taus, alphas, energies) = ([1.0, 4.0], [0.5, 2.0], [-1.0, 1.0]);
    for (dim, grid) in [(Dimension::Two, 64), (Dimension::Three, 32)] {
        let s = carleman_sweep(dim, &taus, &alphas, &energies, 3, 1, grid)?;
        println!("{dim:?}: {} samples, pass = {}, min slack = {:.3}", s.samples.len(), s.pass, s.statistic);
        let t = &s.samples[0].sample;
        println!("  first: tau = {} alpha = {} E = {} lhs = {:.4e} rhs = {:.4e}", t.tau, t.alpha, t.energy, t.lhs, t.rhs);
    }
    let c = Construction2D::build(ConstructionParams::new(0.5, 9, 3, Dimension::Two)?)?;
    let p = perturbed_sweep(&c, &[1.0, 2.0, 4.0, 8.0], &[0.0], 2, 1, 256)?;
    println!("perturbed (alpha = {}, rho = {}): tau* = {:?}", p.alpha, p.rho, p.tau_star);
    Ok(())
}
