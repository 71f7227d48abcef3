//! The planar construction: u, V and the Dirac residual along a ray.
use dirac_lab::algebra::DEFAULT_H_FACTOR;
use dirac_lab::build2d::Construction2D;
use dirac_lab::params::{ConstructionParams, Dimension};
use num_complex::Complex64;

fn main() -> dirac_lab::Result<()> {
    let c = Construction2D::build(ConstructionParams::new(0.0, 41, 4, Dimension::Two)?)?;
    println!("radii: {:?}", c.decomp.rho);
    println!("       r       ln|u|       |V|     residual");
    let (lo, hi) = (c.decomp.rho[0] / 4.0, c.decomp.outer_radius());
    for i in 0..=24 {
        let r = lo + (hi - lo) * i as f64 / 24.0 * (1.0 - 1e-4);
        let z = Complex64::from_polar(r, 0.7);
        let u = c.eval_u(z)?;
        let v = c.eval_v(z)?.norm();
        let res = if c.origin.transition_position(r).is_some() {
            // Inside the core transition shells central differences cannot
            // resolve the cutoff tails; compare with the closed form instead.
            let du = c.dirac_u(z)?;
            du.relative_difference(&c.eval_v(z)?.apply(&u)) * (du.log_mag - u.log_mag).exp()
        } else {
            c.residual(z, c.default_step(r, DEFAULT_H_FACTOR))?
        };
        println!("{r:8.4} {:11.4} {v:9.3e} {res:10.2e}", u.log_mag);
    }
    Ok(())
}
