//! The spatial construction: zero modes, u and V at a few points.
use dirac_lab::algebra::DEFAULT_H_FACTOR;
use dirac_lab::build3d::Construction3D;
use dirac_lab::params::{ConstructionParams, Dimension};

fn main() -> dirac_lab::Result<()> {
    let c = Construction3D::build(ConstructionParams::new(0.5, 41, 3, Dimension::Three)?)?;
    println!("interior mode: r^{} Y_({}, 1/2)", c.interior.power, c.interior.kappa);
    let dir = [0.48f64, -0.6, 0.64];
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    for k in 0..c.decomp.annuli() {
        let s = c.decomp.rho_sub[k];
        for j in 0..4 {
            let r = 0.5 * (s[j] + s[j + 1]);
            let x = dir.map(|v| v / norm * r);
            let u = c.eval_u(x)?;
            let res = c.residual(x, c.default_step(r, DEFAULT_H_FACTOR))?;
            println!(
                "annulus {k} quarter {j}: r = {r:8.4}  ln|u| = {:10.4}  |V| = {:9.3e}  residual = {res:.2e}",
                u.log_mag,
                c.eval_v(x)?.norm()
            );
        }
    }
    Ok(())
}
