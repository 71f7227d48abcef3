//! Legendre values, spinor harmonics and the normalized spinors F_m.
use std::f64::consts::PI;

use dirac_lab::specfun::{
    assoc_legendre, f_m, f_m_constant, f_m_floor_ratio, legendre_sandwich, spinor_harm,
    AngularPoint, HalfInteger,
};

fn main() -> dirac_lab::Result<()> {
    println!("P_1^1(0) = {}", assoc_legendre(1, 1, 0.0)?);
    println!("P_400^1(0.3) = {:e}", assoc_legendre(400, 1, 0.3)?);

    let p = AngularPoint::new(0.8, 1.9)?;
    let y = spinor_harm(-3, HalfInteger::HALF, p)?;
    println!("Y_(-3,1/2)(0.8, 1.9) = ({:.6}, {:.6})", y[0], y[1]);

    for m in [11, 41, 201] {
        let c = f_m_constant(m)?;
        let eq = f_m(m, AngularPoint::new(PI / 2.0, 0.0)?)?;
        println!(
            "m = {m:3}: c_m = {c:.5}, |F_m(equator)| = {:.5}, min|F_m| m^(7/4) = {:.3}",
            (eq[0].norm_sqr() + eq[1].norm_sqr()).sqrt(),
            f_m_floor_ratio(m)?
        );
    }
    let st = legendre_sandwich(200, 1001);
    println!("sandwich: min Q l^(3/2) = {:.4}, max Q/(l(l+1)) = {:.6}", st.lower, st.upper);
    Ok(())
}
