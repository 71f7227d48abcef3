//! The smooth transition profile and the annulus cutoffs built from it.
use dirac_lab::params::{AnnulusDecomposition, ConstructionParams, Dimension};
use dirac_lab::smooth::{chi, chi_k, chi_prime, chitilde_k};

fn main() -> dirac_lab::Result<()> {
    println!("   s        chi(s)      chi'(s)");
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        println!("{s:4.1} {:13.6e} {:12.6e}", chi(s), chi_prime(s));
    }
    let dc = AnnulusDecomposition::build(ConstructionParams::new(0.0, 41, 2, Dimension::Two)?)?;
    let q = dc.rho_sub[0];
    println!("annulus 0 quarter points: {q:?}");
    for j in 0..=8 {
        let r = q[0] + (q[4] - q[0]) * j as f64 / 8.0;
        let (a, b) = (chi_k(r, 0, &dc)?, chitilde_k(r, 0, &dc)?);
        println!("r = {r:.4}: chi = {:.6}  chitilde = {:.6}", a.value, b.value);
    }
    Ok(())
}
