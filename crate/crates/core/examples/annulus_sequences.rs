//! Degrees, radii and log-amplitudes of the annulus decomposition.
use dirac_lab::params::{AnnulusDecomposition, ConstructionParams, Dimension};

fn main() -> dirac_lab::Result<()> {
    for eps in [-0.5, 0.0, 0.5] {
        let p = ConstructionParams::new(eps, 41, 6, Dimension::Two)?;
        let dc = AnnulusDecomposition::build(p)?;
        println!("eps = {eps} (delta = {})", p.delta);
        println!("  k    n_k  d_k        rho_k      ln a_k");
        for k in 0..=dc.annuli() {
            let d = dc.d.get(k).map_or("-".to_string(), |d| d.to_string());
            println!("{k:3} {:6} {d:>4} {:12.6} {:11.4}", dc.n[k], dc.rho[k], dc.log_a[k]);
        }
        let dg = dc.diagnostics();
        println!("  log-ratio between neighbouring modes <= {:.3}", dg.log_ratio);
    }
    Ok(())
}
