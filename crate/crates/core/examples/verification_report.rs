//! Full verification report for one configuration, as the CLI writes it.
use dirac_lab::cli::{verification_report, RunConfig};

fn main() -> dirac_lab::Result<()> {
    let config = RunConfig {
        dimension: 3,
        epsilon: 0.5,
        samples_per_annulus: 64,
        ..Default::default()
    };
    let report = verification_report(&config)?;
    for c in &report.checks {
        println!(
            "{:<28} {:5} statistic = {:.4e} (threshold {:.1e}, {} samples)",
            c.name, c.pass, c.statistic, c.threshold, c.samples
        );
    }
    println!("all pass: {}", report.all_pass());
    Ok(())
}
