//! Command-line front end for the `dirac-lab` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! usage, configuration and I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::build2d::Construction2D;
use crate::params::{ConstructionParams, Dimension};
use crate::verify::{
    carleman_sweep, perturbed_sweep, radial_profile, scan_core, scan_envelope, scan_potential,
    scan_residual, seam_check, CheckRecord, Construction, VerificationReport,
    ENVELOPE_MIN_ANNULI,
};
use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Seam tolerance used by `verify`.
pub const SEAM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: u32,
    pub epsilon: f64,
    pub n0: u64,
    pub k_max: usize,
    pub samples_per_annulus: usize,
    pub h_factor: f64,
    pub grid_n: usize,
    pub tau_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub energy_list: Vec<f64>,
    pub n_spinors: usize,
    /// Smallest tau used for the perturbed family.
    pub tau0: f64,
    pub perturbed_spinors: usize,
    pub perturbed_grid_n: usize,
    pub envelope_rays: usize,
    pub envelope_rows: usize,
    pub profile_rows: usize,
    /// Azimuth of the profile ray.
    pub ray_angle: f64,
    /// Colatitude of the profile ray (3D only).
    pub ray_polar: f64,
    pub seed: u64,
    /// Fill in `seconds` for each check. Off by default so that reports
    /// are byte-identical between runs.
    pub record_timings: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            epsilon: 0.0,
            n0: 41,
            k_max: 6,
            samples_per_annulus: 256,
            h_factor: crate::algebra::DEFAULT_H_FACTOR,
            grid_n: 64,
            tau_list: vec![1.0, 2.0, 4.0, 8.0],
            alpha_list: vec![0.5, 1.0, 2.0],
            energy_list: vec![-1.0, 0.0, 1.0],
            n_spinors: 100,
            tau0: 1.0,
            perturbed_spinors: 4,
            perturbed_grid_n: 512,
            envelope_rays: 8,
            envelope_rows: 400,
            profile_rows: 1000,
            ray_angle: 0.0,
            ray_polar: 1.0,
            seed: 0,
            record_timings: false,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<ConstructionParams> {
        let dim = Dimension::from_u32(self.dimension)?;
        ConstructionParams::new(self.epsilon, self.n0, self.k_max, dim)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let bad = |what: &str| Err(Error::Argument(what.to_string()));
        if self.tau_list.is_empty() || self.alpha_list.is_empty() || self.energy_list.is_empty() {
            return bad("tau_list, alpha_list and energy_list must be nonempty");
        }
        if self.tau_list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("every tau must be positive");
        }
        if self.alpha_list.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("every alpha must be positive");
        }
        if self.energy_list.iter().any(|e| !e.is_finite()) {
            return bad("every energy must be finite");
        }
        if self.samples_per_annulus < 4 {
            return bad("samples_per_annulus must be at least 4");
        }
        if !(self.h_factor > 0.0 && self.h_factor.is_finite()) {
            return bad("h_factor must be positive");
        }
        for (name, g) in [("grid_n", self.grid_n), ("perturbed_grid_n", self.perturbed_grid_n)] {
            if g < 4 || g % 2 == 1 {
                return Err(Error::Argument(format!("{name} must be even and at least 4")));
            }
        }
        if self.envelope_rays == 0 || self.envelope_rows < 10 || self.profile_rows == 0 {
            return bad("envelope_rays > 0, envelope_rows >= 10 and profile_rows > 0 required");
        }
        if !(self.tau0 > 0.0) {
            return bad("tau0 must be positive");
        }
        if !self.ray_angle.is_finite() || !self.ray_polar.is_finite() {
            return bad("ray angles must be finite");
        }
        Ok(())
    }

    /// The config as embedded in reports. `out` is dropped: where a report
    /// is written does not change its contents.
    fn echo(&self) -> serde_json::Value {
        let c = RunConfig {
            out: None,
            ..self.clone()
        };
        serde_json::to_value(c).expect("config serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac-lab", about = "Build and check critically decaying Dirac zero modes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual, potential, seam and envelope checks; writes a JSON report.
    Verify(Overrides),
    /// Radial profile along one ray; writes CSV.
    Profile(Overrides),
    /// Carleman sweeps; writes one JSON sample per line.
    Carleman(Overrides),
}

/// Flags override fields of the `--config` file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dimension: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub samples_per_annulus: Option<usize>,
    #[arg(long)]
    pub h_factor: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tau_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub energy_list: Option<Vec<f64>>,
    #[arg(long)]
    pub n_spinors: Option<usize>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub perturbed_spinors: Option<usize>,
    #[arg(long)]
    pub perturbed_grid_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub ray_angle: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ray_polar: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub record_timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone(); })*};
        }
        take!(
            dimension, epsilon, n0, k_max, samples_per_annulus, h_factor, grid_n, tau_list,
            alpha_list, energy_list, n_spinors, tau0, perturbed_spinors, perturbed_grid_n,
            ray_angle, ray_polar, seed
        );
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        c.record_timings |= self.record_timings;
        c.validate()?;
        Ok(c)
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, if on { start.elapsed().as_secs_f64() } else { 0.0 }))
}

fn stamp(mut records: Vec<CheckRecord>, seconds: f64) -> Vec<CheckRecord> {
    for r in &mut records {
        r.seconds = seconds;
    }
    records
}

/// Run every construction check enabled by `config`.
pub fn verification_report(config: &RunConfig) -> Result<VerificationReport> {
    let c = Construction::build(config.params()?)?;
    let t = config.record_timings;
    let mut checks = Vec::new();
    let (scan, s) = timed(t, || {
        scan_residual(&c, config.samples_per_annulus, config.h_factor, config.seed)
    })?;
    checks.extend(stamp(scan.records(c.dimension()), s));
    let (core, s) = timed(t, || scan_core(&c, config.samples_per_annulus, config.seed))?;
    checks.extend(stamp(vec![core], s));
    let (pot, s) = timed(t, || scan_potential(&c, config.samples_per_annulus, config.seed))?;
    checks.extend(stamp(vec![pot.record()], s));
    let (seam, s) = timed(t, || seam_check(&c, SEAM_TOLERANCE))?;
    checks.extend(stamp(vec![seam], s));
    if config.k_max >= ENVELOPE_MIN_ANNULI {
        let (env, s) = timed(t, || {
            scan_envelope(&c, config.envelope_rays, config.envelope_rows, config.seed)
        })?;
        checks.extend(stamp(vec![env.record()], s));
    }
    Ok(VerificationReport::new(config.echo(), checks))
}

/// Unit vector of the profile ray.
pub fn profile_direction(config: &RunConfig) -> Vec<f64> {
    let (phi, theta) = (config.ray_angle, config.ray_polar);
    match config.dimension {
        2 => vec![phi.cos(), phi.sin()],
        _ => vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
    }
}

/// The profile as CSV text with LF line endings.
pub fn profile_csv(config: &RunConfig) -> Result<String> {
    let c = Construction::build(config.params()?)?;
    let outer = c.decomp().outer_radius();
    let p = radial_profile(&c, &profile_direction(config), 0.0, outer, config.profile_rows)?;
    let mut s = String::from("r,log_abs_u,envelope_pred,v_norm,v_norm_scaled\n");
    for row in &p.rows {
        writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.r, row.log_abs_u, row.envelope_pred, row.v_norm, row.v_norm_scaled
        )
        .expect("writing to a String");
    }
    Ok(s)
}

/// Carleman samples as JSON lines, whether all checks passed, and the
/// perturbed threshold (2D only).
pub fn carleman_lines(config: &RunConfig) -> Result<(String, bool, Option<f64>)> {
    let params = config.params()?;
    let sweep = carleman_sweep(
        params.dimension,
        &config.tau_list,
        &config.alpha_list,
        &config.energy_list,
        config.n_spinors,
        config.seed,
        config.grid_n,
    )?;
    let mut pass = sweep.pass;
    let mut samples = sweep.samples;
    let mut tau_star = None;
    if params.dimension == Dimension::Two {
        let c = Construction2D::build(params)?;
        let taus: Vec<f64> = config.tau_list.iter().copied().filter(|t| *t >= config.tau0).collect();
        if taus.is_empty() {
            return Err(Error::Argument("no tau at or above tau0".into()));
        }
        let p = perturbed_sweep(
            &c,
            &taus,
            &config.energy_list,
            config.perturbed_spinors,
            config.seed,
            config.perturbed_grid_n,
        )?;
        pass &= p.tau_star.is_some();
        tau_star = p.tau_star;
        samples.extend(p.sweep.samples);
    }
    let mut out = String::new();
    for s in &samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    Ok((out, pass, tau_star))
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

fn finish(config: &RunConfig, text: &str, pass: bool) -> i32 {
    if let Err(e) = emit(config.out.as_deref(), text) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn usage(e: Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

/// Check the output directory before any long computation.
fn check_out(config: &RunConfig) -> Result<()> {
    if let Some(dir) = config.out.as_deref().and_then(Path::parent) {
        if !dir.as_os_str().is_empty() && !dir.is_dir() {
            return Err(Error::Argument(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
    }
    Ok(())
}

pub fn cmd_verify(config: &RunConfig) -> i32 {
    if let Err(e) = check_out(config) {
        return usage(e);
    }
    match verification_report(config) {
        Ok(report) => {
            for c in &report.checks {
                eprintln!(
                    "{:<28} {} statistic={:.6e} threshold={:.3e}",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.statistic,
                    c.threshold
                );
            }
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            finish(config, &text, report.all_pass())
        }
        Err(e) => usage(e),
    }
}

pub fn cmd_profile(config: &RunConfig) -> i32 {
    if let Err(e) = check_out(config) {
        return usage(e);
    }
    match profile_csv(config) {
        Ok(text) => finish(config, &text, true),
        Err(e) => usage(e),
    }
}

pub fn cmd_carleman(config: &RunConfig) -> i32 {
    if let Err(e) = check_out(config) {
        return usage(e);
    }
    match carleman_lines(config) {
        Ok((text, pass, tau_star)) => {
            if config.dimension == 2 {
                match tau_star {
                    Some(t) => eprintln!("perturbed: tau* = {t}"),
                    None => eprintln!("perturbed: no stable tau among those tested"),
                }
            }
            finish(config, &text, pass)
        }
        Err(e) => usage(e),
    }
}

/// Parse `args` (program name first) and run the chosen subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (overrides, cmd): (&Overrides, fn(&RunConfig) -> i32) = match &cli.command {
        Command::Verify(o) => (o, cmd_verify),
        Command::Profile(o) => (o, cmd_profile),
        Command::Carleman(o) => (o, cmd_carleman),
    };
    match overrides.resolve() {
        Ok(config) => cmd(&config),
        Err(e) => usage(e),
    }
}
