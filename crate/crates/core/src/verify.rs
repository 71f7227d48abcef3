//! Whole-construction scans: residuals, decay envelopes, potential bounds,
//! seams and Carleman sweeps, each condensed into a [`CheckRecord`].
//!
//! All randomness comes from ChaCha streams keyed by `(seed, task)`, so a
//! scan can be split across workers without changing its output.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::ScaledSpinor;
use crate::build2d::Construction2D;
use crate::build3d::Construction3D;
use crate::carleman::{
    empirical_threshold, gen_test_spinor, sample_from_tables, CarlemanSample, Inequality,
    IntegrandTable,
};
use crate::params::{AnnulusDecomposition, ConstructionParams, Dimension, Region};
use crate::{Error, Result};

/// Factor applied to the quadrature error estimate when judging a margin.
pub const QUADRATURE_TOLERANCE: f64 = 10.0;

/// Independent RNG stream `task` derived from `seed`.
pub fn stream_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub statistic: f64,
    pub threshold: f64,
    /// Lower end of an interval-valued threshold.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold_low: Option<f64>,
    pub samples: usize,
    pub seconds: f64,
    /// Per-sample values from which `statistic` is recomputed.
    pub raw: Vec<f64>,
}

impl CheckRecord {
    fn at_most(name: &str, statistic: f64, threshold: f64, raw: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            pass: statistic <= threshold,
            statistic,
            threshold,
            threshold_low: None,
            samples: raw.len(),
            seconds: 0.0,
            raw,
        }
    }

    fn within(name: &str, statistic: f64, low: f64, high: f64, raw: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            pass: (low..=high).contains(&statistic),
            statistic,
            threshold: high,
            threshold_low: Some(low),
            samples: raw.len(),
            seconds: 0.0,
            raw,
        }
    }
}

pub const SCHEMA: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    /// The fully resolved run configuration, seed included.
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(config: serde_json::Value, checks: Vec<CheckRecord>) -> Self {
        Self {
            schema: SCHEMA.into(),
            config,
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Either construction, behind one interface.
#[derive(Debug, Clone)]
pub enum Construction {
    Two(Construction2D),
    Three(Construction3D),
}

impl Construction {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        match params.dimension {
            Dimension::Two => Ok(Self::Two(Construction2D::build(params)?)),
            Dimension::Three => Ok(Self::Three(Construction3D::build(params)?)),
        }
    }

    pub fn decomp(&self) -> &AnnulusDecomposition {
        match self {
            Self::Two(c) => &c.decomp,
            Self::Three(c) => &c.decomp,
        }
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.decomp().params
    }

    pub fn dimension(&self) -> Dimension {
        self.params().dimension
    }

    pub fn log_abs_u(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Two(c) => Ok(c.eval_u(Complex64::new(x[0], x[1]))?.log_mag),
            Self::Three(c) => Ok(c.eval_u([x[0], x[1], x[2]])?.log_mag),
        }
    }

    pub fn v_norm(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Two(c) => Ok(c.eval_v(Complex64::new(x[0], x[1]))?.norm()),
            Self::Three(c) => Ok(c.eval_v([x[0], x[1], x[2]])?.norm()),
        }
    }

    pub fn residual(&self, x: &[f64], h: f64) -> Result<f64> {
        match self {
            Self::Two(c) => c.residual(Complex64::new(x[0], x[1]), h),
            Self::Three(c) => c.residual([x[0], x[1], x[2]], h),
        }
    }

    /// `|D u - V u| / |u|` with `D u` in closed form.
    pub fn analytic_residual(&self, x: &[f64]) -> Result<f64> {
        fn rel<const N: usize>(
            du: ScaledSpinor<N>,
            vu: ScaledSpinor<N>,
            u: ScaledSpinor<N>,
        ) -> f64 {
            du.relative_difference(&vu) * (du.log_mag.max(vu.log_mag) - u.log_mag).exp()
        }
        match self {
            Self::Two(c) => {
                let z = Complex64::new(x[0], x[1]);
                let u = c.eval_u(z)?;
                Ok(rel(c.dirac_u(z)?, c.eval_v(z)?.apply(&u), u))
            }
            Self::Three(c) => {
                let p = [x[0], x[1], x[2]];
                let u = c.eval_u(p)?;
                Ok(rel(c.dirac_u(p)?, c.eval_v(p)?.apply(&u), u))
            }
        }
    }

    pub fn default_step(&self, r: f64, h_factor: f64) -> f64 {
        match self {
            Self::Two(c) => c.default_step(r, h_factor),
            Self::Three(c) => c.default_step(r, h_factor),
        }
    }

    /// Is `u(x)` bit-identical to mode `k` at `x`?
    fn u_is_mode(&self, x: &[f64], k: usize) -> Result<bool> {
        match self {
            Self::Two(c) => {
                let z = Complex64::new(x[0], x[1]);
                Ok(c.eval_u(z)? == c.eval_e(k, z)?)
            }
            Self::Three(c) => {
                let p = [x[0], x[1], x[2]];
                Ok(c.eval_u(p)? == c.eval_e(k, p)?)
            }
        }
    }

    /// `(|log_mag difference|, relative difference)` of `u` at two points.
    fn u_gap(&self, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
        match self {
            Self::Two(c) => {
                let ua = c.eval_u(Complex64::new(a[0], a[1]))?;
                let ub = c.eval_u(Complex64::new(b[0], b[1]))?;
                Ok(((ua.log_mag - ub.log_mag).abs(), ua.relative_difference(&ub)))
            }
            Self::Three(c) => {
                let ua = c.eval_u([a[0], a[1], a[2]])?;
                let ub = c.eval_u([b[0], b[1], b[2]])?;
                Ok(((ua.log_mag - ub.log_mag).abs(), ua.relative_difference(&ub)))
            }
        }
    }

    /// A uniformly random unit vector.
    fn random_direction(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.dimension() {
            Dimension::Two => {
                let t: f64 = rng.random_range(0.0..2.0 * PI);
                vec![t.cos(), t.sin()]
            }
            Dimension::Three => {
                let c: f64 = rng.random_range(-1.0..1.0);
                let p: f64 = rng.random_range(0.0..2.0 * PI);
                let s = (1.0 - c * c).sqrt();
                vec![s * p.cos(), s * p.sin(), c]
            }
        }
    }
}

fn scaled(dir: &[f64], r: f64) -> Vec<f64> {
    dir.iter().map(|d| d * r).collect()
}

/// Smallest radius sampled in the core ball.
fn core_floor(rho0: f64) -> f64 {
    rho0 / 16.0
}

/// Quarter intervals of every annulus, tagged with whether `u` is a single
/// zero mode there.
fn annulus_strata(dc: &AnnulusDecomposition) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    for s in &dc.rho_sub {
        for j in 0..4 {
            out.push((s[j], s[j + 1], j == 0 || j == 3));
        }
    }
    out
}

/// Quarter intervals of the core ball, starting at [`core_floor`].
fn core_strata(dc: &AnnulusDecomposition) -> Vec<(f64, f64, bool)> {
    let q = dc.rho[0] / 4.0;
    vec![
        (core_floor(dc.rho[0]), q, true),
        (q, 2.0 * q, false),
        (2.0 * q, 3.0 * q, false),
        (3.0 * q, 4.0 * q, true),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualScan {
    pub residuals: Vec<f64>,
    pub residuals_half: Vec<f64>,
    pub quiet: Vec<bool>,
    pub max: f64,
    pub p99: f64,
    pub quiet_max: f64,
    pub ratio: f64,
}

impl ResidualScan {
    pub fn records(&self, dimension: Dimension) -> Vec<CheckRecord> {
        let (tol, quiet_tol) = match dimension {
            Dimension::Two => (1e-4, 1e-6),
            Dimension::Three => (1e-3, 1e-5),
        };
        let quiet: Vec<f64> = self
            .residuals
            .iter()
            .zip(&self.quiet)
            .filter(|(_, &q)| q)
            .map(|(r, _)| *r)
            .collect();
        let mut pairs = Vec::with_capacity(2 * self.residuals.len());
        for (a, b) in self.residuals.iter().zip(&self.residuals_half) {
            pairs.push(*a);
            pairs.push(*b);
        }
        vec![
            CheckRecord::at_most("residual_max", self.max, tol, self.residuals.clone()),
            CheckRecord::at_most("residual_quiet_max", self.quiet_max, quiet_tol, quiet),
            CheckRecord::within("residual_convergence_ratio", self.ratio, 3.5, 4.5, pairs),
        ]
    }
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return 0.0;
    }
    let idx = ((v.len() - 1) as f64 * q).round() as usize;
    v[idx]
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Relative residual `|D u - V u| / |u|` at stratified random points:
/// `samples_per_annulus / 4` per quarter of every annulus and of the two
/// plateau quarters of the core ball, each at the default step and at half
/// of it.
///
/// The core transition quarters are left to [`scan_core`]: there a cutoff
/// deep in its flat tail can still multiply the dominant mode, and no
/// central-difference step resolves it above rounding.
pub fn scan_residual(
    c: &Construction,
    samples_per_annulus: usize,
    h_factor: f64,
    seed: u64,
) -> Result<ResidualScan> {
    let dc = c.decomp();
    let outer = dc.outer_radius();
    let per_quarter = (samples_per_annulus / 4).max(1);
    let mut residuals = Vec::new();
    let mut residuals_half = Vec::new();
    let mut quiet = Vec::new();
    let plateaus = core_strata(dc).into_iter().filter(|s| s.2);
    for (task, (lo, hi, is_quiet)) in plateaus.chain(annulus_strata(dc)).enumerate() {
        let mut rng = stream_rng(seed, task as u64);
        for _ in 0..per_quarter {
            let mut r = rng.random_range(lo..hi);
            let dir = c.random_direction(&mut rng);
            let h = c.default_step(r, h_factor);
            // Keep the whole stencil inside the built domain.
            r = r.min(outer - 2.0 * h);
            let x = scaled(&dir, r);
            residuals.push(c.residual(&x, h)?);
            residuals_half.push(c.residual(&x, h / 2.0)?);
            quiet.push(is_quiet);
        }
    }
    let max = max_of(&residuals);
    let quiet_vals: Vec<f64> = residuals
        .iter()
        .zip(&quiet)
        .filter(|(_, &q)| q)
        .map(|(r, _)| *r)
        .collect();
    Ok(ResidualScan {
        p99: percentile(&residuals, 0.99),
        quiet_max: max_of(&quiet_vals),
        ratio: max / max_of(&residuals_half),
        max,
        residuals,
        residuals_half,
        quiet,
    })
}

/// `|D u - V u| / |u|` with the analytic `D u`, over `samples / 4` points
/// per transition quarter of the core ball.
pub fn scan_core(c: &Construction, samples: usize, seed: u64) -> Result<CheckRecord> {
    let per_quarter = (samples / 4).max(1);
    let mut raw = Vec::new();
    for (task, (lo, hi, _)) in core_strata(c.decomp()).into_iter().enumerate().filter(|(_, s)| !s.2) {
        let mut rng = stream_rng(seed ^ 0xc0de, task as u64);
        for _ in 0..per_quarter {
            let r = rng.random_range(lo..hi);
            let dir = c.random_direction(&mut rng);
            raw.push(c.analytic_residual(&scaled(&dir, r))?);
        }
    }
    Ok(CheckRecord::at_most("residual_core", max_of(&raw), CORE_TOLERANCE, raw))
}

/// Gate for [`scan_core`]; both sides are closed-form there.
pub const CORE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub log_abs_u: f64,
    /// `-r^{1+delta} / (1+delta)`, the log of the model envelope.
    pub envelope_pred: f64,
    pub v_norm: f64,
    pub v_norm_scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub direction: Vec<f64>,
    pub rows: Vec<ProfileRow>,
}

/// `|V| r^eps` in 2D and `|V| r^eps / max(ln r, 1)^3` in 3D.
pub fn scaled_potential(dimension: Dimension, epsilon: f64, r: f64, v_norm: f64) -> f64 {
    let base = v_norm * r.powf(epsilon);
    match dimension {
        Dimension::Two => base,
        Dimension::Three => base / r.ln().max(1.0).powi(3),
    }
}

/// `count` equally spaced rows on `(r_min, r_max]` along `direction`.
pub fn radial_profile(
    c: &Construction,
    direction: &[f64],
    r_min: f64,
    r_max: f64,
    count: usize,
) -> Result<RadialProfile> {
    let p = c.params();
    let e = p.decay_exponent();
    let mut rows = Vec::with_capacity(count);
    for i in 1..=count {
        // Pull the last row in by a few ulps so that rounding in the
        // Cartesian point cannot push it past the outer radius.
        let r = (r_min + (r_max - r_min) * i as f64 / count as f64).min(r_max * (1.0 - 1e-14));
        let x = scaled(direction, r);
        let v_norm = c.v_norm(&x)?;
        rows.push(ProfileRow {
            r,
            log_abs_u: c.log_abs_u(&x)?,
            envelope_pred: -r.powf(e) / e,
            v_norm,
            v_norm_scaled: scaled_potential(p.dimension, p.epsilon, r, v_norm),
        });
    }
    Ok(RadialProfile {
        direction: direction.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// Log-log slope of `-log|u| - A` against `r`.
    pub p_hat: f64,
    /// Least-squares slope of `-log|u|` against `r^{1+delta}/(1+delta)`.
    pub slope_hat: f64,
    /// Offset `A` of the best model `-log|u| ~ A + B r^p`.
    pub offset: f64,
    /// Exponent `p` of that model.
    pub p_model: f64,
}

/// `(intercept, slope, residual sum of squares)` of a straight-line fit.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (intercept, slope, rss)
}

/// Fit `-log|u| ~ A + B r^p`.
///
/// `-log|u|` carries a large constant (the amplitude at the inner radius)
/// on top of the growing part, so `A` is profiled out first; `p` minimises
/// the residual of the linear fit in `r^p` (coarse scan, then golden section)
/// and `p_hat` is the log-log slope of what remains after subtracting `A`.
pub fn fit_envelope(profile: &RadialProfile, delta: f64) -> Result<EnvelopeFit> {
    let rows: Vec<&ProfileRow> = profile
        .rows
        .iter()
        .filter(|r| r.r > 0.0 && r.log_abs_u.is_finite())
        .collect();
    if rows.len() < 10 {
        return Err(Error::Argument(format!(
            "envelope fit needs at least 10 rows (got {})",
            rows.len()
        )));
    }
    let r: Vec<f64> = rows.iter().map(|row| row.r).collect();
    let y: Vec<f64> = rows.iter().map(|row| -row.log_abs_u).collect();
    let rss = |p: f64| {
        let x: Vec<f64> = r.iter().map(|v| v.powf(p)).collect();
        line_fit(&x, &y).2
    };
    let (lo_p, hi_p, steps) = (0.1, 8.0, 80);
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo_p + (hi_p - lo_p) * i as f64 / steps as f64)
        .collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| rss(grid[a]).total_cmp(&rss(grid[b])))
        .expect("nonempty grid");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if rss(c1) <= rss(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    let p_model = 0.5 * (a + b);
    let xp: Vec<f64> = r.iter().map(|v| v.powf(p_model)).collect();
    let (offset, _, _) = line_fit(&xp, &y);

    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (rv, yv) in r.iter().zip(&y) {
        let adjusted = yv - offset;
        if adjusted > 0.0 {
            lx.push(rv.ln());
            ly.push(adjusted.ln());
        }
    }
    if lx.len() < 2 {
        return Err(Error::Argument("envelope fit degenerate after offset".into()));
    }
    let p_hat = line_fit(&lx, &ly).1;

    let e = 1.0 + delta;
    let xm: Vec<f64> = r.iter().map(|v| v.powf(e) / e).collect();
    let slope_hat = line_fit(&xm, &y).1;
    Ok(EnvelopeFit {
        p_hat,
        slope_hat,
        offset,
        p_model,
    })
}

/// Directions for the envelope rays: evenly spread angles in 2D; in 3D
/// colatitudes kept away from the poles.
pub fn envelope_rays(dimension: Dimension, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 1 << 32);
    (0..count)
        .map(|i| {
            let phi = 2.0 * PI * (i as f64 + rng.random_range(0.0..1.0)) / count as f64;
            match dimension {
                Dimension::Two => vec![phi.cos(), phi.sin()],
                Dimension::Three => {
                    let theta: f64 = rng.random_range(0.35..PI - 0.35);
                    vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeScan {
    pub fits: Vec<EnvelopeFit>,
    pub p_mean: f64,
    pub slope_mean: f64,
    pub target: f64,
}

impl EnvelopeScan {
    pub fn record(&self) -> CheckRecord {
        let dev = (self.p_mean - self.target).abs();
        let mut r = CheckRecord::at_most(
            "envelope_exponent",
            dev,
            0.1 * self.target,
            self.fits.iter().map(|f| f.p_hat).collect(),
        );
        r.samples = self.fits.len();
        r
    }
}

/// Annuli 0 and 1 carry the blend from the core; the fit window must still
/// span four annuli after dropping them.
pub const ENVELOPE_MIN_ANNULI: usize = 6;

/// Fit the envelope on annuli `2..k_max` along `rays` rays and average.
pub fn scan_envelope(c: &Construction, rays: usize, rows_per_ray: usize, seed: u64) -> Result<EnvelopeScan> {
    let dc = c.decomp();
    if dc.annuli() < ENVELOPE_MIN_ANNULI {
        return Err(Error::Argument(format!(
            "envelope fit needs k_max >= {ENVELOPE_MIN_ANNULI} (got {})",
            dc.annuli()
        )));
    }
    let (lo, hi) = (dc.rho[2], dc.outer_radius());
    let mut fits = Vec::new();
    for dir in envelope_rays(c.dimension(), rays, seed) {
        let profile = radial_profile(c, &dir, lo, hi, rows_per_ray)?;
        fits.push(fit_envelope(&profile, c.params().delta)?);
    }
    let n = fits.len() as f64;
    Ok(EnvelopeScan {
        p_mean: fits.iter().map(|f| f.p_hat).sum::<f64>() / n,
        slope_mean: fits.iter().map(|f| f.slope_hat).sum::<f64>() / n,
        target: c.params().decay_exponent(),
        fits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialScan {
    /// Sup of the scaled norm per annulus; `None` where no sample is eligible.
    pub per_annulus: Vec<Option<f64>>,
    /// Sup of `|V|` over the core ball (reported, not gated).
    pub core_sup: f64,
    pub global_sup: f64,
    pub trend: f64,
}

impl PotentialScan {
    pub fn record(&self) -> CheckRecord {
        let raw: Vec<f64> = self.per_annulus.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        let mut r = CheckRecord::at_most("potential_trend", self.trend, 2.0, raw);
        r.pass = self.trend.is_finite() && self.trend <= 2.0;
        r
    }
}

/// Ratio of the largest value in the last third to the largest in the first third.
pub fn trend_statistic(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let third = values.len().div_ceil(3);
    let first = max_of(&values[..third]);
    let last = max_of(&values[values.len() - third..]);
    last / first
}

/// Sup of `|V| r^eps` (2D) or `|V| r^eps / (ln r)^3` over `r >= e^2` (3D)
/// per annulus, from `samples_per_annulus / 4` stratified points per quarter.
pub fn scan_potential(c: &Construction, samples_per_annulus: usize, seed: u64) -> Result<PotentialScan> {
    let dc = c.decomp();
    let p = c.params();
    let per_quarter = (samples_per_annulus / 4).max(1);
    let gate = match p.dimension {
        Dimension::Two => 0.0,
        Dimension::Three => 2f64.exp(),
    };
    let mut per_annulus = Vec::new();
    let mut core_sup: f64 = 0.0;
    let strata = core_strata(dc).into_iter().chain(annulus_strata(dc));
    for (task, (lo, hi, _)) in strata.enumerate() {
        let annulus = task.checked_sub(4).map(|t| t / 4);
        if let Some(k) = annulus {
            if per_annulus.len() <= k {
                per_annulus.push(None);
            }
        }
        let mut rng = stream_rng(seed ^ 0x5eed, task as u64);
        for _ in 0..per_quarter {
            let r = rng.random_range(lo..hi);
            let dir = c.random_direction(&mut rng);
            let v = c.v_norm(&scaled(&dir, r))?;
            match annulus {
                None => core_sup = core_sup.max(v),
                Some(k) => {
                    if r >= gate {
                        let s = scaled_potential(p.dimension, p.epsilon, r, v);
                        let slot: &mut Option<f64> = &mut per_annulus[k];
                        *slot = Some(slot.unwrap_or(0.0).max(s));
                    }
                }
            }
        }
    }
    let eligible: Vec<f64> = per_annulus.iter().flatten().copied().collect();
    Ok(PotentialScan {
        trend: trend_statistic(&eligible),
        global_sup: max_of(&eligible),
        core_sup,
        per_annulus,
    })
}

/// Exact-equality and continuity checks at the quarter structure.
///
/// The statistic is the largest two-sided seam discrepancy; the check also
/// fails if `u` differs from the single active mode (or `V` is nonzero) at
/// any quiet-quarter point.
pub fn seam_check(c: &Construction, tolerance: f64) -> Result<CheckRecord> {
    let dc = c.decomp();
    let dim = c.dimension();
    let ray = |t: f64| -> Vec<f64> {
        match dim {
            Dimension::Two => vec![t.cos(), t.sin()],
            Dimension::Three => {
                let theta = 0.4 + 2.3 * (t / (2.0 * PI));
                vec![theta.sin() * t.cos(), theta.sin() * t.sin(), theta.cos()]
            }
        }
    };
    let mut exact = true;
    let mut gaps = Vec::new();
    for k in 0..dc.annuli() {
        let s = dc.rho_sub[k];
        for i in 0..16 {
            let t = 2.0 * PI * i as f64 / 16.0;
            let dir = ray(t);
            let inner = scaled(&dir, s[0] + (s[1] - s[0]) * i as f64 / 16.0);
            let outer = scaled(&dir, s[3] + (s[4] - s[3]) * (i + 1) as f64 / 17.0);
            exact &= c.u_is_mode(&inner, k)?;
            exact &= c.u_is_mode(&outer, k + 1)?;
            exact &= c.v_norm(&inner)? == 0.0 && c.v_norm(&outer)? == 0.0;
        }
    }
    // Every interior seam, including the core boundary rho_0.
    let last = dc.annuli();
    for (j, &rho) in dc.rho.iter().enumerate().take(last) {
        for i in 0..8 {
            let dir = ray(2.0 * PI * (i as f64 + 0.5) / 8.0);
            // A few ulps on either side, so the smooth change of u across
            // the gap stays far below the tolerance.
            let below = scaled(&dir, rho * (1.0 - 8.0 * f64::EPSILON));
            let above = scaled(&dir, rho * (1.0 + 8.0 * f64::EPSILON));
            debug_assert!(j == 0 || region(c, rho * (1.0 - 8.0 * f64::EPSILON)) == Region::Annulus(j - 1));
            let (dl, rel) = c.u_gap(&below, &above)?;
            gaps.push(rel.max(dl));
        }
    }
    let stat = max_of(&gaps);
    let mut r = CheckRecord::at_most("seam", stat, tolerance, gaps);
    r.pass = exact && stat <= tolerance;
    Ok(r)
}

/// The randomized test-spinor family used by [`carleman_sweep`]: spinor `i`
/// is supported on `[r_in, r_out]` with `r_in ~ U[0.2, 0.35]` and
/// `r_out - r_in ~ U[0.2, 0.3]`, angular degree 2.
pub fn sweep_spinor(dimension: Dimension, seed: u64, index: usize) -> Result<crate::carleman::TestSpinor> {
    let mut rng = stream_rng(seed, index as u64);
    let r_in = rng.random_range(0.2..0.35);
    let r_out = r_in + rng.random_range(0.2..0.3);
    gen_test_spinor(rng.random(), r_in, r_out, 2, dimension)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedSample {
    pub check: String,
    pub spinor: usize,
    #[serde(flatten)]
    pub sample: CarlemanSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanSweep {
    pub samples: Vec<TaggedSample>,
    pub pass: bool,
    /// `min (margin + 10 qe) / rhs`; nonnegative iff every sample passes.
    pub statistic: f64,
}

impl CarlemanSweep {
    fn from_samples(samples: Vec<TaggedSample>) -> Self {
        let statistic = samples
            .iter()
            .map(|t| normalized_slack(&t.sample))
            .fold(f64::INFINITY, f64::min);
        let pass = samples.iter().all(|t| t.sample.passes(QUADRATURE_TOLERANCE));
        Self {
            samples,
            pass,
            statistic,
        }
    }

    pub fn record(&self, name: &str) -> CheckRecord {
        let raw: Vec<f64> = self.samples.iter().map(|t| normalized_slack(&t.sample)).collect();
        CheckRecord {
            name: name.into(),
            pass: self.pass,
            statistic: self.statistic,
            threshold: 0.0,
            threshold_low: None,
            samples: raw.len(),
            seconds: 0.0,
            raw,
        }
    }
}

fn normalized_slack(s: &CarlemanSample) -> f64 {
    (s.margin + QUADRATURE_TOLERANCE * s.quadrature_error_estimate) / s.rhs.max(f64::MIN_POSITIVE)
}

fn validate_lists(tau_list: &[f64], alpha_list: &[f64], energy_list: &[f64]) -> Result<()> {
    if tau_list.is_empty() || alpha_list.is_empty() || energy_list.is_empty() {
        return Err(Error::Argument("empty parameter list".into()));
    }
    if let Some(t) = tau_list.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::Argument(format!("tau = {t} must be positive")));
    }
    if let Some(a) = alpha_list.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Argument(format!("alpha = {a} must be positive")));
    }
    if let Some(e) = energy_list.iter().find(|e| !e.is_finite()) {
        return Err(Error::Argument(format!("energy = {e}")));
    }
    Ok(())
}

/// Unperturbed inequality over `n_spinors` test spinors and every
/// `(tau, alpha, E)` combination.
pub fn carleman_sweep(
    dimension: Dimension,
    tau_list: &[f64],
    alpha_list: &[f64],
    energy_list: &[f64],
    n_spinors: usize,
    seed: u64,
    grid_n: usize,
) -> Result<CarlemanSweep> {
    validate_lists(tau_list, alpha_list, energy_list)?;
    if grid_n < 4 || grid_n % 2 == 1 {
        return Err(Error::Argument(format!("grid_n = {grid_n} must be even and >= 4")));
    }
    let (kind, name) = match dimension {
        Dimension::Two => (Inequality::Planar, "carleman2"),
        Dimension::Three => (Inequality::Spatial, "carleman3"),
    };
    let mut samples = Vec::new();
    for i in 0..n_spinors {
        let u = sweep_spinor(dimension, seed, i)?;
        let fine = IntegrandTable::build(&u, grid_n)?;
        let coarse = IntegrandTable::build(&u, grid_n / 2)?;
        for &tau in tau_list {
            for &alpha in alpha_list {
                for &energy in energy_list {
                    samples.push(TaggedSample {
                        check: name.into(),
                        spinor: i,
                        sample: sample_from_tables(&fine, &coarse, kind, tau, alpha, energy)?,
                    });
                }
            }
        }
    }
    Ok(CarlemanSweep::from_samples(samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSweep {
    pub sweep: CarlemanSweep,
    /// Smallest tested `tau` from which on every sample passes.
    pub tau_star: Option<f64>,
    pub rho: f64,
    pub alpha: f64,
}

/// Perturbed planar inequality with `V` from `c` and `alpha = 2 - 2 eps`,
/// for test spinors supported well inside the first annulus.
pub fn perturbed_sweep(
    c: &Construction2D,
    tau_list: &[f64],
    energy_list: &[f64],
    n_spinors: usize,
    seed: u64,
    grid_n: usize,
) -> Result<PerturbedSweep> {
    let alpha = c.params.decay_exponent();
    validate_lists(tau_list, &[alpha], energy_list)?;
    if c.decomp.annuli() == 0 {
        return Err(Error::Argument("perturbed sweep needs at least one annulus".into()));
    }
    let rho = c.decomp.rho[0];
    let width = c.decomp.rho[1] - rho;
    let (r_in, r_out) = (rho + 0.1 * width, c.decomp.rho[1] - 0.1 * width);
    let mut samples = Vec::new();
    for i in 0..n_spinors {
        let mut rng = stream_rng(seed, (1 << 40) + i as u64);
        let u = gen_test_spinor(rng.random(), r_in, r_out, 2, Dimension::Two)?;
        crate::carleman::check_support(&u, c, rho)?;
        let fine = IntegrandTable::build_perturbed(&u, c, grid_n)?;
        let coarse = IntegrandTable::build_perturbed(&u, c, grid_n / 2)?;
        for &tau in tau_list {
            for &energy in energy_list {
                samples.push(TaggedSample {
                    check: "perturbed".into(),
                    spinor: i,
                    sample: sample_from_tables(&fine, &coarse, Inequality::Perturbed, tau, alpha, energy)?,
                });
            }
        }
    }
    let plain: Vec<CarlemanSample> = samples.iter().map(|t| t.sample).collect();
    Ok(PerturbedSweep {
        tau_star: empirical_threshold(&plain, QUADRATURE_TOLERANCE),
        sweep: CarlemanSweep::from_samples(samples),
        rho,
        alpha,
    })
}

/// Region tag of a radius, for callers that only hold a [`Construction`].
pub fn region(c: &Construction, r: f64) -> Region {
    c.decomp().annulus_index(r)
}
