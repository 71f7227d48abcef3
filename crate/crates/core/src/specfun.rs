//! Associated Legendre functions, spherical harmonics, spinor harmonics and
//! the normalized angular spinors `F_m` carried by the 3D zero modes.
//!
//! Conventions: `P_l^m` includes the Condon-Shortley factor `(-1)^m`,
//! `Y_l^m(theta, phi) = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) e^{i m phi} P_l^m(cos theta)`
//! and `Y_l^{-m} = (-1)^m conj(Y_l^m)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

use crate::{Error, Result};

/// A `C^2`-valued angular sample.
pub type SpinorHalf = [Complex64; 2];

/// Number of colatitude samples used to fix the normalization of `F_m`.
pub const NORM_GRID: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularPoint {
    /// Colatitude in `[0, pi]`.
    pub theta: f64,
    /// Azimuth in `[0, 2 pi)`.
    pub phi: f64,
}

impl AngularPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::Argument(format!(
                "angular point (theta = {theta}, phi = {phi})"
            )));
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    /// Direction of a nonzero Cartesian point.
    pub fn from_cartesian(x: [f64; 3]) -> Option<Self> {
        let rxy = x[0].hypot(x[1]);
        let r = rxy.hypot(x[2]);
        if r == 0.0 {
            return None;
        }
        Some(Self {
            theta: rxy.atan2(x[2]),
            phi: x[1].atan2(x[0]).rem_euclid(2.0 * PI),
        })
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    pub fn e_iphi(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }
}

/// A half-odd-integer such as a magnetic quantum number `m_j`, stored as `2 m_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const HALF: Self = Self(1);

    /// `twice` must be odd.
    pub fn from_twice(twice: i32) -> Result<Self> {
        if twice.rem_euclid(2) != 1 {
            return Err(Error::HarmonicIndex(format!(
                "2 m_j = {twice} is not odd"
            )));
        }
        Ok(Self(twice))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `m_j - 1/2` and `m_j + 1/2`.
    fn neighbours(self) -> (i32, i32) {
        ((self.0 - 1) / 2, (self.0 + 1) / 2)
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Argument(format!("x = {x} outside [-1, 1]")));
    }
    Ok(())
}

/// `sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(x)` by the m-then-l upward
/// recurrence on normalized values, which stay bounded for every degree.
pub fn normalized_legendre(l: u32, m: u32, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::HarmonicIndex(format!("m = {m} > l = {l}")));
    }
    check_x(x)?;
    let omx2 = (1.0 - x) * (1.0 + x);
    let mut pmm = 1.0;
    for i in 1..=m {
        let odd = (2 * i - 1) as f64;
        pmm *= omx2 * odd / (odd + 1.0);
    }
    let mut pmm = ((2 * m + 1) as f64 * pmm / (4.0 * PI)).sqrt();
    if m % 2 == 1 {
        pmm = -pmm;
    }
    if l == m {
        return Ok(pmm);
    }
    let mf = m as f64;
    let mut old_fact = (2.0 * mf + 3.0).sqrt();
    let mut pmmp1 = x * old_fact * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let fact = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let pll = (x * pmmp1 - pmm / old_fact) * fact;
        old_fact = fact;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pmmp1)
}

/// `P_l^m(x)` with the Condon-Shortley phase.
///
/// Values for large `m` can exceed the float range (e.g. `P_400^400`); these
/// come back infinite, while every normalized quantity stays finite.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> Result<f64> {
    let normalized = normalized_legendre(l, m, x)?;
    if normalized == 0.0 {
        return Ok(0.0);
    }
    let log_ratio: f64 = ((l - m + 1)..=(l + m)).map(|i| (i as f64).ln()).sum();
    let log_scale = 0.5 * ((4.0 * PI / (2 * l + 1) as f64).ln() + log_ratio);
    Ok(normalized * log_scale.exp())
}

/// `(P_l^0(x), P_l^1(x))` by the three-term recurrence in `l`.
pub fn legendre_p0_p1(l: u32, x: f64) -> (f64, f64) {
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let (mut p0_prev, mut p0) = (1.0, x);
    let (mut p1_prev, mut p1) = (0.0, -s);
    if l == 0 {
        return (1.0, 0.0);
    }
    for ll in 2..=l {
        let lf = ll as f64;
        let next0 = ((2.0 * lf - 1.0) * x * p0 - (lf - 1.0) * p0_prev) / lf;
        let next1 = ((2.0 * lf - 1.0) * x * p1 - lf * p1_prev) / (lf - 1.0);
        p0_prev = p0;
        p0 = next0;
        p1_prev = p1;
        p1 = next1;
    }
    (p0, p1)
}

pub fn sph_harm(l: u32, m: i32, p: AngularPoint) -> Result<Complex64> {
    let am = m.unsigned_abs();
    if am > l {
        return Err(Error::HarmonicIndex(format!("|m| = {am} > l = {l}")));
    }
    let plm = normalized_legendre(l, am, p.cos_theta())?;
    let y = Complex64::from_polar(plm, am as f64 * p.phi);
    if m >= 0 {
        Ok(y)
    } else if am % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

/// `Y_l^m` that reads as zero when `|m| > l`; only reached with a zero prefactor.
fn sph_harm_or_zero(l: u32, m: i32, p: AngularPoint) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        Ok(Complex64::new(0.0, 0.0))
    } else {
        sph_harm(l, m, p)
    }
}

/// Spinor harmonic `Y_{kappa, m_j}` with `j = |kappa| - 1/2`.
pub fn spinor_harm(kappa: i32, mj: HalfInteger, p: AngularPoint) -> Result<SpinorHalf> {
    if kappa == 0 {
        return Err(Error::HarmonicIndex("kappa = 0".into()));
    }
    if mj.twice().unsigned_abs() > 2 * kappa.unsigned_abs() - 1 {
        return Err(Error::HarmonicIndex(format!(
            "|m_j| = {} exceeds j = {}",
            mj.value().abs(),
            kappa.unsigned_abs() as f64 - 0.5
        )));
    }
    let k = kappa as f64;
    let m = mj.value();
    let (lo, hi) = mj.neighbours();
    if kappa >= 1 {
        let l = (kappa - 1) as u32;
        let norm = 1.0 / (2.0 * k - 1.0).sqrt();
        let a = (k - 0.5 + m).max(0.0).sqrt();
        let b = (k - 0.5 - m).max(0.0).sqrt();
        Ok([
            sph_harm_or_zero(l, lo, p)? * (norm * a),
            sph_harm_or_zero(l, hi, p)? * (norm * b),
        ])
    } else {
        let l = (-kappa) as u32;
        let norm = 1.0 / (1.0 - 2.0 * k).sqrt();
        let a = (0.5 - k - m).max(0.0).sqrt();
        let b = (0.5 - k + m).max(0.0).sqrt();
        Ok([
            sph_harm_or_zero(l, lo, p)? * (-norm * a),
            sph_harm_or_zero(l, hi, p)? * (norm * b),
        ])
    }
}

/// `Y_{kappa, 1/2}` written through `P_l^0` and `P_l^1` directly.
///
/// Takes `cos theta` and `e^{i phi}` so that Cartesian callers avoid
/// trigonometric round trips.
pub fn spinor_harm_half(kappa: i32, cos_theta: f64, e_iphi: Complex64) -> Result<SpinorHalf> {
    if kappa == 0 {
        return Err(Error::HarmonicIndex("kappa = 0".into()));
    }
    let pref = 1.0 / (4.0 * PI).sqrt();
    if kappa >= 1 {
        let kf = kappa as f64;
        let (p0, p1) = legendre_p0_p1((kappa - 1) as u32, cos_theta);
        Ok([
            Complex64::new(pref * kf.sqrt() * p0, 0.0),
            e_iphi * (pref * p1 / kf.sqrt()),
        ])
    } else {
        // l = -kappa = m - 1 in the F_m notation.
        let l = (-kappa) as f64;
        let (p0, p1) = legendre_p0_p1((-kappa) as u32, cos_theta);
        Ok([
            Complex64::new(-pref * l.sqrt() * p0, 0.0),
            e_iphi * (pref * p1 / l.sqrt()),
        ])
    }
}

fn check_fm_degree(m: u64) -> Result<()> {
    if m < 3 || m % 2 == 0 || m > i32::MAX as u64 {
        return Err(Error::HarmonicIndex(format!(
            "F_m needs an odd m >= 3 (got {m})"
        )));
    }
    Ok(())
}

fn norm_cache() -> &'static RwLock<HashMap<u64, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn sup_on_grid(kappa: i32) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    (0..NORM_GRID)
        .map(|i| {
            let theta = PI * i as f64 / (NORM_GRID - 1) as f64;
            let s = spinor_harm_half(kappa, theta.cos(), one).expect("kappa != 0");
            (s[0].norm_sqr() + s[1].norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `c_m = 1 / sup |Y_{-(m-1), 1/2}|`, the supremum taken over a
/// [`NORM_GRID`]-point colatitude grid (the modulus does not depend on `phi`).
pub fn f_m_constant(m: u64) -> Result<f64> {
    check_fm_degree(m)?;
    if let Some(&c) = norm_cache().read().expect("cache poisoned").get(&m) {
        return Ok(c);
    }
    let c = 1.0 / sup_on_grid(-((m - 1) as i32));
    norm_cache()
        .write()
        .expect("cache poisoned")
        .insert(m, c);
    Ok(c)
}

/// `F_m = c_m Y_{-(m-1), 1/2}` through the general spinor-harmonic route.
pub fn f_m(m: u64, p: AngularPoint) -> Result<SpinorHalf> {
    let c = f_m_constant(m)?;
    let y = spinor_harm(-((m - 1) as i32), HalfInteger::HALF, p)?;
    Ok([y[0] * c, y[1] * c])
}

/// `F_m` in its explicit Legendre form
/// `c_m / sqrt(4 pi) (-sqrt(m-1) P_{m-1}^0, e^{i phi} P_{m-1}^1 / sqrt(m-1))`.
pub fn f_m_printed(m: u64, cos_theta: f64, e_iphi: Complex64) -> Result<SpinorHalf> {
    let c = f_m_constant(m)?;
    let l = (m - 1) as f64;
    let (p0, p1) = legendre_p0_p1((m - 1) as u32, cos_theta);
    let pref = c / (4.0 * PI).sqrt();
    Ok([
        Complex64::new(-pref * l.sqrt() * p0, 0.0),
        e_iphi * (pref * p1 / l.sqrt()),
    ])
}

/// Frozen lower gate: `Q(l, x) l^{3/2} >= LEGENDRE_Q_MIN` for even `l <= 200`,
/// where `Q = l(l+1) P_l^0(x)^2 + P_l^1(x)^2` (oracle minimum 4.2426 at l = 2, x = 0).
pub const LEGENDRE_Q_MIN: f64 = 4.24;
/// Frozen upper gate: `Q(l, x) <= LEGENDRE_Q_MAX l(l+1)` (the oracle maximum is 1, at x = +-1).
pub const LEGENDRE_Q_MAX: f64 = 1.0 + 1e-9;
/// Frozen floor `c` in `|F_m| >= c m^{-7/4}` for odd `m` in `11..=201`
/// (oracle minimum 16.3521 at m = 11).
pub const F_M_FLOOR: f64 = 16.35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichStats {
    /// `min Q l^{3/2}`.
    pub lower: f64,
    /// `max Q / (l(l+1))`.
    pub upper: f64,
}

impl SandwichStats {
    pub fn passes(&self) -> bool {
        self.lower >= LEGENDRE_Q_MIN && self.upper <= LEGENDRE_Q_MAX
    }
}

/// Extremes of `Q(l, x)` over even `l` in `2..=l_max` and `points`
/// equispaced `x` in `[-1, 1]`.
pub fn legendre_sandwich(l_max: u32, points: usize) -> SandwichStats {
    let mut st = SandwichStats {
        lower: f64::INFINITY,
        upper: 0.0,
    };
    for l in (2..=l_max).step_by(2) {
        let lf = l as f64;
        for i in 0..points {
            let x = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            let (p0, p1) = legendre_p0_p1(l, x);
            let q = lf * (lf + 1.0) * p0 * p0 + p1 * p1;
            st.lower = st.lower.min(q * lf.powf(1.5));
            st.upper = st.upper.max(q / (lf * (lf + 1.0)));
        }
    }
    st
}

/// `min |F_m| m^{7/4}` over the normalization grid.
pub fn f_m_floor_ratio(m: u64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let mut lo = f64::INFINITY;
    for i in 0..NORM_GRID {
        let theta = PI * i as f64 / (NORM_GRID - 1) as f64;
        let f = f_m_printed(m, theta.cos(), one)?;
        lo = lo.min((f[0].norm_sqr() + f[1].norm_sqr()).sqrt());
    }
    Ok(lo * (m as f64).powf(1.75))
}

/// Largest pointwise gap between [`f_m`] and [`f_m_printed`] on a
/// `grid x grid` angular grid.
pub fn f_m_route_gap(m: u64, grid: usize) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for i in 0..grid {
        let theta = PI * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let p = AngularPoint::new(theta, 2.0 * PI * j as f64 / grid as f64)?;
            let a = f_m(m, p)?;
            let b = f_m_printed(m, p.cos_theta(), p.e_iphi())?;
            gap = gap.max((a[0] - b[0]).norm().max((a[1] - b[1]).norm()));
        }
    }
    Ok(gap)
}
