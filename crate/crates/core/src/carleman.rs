//! Quadrature checks of the weighted inequalities
//!
//! ```text
//! C(tau, alpha) int |x|^{alpha-2} e^{2 tau |x|^alpha} |u|^2
//!     <= int e^{2 tau |x|^alpha} |(D + V + E) u|^2
//! ```
//!
//! with `C = tau alpha^2` in 2D, `tau alpha (alpha + 1)` in 3D and
//! `tau alpha^2 / 4` for the perturbed planar inequality, over smooth test
//! spinors supported in an annulus `r_in < |x| < r_out`.
//!
//! Both sides use a midpoint rule on the box `[-r_out, r_out]^d`; the common
//! factor `e^{2 tau r_in^alpha}` is divided out before summation. The error
//! estimate is the change of both sides when the grid is halved.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{dirac_fd_plain, matvec};
use crate::build2d::Construction2D;
use crate::params::Dimension;
use crate::{Error, Result};

/// Largest exponent allowed in the rescaled weight `e^{2 tau (r^alpha - r_in^alpha)}`.
pub const MAX_WEIGHT_EXPONENT: f64 = 700.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlemanSample {
    pub tau: f64,
    pub alpha: f64,
    pub energy: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub quadrature_error_estimate: f64,
}

impl CarlemanSample {
    /// `margin >= -factor * quadrature_error_estimate`.
    pub fn passes(&self, factor: f64) -> bool {
        self.margin >= -factor * self.quadrature_error_estimate
    }
}

/// Which constant multiplies the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    Planar,
    Spatial,
    Perturbed,
}

impl Inequality {
    pub fn constant(self, tau: f64, alpha: f64) -> f64 {
        match self {
            Self::Planar => tau * alpha * alpha,
            Self::Spatial => tau * alpha * (alpha + 1.0),
            Self::Perturbed => tau * alpha * alpha / 4.0,
        }
    }
}

/// Smooth spinor `amplitude * b(t) * A(xhat) * direction` with the bump
/// `b(t) = exp(-1/(1 - t^2))`, `t = (2r - r_in - r_out)/(r_out - r_in)`, and a
/// random trigonometric (2D) or polynomial-in-`xhat` (3D) angular factor `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSpinor {
    pub seed: u64,
    pub dimension: Dimension,
    pub r_in: f64,
    pub r_out: f64,
    pub degree: u32,
    /// 2D: coefficients of `e^{i j theta}`, `j = -degree..=degree`.
    /// 3D: coefficients of `xhat^a yhat^b zhat^c`, listed by `exponents`.
    pub coeffs: Vec<Complex64>,
    pub exponents: Vec<[u32; 3]>,
    pub direction: Vec<Complex64>,
    pub amplitude: f64,
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn gen_test_spinor(
    seed: u64,
    r_in: f64,
    r_out: f64,
    angular_degree: u32,
    dimension: Dimension,
) -> Result<TestSpinor> {
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::Argument(format!(
            "test spinor support ({r_in}, {r_out})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = angular_degree;
    let exponents: Vec<[u32; 3]> = match dimension {
        Dimension::Two => Vec::new(),
        Dimension::Three => (0..=d)
            .flat_map(|a| (0..=d - a).flat_map(move |b| (0..=d - a - b).map(move |c| [a, b, c])))
            .collect(),
    };
    let count = match dimension {
        Dimension::Two => 2 * d as usize + 1,
        Dimension::Three => exponents.len(),
    };
    let mut coeffs: Vec<Complex64> = (0..count).map(|_| random_complex(&mut rng)).collect();
    // Keep the angular factor away from the zero function.
    let constant = match dimension {
        Dimension::Two => d as usize,
        Dimension::Three => 0,
    };
    coeffs[constant] += 2.0;
    let comps = match dimension {
        Dimension::Two => 2,
        Dimension::Three => 4,
    };
    let mut direction: Vec<Complex64> = (0..comps).map(|_| random_complex(&mut rng)).collect();
    let n = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in direction.iter_mut() {
        *c /= n;
    }
    Ok(TestSpinor {
        seed,
        dimension,
        r_in,
        r_out,
        degree: d,
        coeffs,
        exponents,
        direction,
        amplitude: 1.0,
    })
}

impl TestSpinor {
    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn bump(&self, r: f64) -> f64 {
        let t = (2.0 * r - self.r_in - self.r_out) / (self.r_out - self.r_in);
        if t.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - t * t)).exp()
        }
    }

    fn angular(&self, x: &[f64], r: f64) -> Complex64 {
        match self.dimension {
            Dimension::Two => {
                let e = Complex64::new(x[0] / r, x[1] / r);
                let d = self.degree as i32;
                let mut sum = Complex64::new(0.0, 0.0);
                for (i, c) in self.coeffs.iter().enumerate() {
                    sum += c * e.powi(i as i32 - d);
                }
                sum
            }
            Dimension::Three => {
                let h = [x[0] / r, x[1] / r, x[2] / r];
                self.coeffs
                    .iter()
                    .zip(&self.exponents)
                    .map(|(c, e)| {
                        c * (h[0].powi(e[0] as i32) * h[1].powi(e[1] as i32) * h[2].powi(e[2] as i32))
                    })
                    .sum()
            }
        }
    }

    /// Components at `x` (length 2 in 2D, 4 in 3D).
    pub fn eval(&self, x: &[f64]) -> Vec<Complex64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let b = self.bump(r);
        if b == 0.0 {
            return vec![Complex64::new(0.0, 0.0); self.direction.len()];
        }
        let s = self.angular(x, r) * (self.amplitude * b);
        self.direction.iter().map(|d| d * s).collect()
    }

    fn eval_array<const N: usize>(&self, x: &[f64]) -> [Complex64; N] {
        let mut arr = [ZERO; N];
        arr.copy_from_slice(&self.eval(x));
        arr
    }

    fn fd_step(&self) -> f64 {
        1e-4 * (self.r_out - self.r_in)
    }
}

/// Per-point data `(r, |u|^2, |w|^2, Re<w, u>)` with `w = (D + V) u`,
/// together with the cell volume.
#[derive(Debug, Clone)]
pub struct IntegrandTable {
    pub r_in: f64,
    pub r_out: f64,
    pub cell_volume: f64,
    pub rows: Vec<[f64; 4]>,
}

fn grid_points(dim: usize, r_out: f64, n: usize) -> impl Iterator<Item = Vec<f64>> {
    let step = 2.0 * r_out / n as f64;
    let total = n.pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut x = Vec::with_capacity(dim);
        for _ in 0..dim {
            x.push(-r_out + (idx % n) as f64 * step + 0.5 * step);
            idx /= n;
        }
        x
    })
}

/// `potential(x, u)` returns `V(x) u` for the perturbed inequality.
fn table_generic<const N: usize, P>(u: &TestSpinor, grid_n: usize, potential: P) -> Result<IntegrandTable>
where
    P: Fn(&[f64], &[Complex64; N]) -> Result<[Complex64; N]>,
{
    let dim = if N == 2 { 2 } else { 3 };
    let h = u.fd_step();
    let mut rows = Vec::new();
    for x in grid_points(dim, u.r_out, grid_n) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= u.r_in || r >= u.r_out {
            continue;
        }
        let uv = u.eval_array::<N>(&x);
        if uv.iter().all(|c| *c == ZERO) {
            continue;
        }
        let mut w = dirac_fd_plain(|y: &[f64]| u.eval_array::<N>(y), &x, h)?;
        let vu = potential(&x, &uv)?;
        for i in 0..N {
            w[i] += vu[i];
        }
        let u2: f64 = uv.iter().map(|c| c.norm_sqr()).sum();
        let w2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        let re: f64 = w.iter().zip(&uv).map(|(a, b)| (a * b.conj()).re).sum();
        rows.push([r, u2, w2, re]);
    }
    let step = 2.0 * u.r_out / grid_n as f64;
    Ok(IntegrandTable {
        r_in: u.r_in,
        r_out: u.r_out,
        cell_volume: step.powi(dim as i32),
        rows,
    })
}

impl IntegrandTable {
    pub fn build(u: &TestSpinor, grid_n: usize) -> Result<Self> {
        match u.dimension {
            Dimension::Two => table_generic::<2, _>(u, grid_n, |_, _| Ok([ZERO; 2])),
            Dimension::Three => table_generic::<4, _>(u, grid_n, |_, _| Ok([ZERO; 4])),
        }
    }

    /// Planar table for `w = (D2 + V) u` with `V` from a construction.
    pub fn build_perturbed(u: &TestSpinor, c: &Construction2D, grid_n: usize) -> Result<Self> {
        if u.dimension != Dimension::Two {
            return Err(Error::Dimension(3));
        }
        table_generic::<2, _>(u, grid_n, |x, v| {
            let m = c.eval_v(Complex64::new(x[0], x[1]))?;
            Ok(matvec(&m.entries, v))
        })
    }

    /// `(lhs, rhs)` with the weight factor `e^{2 tau r_in^alpha}` removed.
    pub fn sides(&self, kind: Inequality, tau: f64, alpha: f64, energy: f64) -> Result<(f64, f64)> {
        let base = self.r_in.powf(alpha);
        let top = 2.0 * tau * (self.r_out.powf(alpha) - base);
        if !(top <= MAX_WEIGHT_EXPONENT) {
            return Err(Error::WeightOverflow(top));
        }
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for row in &self.rows {
            let [r, u2, w2, re] = *row;
            let weight = (2.0 * tau * (r.powf(alpha) - base)).exp();
            lhs += weight * r.powf(alpha - 2.0) * u2;
            rhs += weight * (w2 + 2.0 * energy * re + energy * energy * u2);
        }
        Ok((
            kind.constant(tau, alpha) * lhs * self.cell_volume,
            rhs * self.cell_volume,
        ))
    }
}

fn check_positive(tau: f64, alpha: f64, grid_n: usize) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Argument(format!("tau = {tau} must be positive")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Argument(format!("alpha = {alpha} must be positive")));
    }
    if grid_n < 4 || grid_n % 2 == 1 {
        return Err(Error::Argument(format!("grid_n = {grid_n} must be even and >= 4")));
    }
    Ok(())
}

/// Combine a fine and a half-resolution table into one sample.
pub fn sample_from_tables(
    fine: &IntegrandTable,
    coarse: &IntegrandTable,
    kind: Inequality,
    tau: f64,
    alpha: f64,
    energy: f64,
) -> Result<CarlemanSample> {
    let (lhs, rhs) = fine.sides(kind, tau, alpha, energy)?;
    let (lhs2, rhs2) = coarse.sides(kind, tau, alpha, energy)?;
    Ok(CarlemanSample {
        tau,
        alpha,
        energy,
        lhs,
        rhs,
        margin: rhs - lhs,
        quadrature_error_estimate: (lhs - lhs2).abs() + (rhs - rhs2).abs(),
    })
}

fn check_unperturbed(
    u: &TestSpinor,
    kind: Inequality,
    tau: f64,
    alpha: f64,
    energy: f64,
    grid_n: usize,
) -> Result<CarlemanSample> {
    check_positive(tau, alpha, grid_n)?;
    let fine = IntegrandTable::build(u, grid_n)?;
    let coarse = IntegrandTable::build(u, grid_n / 2)?;
    sample_from_tables(&fine, &coarse, kind, tau, alpha, energy)
}

pub fn check_carleman2(u: &TestSpinor, tau: f64, alpha: f64, energy: f64, grid_n: usize) -> Result<CarlemanSample> {
    if u.dimension != Dimension::Two {
        return Err(Error::Dimension(3));
    }
    check_unperturbed(u, Inequality::Planar, tau, alpha, energy, grid_n)
}

pub fn check_carleman3(u: &TestSpinor, tau: f64, alpha: f64, energy: f64, grid_n: usize) -> Result<CarlemanSample> {
    if u.dimension != Dimension::Three {
        return Err(Error::Dimension(2));
    }
    check_unperturbed(u, Inequality::Spatial, tau, alpha, energy, grid_n)
}

/// Require `rho < r_in` and `r_out` inside the built domain.
pub fn check_support(u: &TestSpinor, c: &Construction2D, rho: f64) -> Result<()> {
    if u.dimension != Dimension::Two {
        return Err(Error::Dimension(3));
    }
    if u.r_in <= rho {
        return Err(Error::Support {
            r_in: u.r_in,
            r_out: u.r_out,
            rho,
        });
    }
    let outer = c.decomp.outer_radius();
    if u.r_out > outer {
        return Err(Error::Beyond { r: u.r_out, outer });
    }
    Ok(())
}

/// Perturbed planar inequality with `V` from `c`, for `u` supported in `|x| > rho`.
pub fn check_perturbed(
    u: &TestSpinor,
    c: &Construction2D,
    rho: f64,
    tau: f64,
    alpha: f64,
    energy: f64,
    grid_n: usize,
) -> Result<CarlemanSample> {
    check_support(u, c, rho)?;
    check_positive(tau, alpha, grid_n)?;
    let fine = IntegrandTable::build_perturbed(u, c, grid_n)?;
    let coarse = IntegrandTable::build_perturbed(u, c, grid_n / 2)?;
    sample_from_tables(&fine, &coarse, Inequality::Perturbed, tau, alpha, energy)
}

/// Smallest tested `tau` from which on every sample passes, if any.
pub fn empirical_threshold(samples: &[CarlemanSample], factor: f64) -> Option<f64> {
    let mut taus: Vec<f64> = samples.iter().map(|s| s.tau).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut threshold = None;
    for &t in taus.iter().rev() {
        if samples.iter().filter(|s| s.tau == t).all(|s| s.passes(factor)) {
            threshold = Some(t);
        } else {
            break;
        }
    }
    threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ConstructionParams;

    fn spinor2(seed: u64) -> TestSpinor {
        gen_test_spinor(seed, 0.3, 0.55, 2, Dimension::Two).unwrap()
    }

    #[test]
    fn generation_is_deterministic_and_supported() {
        let a = spinor2(5);
        let b = spinor2(5);
        assert_eq!(a, b);
        assert_eq!(a.eval(&[0.4, 0.1]), b.eval(&[0.4, 0.1]));
        assert!(a.eval(&[0.55, 0.0]).iter().all(|c| c.norm() == 0.0));
        assert!(a.eval(&[0.0, 0.3]).iter().all(|c| c.norm() == 0.0));
        let t = IntegrandTable::build(&a, 32).unwrap();
        assert!(t.rows.iter().map(|r| r[1]).sum::<f64>() > 0.0);
        assert!(gen_test_spinor(1, 0.5, 0.4, 2, Dimension::Two).is_err());
        assert!(gen_test_spinor(1, 0.0, 0.4, 2, Dimension::Two).is_err());
    }

    #[test]
    fn radial_bump_example() {
        let mut u = spinor2(1);
        u.degree = 0;
        u.coeffs = vec![Complex64::new(1.0, 0.0)];
        let s = check_carleman2(&u, 5.0, 1.0, 0.0, 64).unwrap();
        assert!(s.margin >= 0.0 && s.lhs > 0.0);
    }

    #[test]
    fn spatial_examples() {
        let u = gen_test_spinor(2, 0.3, 0.55, 2, Dimension::Three).unwrap();
        let s = check_carleman3(&u, 3.0, 1.0, 1.0, 32).unwrap();
        assert!(s.passes(10.0), "{s:?}");
        let t = IntegrandTable::build(&u, 32).unwrap();
        let (l1, _) = t.sides(Inequality::Spatial, 3.0, 1.0, 0.0).unwrap();
        let (l1_alt, _) = t.sides(Inequality::Planar, 3.0, 1.0, 0.0).unwrap();
        // Same integral, constants tau*1*2 and tau*1*1.
        assert!((l1 / l1_alt - 2.0).abs() < 1e-12);
        assert_eq!(Inequality::Spatial.constant(3.0, 2.0) / Inequality::Spatial.constant(3.0, 1.0), 3.0);
    }

    #[test]
    fn small_tau_lhs_vanishes() {
        let u = spinor2(9);
        let t = IntegrandTable::build(&u, 32).unwrap();
        let (l_small, r_small) = t.sides(Inequality::Planar, 1e-8, 1.0, 0.0).unwrap();
        assert!(l_small < 1e-6 * r_small);
    }

    #[test]
    fn scaling_is_exact() {
        let u = spinor2(4);
        let v = spinor2(4).with_amplitude(2.0);
        let a = check_carleman2(&u, 2.0, 1.0, -1.0, 32).unwrap();
        let b = check_carleman2(&v, 2.0, 1.0, -1.0, 32).unwrap();
        assert_eq!(b.lhs, 4.0 * a.lhs);
        assert_eq!(b.rhs, 4.0 * a.rhs);
        assert_eq!(b.margin.signum(), a.margin.signum());
    }

    #[test]
    fn invalid_parameters() {
        let u = spinor2(1);
        assert!(check_carleman2(&u, 0.0, 1.0, 0.0, 32).is_err());
        assert!(check_carleman2(&u, 1.0, -1.0, 0.0, 32).is_err());
        assert!(check_carleman2(&u, 1.0, 1.0, 0.0, 33).is_err());
        assert!(check_carleman3(&u, 1.0, 1.0, 0.0, 32).is_err());
        let far = gen_test_spinor(1, 10.0, 20.0, 1, Dimension::Two).unwrap();
        assert!(matches!(
            check_carleman2(&far, 100.0, 2.0, 0.0, 8),
            Err(Error::WeightOverflow(_))
        ));
    }

    #[test]
    fn perturbed_support_rules() {
        let p = ConstructionParams::new(0.5, 9, 2, Dimension::Two).unwrap();
        let c = Construction2D::build(p).unwrap();
        let rho = c.decomp.rho[0];
        let inside = gen_test_spinor(1, 8.0, 12.0, 1, Dimension::Two).unwrap();
        assert!(matches!(
            check_perturbed(&inside, &c, rho, 1.0, 1.0, 0.0, 16),
            Err(Error::Support { .. })
        ));
        let outside = gen_test_spinor(1, 10.0, 40.0, 1, Dimension::Two).unwrap();
        assert!(matches!(
            check_perturbed(&outside, &c, rho, 1.0, 1.0, 0.0, 16),
            Err(Error::Beyond { .. })
        ));
    }

    #[test]
    fn threshold_logic() {
        let mk = |tau: f64, margin: f64| CarlemanSample {
            tau,
            alpha: 1.0,
            energy: 0.0,
            lhs: 1.0,
            rhs: 1.0 + margin,
            margin,
            quadrature_error_estimate: 0.0,
        };
        let s = [mk(1.0, -1.0), mk(2.0, 0.5), mk(4.0, 1.0), mk(8.0, 2.0)];
        assert_eq!(empirical_threshold(&s, 10.0), Some(2.0));
        let s = [mk(1.0, 1.0), mk(2.0, -0.5), mk(4.0, 1.0)];
        assert_eq!(empirical_threshold(&s, 10.0), Some(4.0));
        assert_eq!(empirical_threshold(&[mk(1.0, -1.0)], 10.0), None);
    }
}
