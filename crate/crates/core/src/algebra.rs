//! Pauli and Dirac matrices, log-scaled spinors and finite-difference Dirac
//! operators.
//!
//! In 2D the operator is `D2 = -i sigma_1 d_1 - i sigma_2 d_2`, i.e.
//! `[[0, -2i d_z], [-2i d_zbar, 0]]`; in 3D it is `D3 = -i alpha . grad`.

use num_complex::Complex64;

use crate::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const O: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sigma_1, sigma_2, sigma_3`.
pub const SIGMA: [Mat2; 3] = [
    [[O, ONE], [ONE, O]],
    [[O, Complex64::new(0.0, -1.0)], [I, O]],
    [[ONE, O], [O, Complex64::new(-1.0, 0.0)]],
];

/// The Pauli matrices together with the block anti-diagonal `alpha_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracMatrices {
    pub sigma: [Mat2; 3],
    pub alpha: [Mat4; 3],
}

impl DiracMatrices {
    pub fn new() -> Self {
        Self {
            sigma: SIGMA,
            alpha: [alpha(0), alpha(1), alpha(2)],
        }
    }
}

impl Default for DiracMatrices {
    fn default() -> Self {
        Self::new()
    }
}

fn alpha(j: usize) -> Mat4 {
    let mut a = [[O; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            a[r][c + 2] = SIGMA[j][r][c];
            a[r + 2][c] = SIGMA[j][r][c];
        }
    }
    a
}

pub fn pauli_dot(v: [Complex64; 3]) -> Mat2 {
    let mut m = [[O; 2]; 2];
    for (j, s) in SIGMA.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] += v[j] * s[r][c];
            }
        }
    }
    m
}

pub fn alpha_dot(v: [Complex64; 3]) -> Mat4 {
    let s = pauli_dot(v);
    let mut m = [[O; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c + 2] = s[r][c];
            m[r + 2][c] = s[r][c];
        }
    }
    m
}

pub fn matmul<const N: usize>(a: &[[Complex64; N]; N], b: &[[Complex64; N]; N]) -> [[Complex64; N]; N] {
    let mut m = [[O; N]; N];
    for r in 0..N {
        for c in 0..N {
            for k in 0..N {
                m[r][c] += a[r][k] * b[k][c];
            }
        }
    }
    m
}

pub fn matvec<const N: usize>(a: &[[Complex64; N]; N], v: &[Complex64; N]) -> [Complex64; N] {
    let mut out = [O; N];
    for r in 0..N {
        for c in 0..N {
            out[r] += a[r][c] * v[c];
        }
    }
    out
}

/// Bilinear (not sesquilinear) products, as in `(sigma.A)(sigma.B)`.
fn dot3(a: [Complex64; 3], b: [Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn wedge3(a: [Complex64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `max |(sigma.A)(sigma.B) - (A.B) I - i sigma.(A x B)|` over entries.
pub fn pauli_product_check(a: [Complex64; 3], b: [Complex64; 3]) -> f64 {
    let lhs = matmul(&pauli_dot(a), &pauli_dot(b));
    let ab = dot3(a, b);
    let w = pauli_dot(wedge3(a, b));
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { ab } else { O };
            worst = worst.max((lhs[r][c] - id - I * w[r][c]).norm());
        }
    }
    worst
}

/// `alpha_j alpha_k + alpha_k alpha_j - 2 delta_jk I`, largest entry over all pairs.
pub fn alpha_anticommutator_defect() -> f64 {
    let d = DiracMatrices::new();
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            let ab = matmul(&d.alpha[j], &d.alpha[k]);
            let ba = matmul(&d.alpha[k], &d.alpha[j]);
            for r in 0..4 {
                for c in 0..4 {
                    let target = if j == k && r == c { 2.0 } else { 0.0 };
                    worst = worst.max((ab[r][c] + ba[r][c] - target).norm());
                }
            }
        }
    }
    worst
}

fn norm<const N: usize>(v: &[Complex64; N]) -> f64 {
    // Scaled two-norm, safe against overflow of the squares.
    let m = v.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|c| (c / m).norm_sqr()).sum::<f64>().sqrt()
}

/// A spinor stored as `exp(log_mag) * dir` with `|dir| = 1`.
///
/// The zero spinor has `log_mag = -inf`; its `dir` is all zeros and every
/// operation treats it as absorbing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSpinor<const N: usize> {
    pub log_mag: f64,
    pub dir: [Complex64; N],
}

impl<const N: usize> ScaledSpinor<N> {
    pub fn zero() -> Self {
        Self {
            log_mag: f64::NEG_INFINITY,
            dir: [O; N],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// `exp(log_scale) * v`, normalized.
    pub fn pack(log_scale: f64, v: [Complex64; N]) -> Self {
        let n = norm(&v);
        if n == 0.0 || log_scale == f64::NEG_INFINITY {
            return Self::zero();
        }
        let mut dir = v;
        for c in dir.iter_mut() {
            *c /= n;
        }
        Self {
            log_mag: log_scale + n.ln(),
            dir,
        }
    }

    pub fn unpack(&self) -> (f64, [Complex64; N]) {
        (self.log_mag, self.dir)
    }

    pub fn from_vec(v: [Complex64; N]) -> Self {
        Self::pack(0.0, v)
    }

    /// Components measured in units of `exp(log_ref)`.
    pub fn components_at(&self, log_ref: f64) -> [Complex64; N] {
        if self.is_zero() {
            return [O; N];
        }
        let f = (self.log_mag - log_ref).exp();
        let mut out = self.dir;
        for c in out.iter_mut() {
            *c *= f;
        }
        out
    }

    /// Multiply by a real factor.
    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 || self.is_zero() {
            return Self::zero();
        }
        let mut dir = self.dir;
        if c < 0.0 {
            for v in dir.iter_mut() {
                *v = -*v;
            }
        }
        Self {
            log_mag: self.log_mag + c.abs().ln(),
            dir,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let l = self.log_mag.max(other.log_mag);
        let a = self.components_at(l);
        let b = other.components_at(l);
        let mut v = [O; N];
        for i in 0..N {
            v[i] = a[i] + b[i];
        }
        Self::pack(l, v)
    }

    /// `|self - other| / max(|self|, |other|)`; zero when both vanish.
    pub fn relative_difference(&self, other: &Self) -> f64 {
        let l = self.log_mag.max(other.log_mag);
        if l == f64::NEG_INFINITY {
            return 0.0;
        }
        let a = self.components_at(l);
        let b = other.components_at(l);
        let mut d = [O; N];
        for i in 0..N {
            d[i] = a[i] - b[i];
        }
        norm(&d)
    }
}

/// A complex scalar `exp(log_abs + i phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScalar {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogScalar {
    pub fn mul(self, o: Self) -> Self {
        Self {
            log_abs: self.log_abs + o.log_abs,
            phase: self.phase + o.phase,
        }
    }

    pub fn div(self, o: Self) -> Self {
        Self {
            log_abs: self.log_abs - o.log_abs,
            phase: self.phase - o.phase,
        }
    }

    pub fn conj(self) -> Self {
        Self {
            log_abs: self.log_abs,
            phase: -self.phase,
        }
    }

    /// Plain value; only for ratios known to be of moderate size.
    pub fn value(self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.phase)
    }
}

/// Dense value of a potential matrix at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialMatrix<const N: usize> {
    pub entries: [[Complex64; N]; N],
}

impl<const N: usize> PotentialMatrix<N> {
    pub fn zero() -> Self {
        Self {
            entries: [[O; N]; N],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|c| *c == O)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, s: &ScaledSpinor<N>) -> ScaledSpinor<N> {
        if s.is_zero() {
            return ScaledSpinor::zero();
        }
        ScaledSpinor::pack(s.log_mag, matvec(&self.entries, &s.dir))
    }

    /// Rank-one matrix `w u^* / |u|^2` for `w = D u`, both given at the scale of `u`.
    pub fn rank_one(w: &[Complex64; N], u: &ScaledSpinor<N>) -> Self {
        let mut m = Self::zero();
        if u.is_zero() {
            return m;
        }
        // u = e^L dir, w measured in units of e^L: w u^*/|u|^2 = w dir^*.
        for r in 0..N {
            for c in 0..N {
                m.entries[r][c] = w[r] * u.dir[c].conj();
            }
        }
        m
    }
}

/// Matrices `M_j` with `D = -i sum_j M_j d_j` for an `N`-component field.
fn operator_matrix<const N: usize>(j: usize) -> [[Complex64; N]; N] {
    let mut m = [[O; N]; N];
    match N {
        2 => {
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] = SIGMA[j][r][c];
                }
            }
        }
        4 => {
            let a = alpha(j);
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] = a[r][c];
                }
            }
        }
        _ => unreachable!("checked by caller"),
    }
    m
}

fn spatial_dim<const N: usize>() -> Result<usize> {
    match N {
        2 => Ok(2),
        4 => Ok(3),
        _ => Err(Error::Argument(format!("no Dirac operator on {N}-spinors"))),
    }
}

/// Central difference `(f(x + h e_j) - f(x - h e_j)) / 2h` for every axis,
/// measured in units of `exp(log_ref)`.
fn gradient<const N: usize, F>(field: &F, x: &[f64], h: f64) -> Result<(f64, Vec<[Complex64; N]>)>
where
    F: Fn(&[f64]) -> Result<ScaledSpinor<N>>,
{
    let centre = field(x)?;
    let mut pairs = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        pairs.push((field(&xp)?, field(&xm)?));
    }
    let log_ref = if centre.is_zero() {
        pairs
            .iter()
            .flat_map(|(a, b)| [a.log_mag, b.log_mag])
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        centre.log_mag
    };
    let grads = pairs
        .iter()
        .map(|(p, m)| {
            let a = p.components_at(log_ref);
            let b = m.components_at(log_ref);
            let mut g = [O; N];
            for i in 0..N {
                g[i] = (a[i] - b[i]) / (2.0 * h);
            }
            g
        })
        .collect();
    Ok((log_ref, grads))
}

/// Second-order central-difference Dirac operator applied to a scaled field:
/// `N = 2` is the planar operator on `x in R^2`, `N = 4` the 3D one on `x in R^3`.
///
/// Neighbour values are rescaled by `exp(log_mag(x') - log_mag(x))` before
/// differencing and the result carries the scale of the centre value (or of
/// the largest neighbour if the field vanishes at `x`).
pub fn dirac_fd<const N: usize, F>(field: F, x: &[f64], h: f64) -> Result<ScaledSpinor<N>>
where
    F: Fn(&[f64]) -> Result<ScaledSpinor<N>>,
{
    check_stencil::<N>(x, h)?;
    let (log_ref, grads) = gradient(&field, x, h)?;
    if log_ref == f64::NEG_INFINITY {
        return Ok(ScaledSpinor::zero());
    }
    Ok(ScaledSpinor::pack(log_ref, apply_operator(&grads)))
}

/// [`dirac_fd`] for plain (unscaled) fields of moderate size.
///
/// Uses only sums, differences and exact scalings, so multiplying the
/// field by a power of two multiplies the result by the same power exactly.
pub fn dirac_fd_plain<const N: usize, F>(field: F, x: &[f64], h: f64) -> Result<[Complex64; N]>
where
    F: Fn(&[f64]) -> [Complex64; N],
{
    check_stencil::<N>(x, h)?;
    let grads: Vec<[Complex64; N]> = (0..x.len())
        .map(|j| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let (a, b) = (field(&xp), field(&xm));
            let mut g = [O; N];
            for i in 0..N {
                g[i] = (a[i] - b[i]) / (2.0 * h);
            }
            g
        })
        .collect();
    Ok(apply_operator(&grads))
}

fn check_stencil<const N: usize>(x: &[f64], h: f64) -> Result<()> {
    let dim = spatial_dim::<N>()?;
    if x.len() != dim {
        return Err(Error::Argument(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step h = {h}")));
    }
    Ok(())
}

/// `-i sum_j M_j g_j` for the partial derivatives `g_j`.
fn apply_operator<const N: usize>(grads: &[[Complex64; N]]) -> [Complex64; N] {
    let mut out = [O; N];
    for (j, g) in grads.iter().enumerate() {
        let mg = matvec(&operator_matrix::<N>(j), g);
        for i in 0..N {
            out[i] -= I * mg[i];
        }
    }
    out
}

/// Finite-difference Wirtinger derivatives `(d_z f, d_zbar f)` of a scalar
/// field on the plane, each in units of `|f(z)|`.
pub fn wirtinger_fd<F>(field: F, x: [f64; 2], h: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(&[f64]) -> Result<ScaledSpinor<1>>,
{
    let (_, g) = gradient(&field, &x, h)?;
    let (dx, dy) = (g[0][0], g[1][0]);
    Ok(((dx - I * dy) * 0.5, (dx + I * dy) * 0.5))
}

/// Default finite-difference step near radius `r` for a field oscillating
/// like `z^{+-n}`: `h = (r/n)^{3/2} / h_factor`.
///
/// The leading truncation error of the central difference is then about
/// `1 / (3 h_factor^2)` relative to `|u|`, independent of `r` and `n`.
pub fn fd_step(r: f64, n_local: f64, h_factor: f64) -> f64 {
    (r / n_local).powf(1.5) / h_factor
}

/// Shrinks `h` near the flat end of a cutoff of width `w`, `s` widths away.
///
/// There the cutoff's third derivative relative to its value grows like
/// `s^-6 w^-3`, which matters when the cutoff multiplies a mode that still
/// dominates `u`. The floor keeps rounding below the truncation error.
pub fn tail_step(h: f64, r: f64, s: f64, w: f64, h_factor: f64) -> f64 {
    h.min(6.0 * w.powf(1.5) * s.powi(3) / h_factor)
        .max(1e-9 * r.max(1.0))
}

pub const DEFAULT_H_FACTOR: f64 = 1000.0;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_examples() {
        let s3 = pauli_dot([O, O, ONE]);
        assert_eq!(s3, [[ONE, O], [O, -ONE]]);
        let p = matmul(&pauli_dot([ONE, O, O]), &pauli_dot([O, ONE, O]));
        let is3 = [[I, O], [O, -I]];
        assert_eq!(p, is3);
        let a1 = alpha_dot([ONE, O, O]);
        let sq = matmul(&a1, &a1);
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(sq[r][col], if r == col { ONE } else { O });
            }
        }
    }

    #[test]
    fn matrices_are_hermitian_involutions() {
        let d = DiracMatrices::new();
        for j in 0..3 {
            let s = d.sigma[j];
            assert_eq!(matmul(&s, &s), [[ONE, O], [O, ONE]]);
            for r in 0..2 {
                for col in 0..2 {
                    assert_eq!(s[r][col], s[col][r].conj());
                }
            }
            let a = d.alpha[j];
            for r in 0..4 {
                for col in 0..4 {
                    assert_eq!(a[r][col], a[col][r].conj());
                }
            }
        }
        assert_eq!(alpha_anticommutator_defect(), 0.0);
    }

    #[test]
    fn pauli_identity_examples() {
        let e1 = [ONE, O, O];
        let e2 = [O, ONE, O];
        assert_eq!(pauli_product_check(e1, e2), 0.0);
        let a = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)];
        assert_eq!(pauli_product_check(a, a), 0.0);
    }

    #[test]
    fn pauli_identity_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let mut v = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let a = [v(), v(), v()];
            let b = [v(), v(), v()];
            worst = worst.max(pauli_product_check(a, b));
        }
        assert!(worst <= 1e-14, "{worst}");
    }

    #[test]
    fn zero_is_absorbing() {
        let z = ScaledSpinor::<2>::zero();
        let s = ScaledSpinor::from_vec([c(3.0, 0.0), c(0.0, 4.0)]);
        assert!((s.log_mag - 5f64.ln()).abs() < 1e-15);
        assert_eq!(z.add(&s), s);
        assert!(z.scale(2.0).is_zero());
        assert!(s.scale(0.0).is_zero());
        assert!(ScaledSpinor::<2>::from_vec([O, O]).is_zero());
        assert_eq!(z.relative_difference(&z), 0.0);
    }

    #[test]
    fn addition_across_huge_scales() {
        let big = ScaledSpinor::pack(1e5, [ONE, O]);
        let small = ScaledSpinor::pack(-1e5, [O, ONE]);
        let sum = big.add(&small);
        assert_eq!(sum.log_mag, big.log_mag);
        let a = ScaledSpinor::pack(-800.0, [ONE, O]);
        let b = ScaledSpinor::pack(-800.0 + 2f64.ln(), [ONE, O]);
        assert!((a.add(&a).log_mag - b.log_mag).abs() < 1e-12);
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let v = ScaledSpinor::from_vec([c(0.3, 0.1), c(-0.2, 0.5)]);
        let out = dirac_fd(|_x: &[f64]| Ok(v), &[1.0, 2.0], 1e-3).unwrap();
        assert!(out.is_zero());
        let v4 = ScaledSpinor::from_vec([ONE, I, O, ONE]);
        let out = dirac_fd(|_x: &[f64]| Ok(v4), &[1.0, 2.0, 0.5], 1e-3).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn fd_rejects_bad_input() {
        let v = ScaledSpinor::from_vec([ONE, O]);
        assert!(dirac_fd(|_x: &[f64]| Ok(v), &[1.0, 2.0, 3.0], 1e-3).is_err());
        assert!(dirac_fd(|_x: &[f64]| Ok(v), &[1.0, 2.0], 0.0).is_err());
        let failing = |x: &[f64]| {
            if x[0] == 0.0 && x[1] == 0.0 {
                Err(Error::Origin)
            } else {
                Ok(v)
            }
        };
        assert_eq!(dirac_fd(failing, &[0.5, 0.0], 0.5), Err(Error::Origin));
    }

    /// `z^p` as a scaled scalar field (any integer `p`).
    fn power(p: i64) -> impl Fn(&[f64]) -> Result<ScaledSpinor<1>> {
        move |x: &[f64]| {
            let z = c(x[0], x[1]);
            Ok(ScaledSpinor::pack(
                p as f64 * z.norm().ln(),
                [Complex64::from_polar(1.0, p as f64 * z.arg())],
            ))
        }
    }

    #[test]
    fn wirtinger_consistency() {
        let n = 41i64;
        let r = 6.4f64;
        for &theta in &[0.0, 0.7, 2.5] {
            let x = [r * f64::cos(theta), r * f64::sin(theta)];
            let h = fd_step(r, n as f64, DEFAULT_H_FACTOR);
            let (dz, dzbar) = wirtinger_fd(power(n), x, h).unwrap();
            // Units of |z^n|: analytic d_z z^n = n z^{n-1} has size n/r.
            assert!((2.0 * dzbar).norm() <= 1e-6, "{}", dzbar.norm());
            let exact = Complex64::from_polar(n as f64 / r, (n - 1) as f64 * theta);
            assert!((dz - exact).norm() <= 1e-5 * exact.norm());
        }
    }

    #[test]
    fn planar_dirac_of_conjugate_power_vanishes() {
        // (z^{-n}, 0) and (0, zbar^{-n}) are both zero modes.
        let n = 41i64;
        let r = 6.4;
        let up = move |x: &[f64]| {
            let s = power(-n)(x)?;
            Ok(ScaledSpinor::<2>::pack(s.log_mag, [s.dir[0], O]))
        };
        let down = move |x: &[f64]| {
            let s = power(-n)(x)?;
            Ok(ScaledSpinor::<2>::pack(s.log_mag, [O, s.dir[0].conj()]))
        };
        let x = [r, 0.0];
        let h = fd_step(r, n as f64, DEFAULT_H_FACTOR);
        for res in [dirac_fd(up, &x, h).unwrap(), dirac_fd(down, &x, h).unwrap()] {
            assert!(res.log_mag.exp() <= 1e-6, "{}", res.log_mag.exp());
        }
        // At the coarse step r/(100 n) the same residual is truncation-bound
        // near 2e-4 and drops by four per halving.
        let coarse = |h: f64| dirac_fd(up, &x, h).unwrap().log_mag.exp();
        let h0 = r / (100.0 * n as f64);
        let ratio = coarse(h0) / coarse(h0 / 2.0);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn pack_unpack_round_trip(
            log in -1e6f64..1e6,
            parts in proptest::array::uniform8(-1.0f64..1.0),
        ) {
            let v = [c(parts[0], parts[1]), c(parts[2], parts[3]), c(parts[4], parts[5]), c(parts[6], parts[7])];
            prop_assume!(norm(&v) > 1e-3);
            let s = ScaledSpinor::pack(log, v);
            let (l, d) = s.unpack();
            let t = ScaledSpinor::pack(l, d);
            prop_assert!((t.log_mag - s.log_mag).abs() <= 1e-14 * (1.0 + s.log_mag.abs()));
            for i in 0..4 {
                prop_assert!((t.dir[i] - s.dir[i]).norm() <= 1e-14);
            }
            prop_assert!((norm(&s.dir) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn matrix_application_commutes_with_scale(
            log in -500f64..500.0,
            m in proptest::array::uniform8(-1.0f64..1.0),
        ) {
            let pm = PotentialMatrix::<2> { entries: [[c(m[0], m[1]), c(m[2], m[3])], [c(m[4], m[5]), c(m[6], m[7])]] };
            let s = ScaledSpinor::pack(log, [c(0.6, 0.0), c(0.0, 0.8)]);
            let a = pm.apply(&s);
            let b = ScaledSpinor::pack(0.0, matvec(&pm.entries, &s.dir));
            prop_assume!(!b.is_zero());
            prop_assert!((a.log_mag - log - b.log_mag).abs() <= 1e-12 * (1.0 + log.abs()));
        }
    }
}
