//! Planar construction: a nowhere-vanishing (away from 0) spinor `u` and a
//! potential `V` with `D2 u = V u`, glued from the zero modes
//! `E_k = a_k z^{-n_k}` across the annuli.
//!
//! Even `k` puts `E_k` in the first slot, odd `k` puts `conj(E_k)` in the
//! second. The core ball `|z| < rho_0` blends `E_0` into the antiholomorphic
//! zero mode `(0, a_0 zbar^{n_0})`, which vanishes at the origin.

use num_complex::Complex64;

use crate::algebra::{dirac_fd, fd_step, tail_step, LogScalar, PotentialMatrix, ScaledSpinor};
use crate::params::{AnnulusDecomposition, ConstructionParams, Dimension, Region};
use crate::smooth::{chi_k, chitilde_k, CutoffProfile, OriginCutoffs};
use crate::{Error, Result};

const O: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_2I: Complex64 = Complex64::new(0.0, -2.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Construction2D {
    pub params: ConstructionParams,
    pub decomp: AnnulusDecomposition,
    pub profile: CutoffProfile,
    pub origin: OriginCutoffs,
}

/// Slot (0 or 1) that carries the mode of index `k`.
pub fn slot(k: usize) -> usize {
    k % 2
}

/// `d_zbar f(|z|) = f' e^{i theta} / 2` and `d_z f(|z|) = f' e^{-i theta} / 2`.
fn radial_wirtinger(fprime: f64, z: Complex64, r: f64, bar: bool) -> Complex64 {
    let e = z / r;
    0.5 * fprime * if bar { e } else { e.conj() }
}

fn place(slot: usize, v: Complex64) -> [Complex64; 2] {
    let mut out = [O; 2];
    out[slot] = v;
    out
}

impl Construction2D {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        if params.dimension != Dimension::Two {
            return Err(Error::Dimension(params.dimension.as_u32()));
        }
        let decomp = AnnulusDecomposition::build(params)?;
        let origin = OriginCutoffs { rho: decomp.rho[0] };
        Ok(Self {
            params,
            decomp,
            profile: CutoffProfile,
            origin,
        })
    }

    /// Scalar that occupies `slot(k)`: `E_k` for even `k`, `conj(E_k)` for odd `k`.
    pub fn e_scalar(&self, k: usize, z: Complex64) -> Result<LogScalar> {
        self.decomp.check_mode(k)?;
        if z == O {
            return Err(Error::Origin);
        }
        let (r, theta) = z.to_polar();
        let n = self.decomp.n[k] as f64;
        let phase = if k % 2 == 0 { -n * theta } else { n * theta };
        Ok(LogScalar {
            log_abs: self.decomp.log_a[k] - n * r.ln(),
            phase,
        })
    }

    pub fn eval_e(&self, k: usize, z: Complex64) -> Result<ScaledSpinor<2>> {
        let e = self.e_scalar(k, z)?;
        Ok(ScaledSpinor {
            log_mag: e.log_abs,
            dir: place(slot(k), Complex64::from_polar(1.0, e.phase)),
        })
    }

    /// The two core-ball modes `a_0 z^{-n_0}` (slot 0) and `a_0 zbar^{n_0}` (slot 1).
    fn core_modes(&self, z: Complex64) -> (LogScalar, LogScalar) {
        let (r, theta) = z.to_polar();
        let n = self.decomp.n[0] as f64;
        let la = self.decomp.log_a[0];
        (
            LogScalar {
                log_abs: la - n * r.ln(),
                phase: -n * theta,
            },
            LogScalar {
                log_abs: la + n * r.ln(),
                phase: -n * theta,
            },
        )
    }

    fn blend(a: f64, sa: usize, ea: LogScalar, b: f64, sb: usize, eb: LogScalar) -> ScaledSpinor<2> {
        let first = ScaledSpinor {
            log_mag: ea.log_abs,
            dir: place(sa, Complex64::from_polar(1.0, ea.phase)),
        };
        let second = ScaledSpinor {
            log_mag: eb.log_abs,
            dir: place(sb, Complex64::from_polar(1.0, eb.phase)),
        };
        first.scale(a).add(&second.scale(b))
    }

    pub fn eval_u(&self, z: Complex64) -> Result<ScaledSpinor<2>> {
        let r = z.norm();
        if r == 0.0 {
            return Ok(ScaledSpinor::zero());
        }
        match self.decomp.annulus_index(r) {
            Region::Core => {
                let psi = self.origin.psi(r).value;
                let psit = self.origin.psitilde(r).value;
                if psit == 0.0 {
                    return self.eval_e(0, z);
                }
                let (outer, inner) = self.core_modes(z);
                Ok(Self::blend(psi, 0, outer, psit, 1, inner))
            }
            Region::Annulus(k) => {
                let c = chi_k(r, k, &self.decomp)?.value;
                let ct = chitilde_k(r, k, &self.decomp)?.value;
                if c == 0.0 {
                    return self.eval_e(k, z);
                }
                if ct == 0.0 {
                    return self.eval_e(k + 1, z);
                }
                Ok(Self::blend(
                    ct,
                    slot(k),
                    self.e_scalar(k, z)?,
                    c,
                    slot(k + 1),
                    self.e_scalar(k + 1, z)?,
                ))
            }
            Region::Beyond => Err(Error::Beyond {
                r,
                outer: self.decomp.outer_radius(),
            }),
        }
    }

    /// `V` from the explicit entry formulas; one nonzero entry on each
    /// transition quarter and on each core ring, zero elsewhere.
    pub fn eval_v(&self, z: Complex64) -> Result<PotentialMatrix<2>> {
        let r = z.norm();
        let mut v = PotentialMatrix::zero();
        if r == 0.0 {
            return Ok(v);
        }
        match self.decomp.annulus_index(r) {
            Region::Core => {
                let psi = self.origin.psi(r);
                let psit = self.origin.psitilde(r);
                let n = self.decomp.n[0] as f64;
                if psi.derivative != 0.0 {
                    // V22 = -2i d_zbar(psi) |z|^{-2 n_0}
                    v.entries[1][1] = MINUS_2I
                        * radial_wirtinger(psi.derivative, z, r, true)
                        * (-2.0 * n * r.ln()).exp();
                }
                if psit.derivative != 0.0 {
                    // V11 = -2i d_z(psitilde) |z|^{2 n_0}
                    v.entries[0][0] = MINUS_2I
                        * radial_wirtinger(psit.derivative, z, r, false)
                        * (2.0 * n * r.ln()).exp();
                }
                Ok(v)
            }
            Region::Annulus(k) => {
                let c = chi_k(r, k, &self.decomp)?;
                let ct = chitilde_k(r, k, &self.decomp)?;
                if c.derivative != 0.0 {
                    // D(chi E_{k+1}) lands in slot(k); the derivative is d_zbar
                    // when E_{k+1} sits in slot 0.
                    let s = slot(k);
                    let ratio = self.e_scalar(k + 1, z)?.div(self.e_scalar(k, z)?);
                    let d = radial_wirtinger(c.derivative, z, r, slot(k + 1) == 0);
                    v.entries[s][s] = MINUS_2I * d * ratio.value();
                }
                if ct.derivative != 0.0 {
                    let s = slot(k + 1);
                    let ratio = self.e_scalar(k, z)?.div(self.e_scalar(k + 1, z)?);
                    let d = radial_wirtinger(ct.derivative, z, r, slot(k) == 0);
                    v.entries[s][s] = MINUS_2I * d * ratio.value();
                }
                Ok(v)
            }
            Region::Beyond => Err(Error::Beyond {
                r,
                outer: self.decomp.outer_radius(),
            }),
        }
    }

    /// `D2 u` from the analytic cutoff derivatives (the zero modes drop out).
    pub fn dirac_u(&self, z: Complex64) -> Result<ScaledSpinor<2>> {
        let r = z.norm();
        if r == 0.0 {
            return Ok(ScaledSpinor::zero());
        }
        let term = |slot: usize, d: Complex64, e: LogScalar| ScaledSpinor {
            log_mag: e.log_abs,
            dir: place(slot, MINUS_2I * d * Complex64::from_polar(1.0, e.phase)),
        };
        match self.decomp.annulus_index(r) {
            Region::Core => {
                let (outer, inner) = self.core_modes(z);
                let psi = self.origin.psi(r).derivative;
                let psit = self.origin.psitilde(r).derivative;
                let a = term(1, radial_wirtinger(psi, z, r, true), outer);
                let b = term(0, radial_wirtinger(psit, z, r, false), inner);
                Ok(a.add(&b))
            }
            Region::Annulus(k) => {
                let c = chi_k(r, k, &self.decomp)?.derivative;
                let ct = chitilde_k(r, k, &self.decomp)?.derivative;
                let a = term(
                    slot(k),
                    radial_wirtinger(c, z, r, slot(k + 1) == 0),
                    self.e_scalar(k + 1, z)?,
                );
                let b = term(
                    slot(k + 1),
                    radial_wirtinger(ct, z, r, slot(k) == 0),
                    self.e_scalar(k, z)?,
                );
                Ok(a.add(&b))
            }
            Region::Beyond => Err(Error::Beyond {
                r,
                outer: self.decomp.outer_radius(),
            }),
        }
    }

    /// `V = (D u) u^* / |u|^2`. Acts on `u` exactly like [`Self::eval_v`],
    /// although the matrices themselves differ.
    pub fn eval_v_rank_one(&self, z: Complex64) -> Result<PotentialMatrix<2>> {
        let u = self.eval_u(z)?;
        if u.is_zero() {
            return Err(Error::Origin);
        }
        let du = self.dirac_u(z)?;
        Ok(PotentialMatrix::rank_one(&du.components_at(u.log_mag), &u))
    }

    /// Degree of the fastest-oscillating mode active at radius `r`.
    pub fn n_local(&self, r: f64) -> f64 {
        match self.decomp.annulus_index(r) {
            Region::Core => self.decomp.n[0] as f64,
            Region::Annulus(k) => self.decomp.n[k + 1] as f64,
            Region::Beyond => *self.decomp.n.last().expect("n0 present") as f64,
        }
    }

    pub fn default_step(&self, r: f64, h_factor: f64) -> f64 {
        let h = fd_step(r, self.n_local(r), h_factor);
        match self.origin.transition_position(r) {
            Some((s, w)) => tail_step(h, r, s, w, h_factor),
            None => h,
        }
    }

    /// `|D_fd u - V u| / |u|` with central differences of step `h`.
    pub fn residual(&self, z: Complex64, h: f64) -> Result<f64> {
        let u = self.eval_u(z)?;
        if u.is_zero() {
            return Err(Error::Origin);
        }
        let field = |x: &[f64]| self.eval_u(Complex64::new(x[0], x[1]));
        let du = dirac_fd(field, &[z.re, z.im], h)?;
        let vu = self.eval_v(z)?.apply(&u);
        Ok(du.relative_difference(&vu) * (du.log_mag.max(vu.log_mag) - u.log_mag).exp())
    }
}

pub fn eval_e2(k: usize, z: Complex64, c: &Construction2D) -> Result<ScaledSpinor<2>> {
    c.eval_e(k, z)
}

pub fn eval_u2(z: Complex64, c: &Construction2D) -> Result<ScaledSpinor<2>> {
    c.eval_u(z)
}

pub fn eval_v2(z: Complex64, c: &Construction2D) -> Result<PotentialMatrix<2>> {
    c.eval_v(z)
}

pub fn residual2(z: Complex64, c: &Construction2D, h: f64) -> Result<f64> {
    c.residual(z, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_H_FACTOR;

    fn build(eps: f64, k_max: usize) -> Construction2D {
        let p = ConstructionParams::new(eps, 41, k_max, Dimension::Two).unwrap();
        Construction2D::build(p).unwrap()
    }

    fn polar(r: f64, theta: f64) -> Complex64 {
        Complex64::from_polar(r, theta)
    }

    #[test]
    fn first_mode_at_rho0() {
        let c = build(0.0, 2);
        let e = c.eval_e(0, Complex64::new(c.decomp.rho[0], 0.0)).unwrap();
        assert!((e.log_mag + 20.5 * 41f64.ln()).abs() < 1e-12);
        assert!((e.log_mag + 76.128).abs() < 1e-3);
        assert_eq!(e.dir[1], O);
        assert!((e.dir[0] - 1.0).norm() < 1e-15);
        assert_eq!(c.eval_e(0, O), Err(Error::Origin));
        let odd = c.eval_e(1, polar(7.0, 0.3)).unwrap();
        assert_eq!(odd.dir[0], O);
        assert!((odd.dir[1] - Complex64::from_polar(1.0, 53.0 * 0.3)).norm() < 1e-12);
    }

    #[test]
    fn neighbouring_modes_match_at_inner_radius() {
        for &eps in &[-0.5, 0.0, 0.5] {
            let c = build(eps, 6);
            for k in 0..6 {
                let z = polar(c.decomp.rho[k], 1.1);
                let a = c.eval_e(k, z).unwrap().log_mag;
                let b = c.eval_e(k + 1, z).unwrap().log_mag;
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{eps} {k}");
            }
        }
    }

    #[test]
    fn modes_are_zero_modes() {
        let c = build(0.0, 3);
        for k in 0..3 {
            let r = 0.5 * (c.decomp.rho[k] + c.decomp.rho[k + 1]);
            let z = polar(r, 0.8);
            let h = fd_step(r, c.decomp.n[k] as f64, DEFAULT_H_FACTOR);
            let field = |x: &[f64]| c.eval_e(k, Complex64::new(x[0], x[1]));
            let d = dirac_fd(field, &[z.re, z.im], h).unwrap();
            let rel = (d.log_mag - c.eval_e(k, z).unwrap().log_mag).exp();
            assert!(rel <= 1e-6, "k = {k}: {rel}");
        }
    }

    #[test]
    fn u_structure() {
        let c = build(0.0, 3);
        assert!(c.eval_u(O).unwrap().is_zero());
        for k in 0..3 {
            let s = c.decomp.rho_sub[k];
            for i in 0..16 {
                let r = s[0] + (s[1] - s[0]) * i as f64 / 16.0;
                let z = polar(r, 0.1 * i as f64);
                assert_eq!(c.eval_u(z).unwrap(), c.eval_e(k, z).unwrap());
                let r = s[3] + (s[4] - s[3]) * (i + 1) as f64 / 17.0;
                let z = polar(r, 0.1 * i as f64);
                assert_eq!(c.eval_u(z).unwrap(), c.eval_e(k + 1, z).unwrap());
            }
        }
        assert!(matches!(
            c.eval_u(polar(c.decomp.outer_radius() * 1.01, 0.0)),
            Err(Error::Beyond { .. })
        ));
    }

    #[test]
    fn potential_pattern() {
        let c = build(0.0, 3);
        for k in 0..3 {
            let s = c.decomp.rho_sub[k];
            let quiet = c.eval_v(polar(0.5 * (s[0] + s[1]), 0.4)).unwrap();
            assert!(quiet.is_zero());
            let rising = c.eval_v(polar(0.5 * (s[1] + s[2]), 0.4)).unwrap();
            let falling = c.eval_v(polar(0.5 * (s[2] + s[3]), 0.4)).unwrap();
            let (a, b) = (slot(k), slot(k + 1));
            for (m, nz) in [(rising, a), (falling, b)] {
                for i in 0..2 {
                    for j in 0..2 {
                        assert_eq!(m.entries[i][j] != O, i == nz && j == nz);
                    }
                }
            }
        }
        // Odd annulus: rising quarter uses entry (2,2).
        let s = c.decomp.rho_sub[1];
        let m = c.eval_v(polar(0.5 * (s[1] + s[2]), 0.0)).unwrap();
        assert!(m.entries[1][1] != O);
    }

    #[test]
    fn residuals_small_everywhere() {
        let c = build(0.0, 3);
        let mut radii = vec![0.2 * c.decomp.rho[0], 0.3 * c.decomp.rho[0], 0.4 * c.decomp.rho[0], 0.6 * c.decomp.rho[0], 0.7 * c.decomp.rho[0]];
        for k in 0..3 {
            let s = c.decomp.rho_sub[k];
            for j in 0..4 {
                radii.push(s[j] + 0.37 * (s[j + 1] - s[j]));
            }
        }
        for (i, &r) in radii.iter().enumerate() {
            let z = polar(r, 0.3 + i as f64);
            let res = c.residual(z, c.default_step(r, DEFAULT_H_FACTOR)).unwrap();
            assert!(res <= 1e-5, "r = {r}: {res}");
        }
    }

    #[test]
    fn rank_one_matches_explicit_on_u() {
        let c = build(0.5, 3);
        let mut radii = vec![0.3 * c.decomp.rho[0], 0.6 * c.decomp.rho[0]];
        for k in 0..3 {
            let s = c.decomp.rho_sub[k];
            radii.push(0.5 * (s[1] + s[2]));
            radii.push(0.5 * (s[2] + s[3]));
        }
        for &r in &radii {
            let z = polar(r, 2.0);
            let u = c.eval_u(z).unwrap();
            let a = c.eval_v(z).unwrap().apply(&u);
            let b = c.eval_v_rank_one(z).unwrap().apply(&u);
            let scale = (a.log_mag.max(b.log_mag) - u.log_mag).exp();
            assert!(a.relative_difference(&b) * scale <= 1e-10 * scale.max(1.0), "r = {r}");
        }
    }

    #[test]
    fn origin_ring_reproduces_dirac_u() {
        let c = build(0.0, 1);
        let r = 0.35 * c.decomp.rho[0];
        let z = polar(r, 0.9);
        let u = c.eval_u(z).unwrap();
        let du = c.dirac_u(z).unwrap();
        let vu = c.eval_v(z).unwrap().apply(&u);
        assert!(du.relative_difference(&vu) <= 1e-12);
        assert!(c.residual(z, c.default_step(r, DEFAULT_H_FACTOR)).unwrap() <= 1e-6);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let p = ConstructionParams::new(0.0, 41, 2, Dimension::Three).unwrap();
        assert_eq!(Construction2D::build(p), Err(Error::Dimension(3)));
    }
}
