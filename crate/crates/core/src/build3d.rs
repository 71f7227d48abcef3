//! Spatial construction: `u` and `V` with `D3 u = V u`, glued from the zero
//! modes `E_k = a_k r^{-n_k} F_{n_k}` across the annuli.
//!
//! `E_k` occupies the upper pair of components for even `k` and the lower
//! pair for odd `k`. For a zero mode `G` and a radial cutoff `c(r)`,
//! `-i sigma.grad (c G) = -i c' (sigma.xhat) G`, so `D3 u` is known in closed
//! form and `V` is the rank-one matrix `(D3 u) u^* / |u|^2`.
//!
//! The core ball blends `E_0` into the regular zero mode
//! `r^{n_0 - 2} sqrt(4 pi / kappa) Y_{kappa, 1/2}` with `kappa = n_0 - 1`,
//! carried in the lower pair.

use num_complex::Complex64;

use crate::algebra::{dirac_fd, fd_step, tail_step, pauli_dot, PotentialMatrix, ScaledSpinor};
use crate::params::{AnnulusDecomposition, ConstructionParams, Dimension, Region};
use crate::smooth::{chi_k, chitilde_k, CutoffProfile, OriginCutoffs};
use crate::specfun::{f_m_constant, f_m_printed, spinor_harm_half, SpinorHalf};
use crate::{Error, Result};

const O: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Regular zero mode used inside the core ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorMode {
    /// Radial power `n_0 - 2`.
    pub power: u64,
    /// Spinor-harmonic index `n_0 - 1`.
    pub kappa: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction3D {
    pub params: ConstructionParams,
    pub decomp: AnnulusDecomposition,
    pub profile: CutoffProfile,
    pub origin: OriginCutoffs,
    pub interior: InteriorMode,
}

/// First component index of the pair carrying mode `k`.
pub fn block(k: usize) -> usize {
    2 * (k % 2)
}

struct Polar {
    r: f64,
    cos_theta: f64,
    e_iphi: Complex64,
    xhat: [f64; 3],
}

fn polar(x: [f64; 3]) -> Result<Polar> {
    let rxy = x[0].hypot(x[1]);
    let r = rxy.hypot(x[2]);
    if r == 0.0 {
        return Err(Error::Origin);
    }
    let e_iphi = if rxy == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(x[0] / rxy, x[1] / rxy)
    };
    Ok(Polar {
        r,
        cos_theta: (x[2] / r).clamp(-1.0, 1.0),
        e_iphi,
        xhat: [x[0] / r, x[1] / r, x[2] / r],
    })
}

fn half_norm(v: &SpinorHalf) -> f64 {
    v[0].norm().hypot(v[1].norm())
}

/// A pair placed at `offset`, with magnitude `exp(log_mag)`.
fn placed(offset: usize, log_mag: f64, pair: SpinorHalf) -> ScaledSpinor<4> {
    let n = half_norm(&pair);
    let mut v = [O; 4];
    v[offset] = pair[0];
    v[offset + 1] = pair[1];
    ScaledSpinor::pack(log_mag - n.ln(), v)
}

fn sigma_xhat(xhat: [f64; 3], v: SpinorHalf) -> SpinorHalf {
    let m = pauli_dot([
        Complex64::new(xhat[0], 0.0),
        Complex64::new(xhat[1], 0.0),
        Complex64::new(xhat[2], 0.0),
    ]);
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `-i c' (sigma.xhat) G` for `G` stored at `offset`, moved to the other pair.
fn cutoff_term(s: &ScaledSpinor<4>, offset: usize, cprime: f64, xhat: [f64; 3]) -> ScaledSpinor<4> {
    if cprime == 0.0 || s.is_zero() {
        return ScaledSpinor::zero();
    }
    let g = [s.dir[offset], s.dir[offset + 1]];
    let w = sigma_xhat(xhat, g);
    let other = 2 - offset;
    let mut v = [O; 4];
    v[other] = MINUS_I * cprime * w[0];
    v[other + 1] = MINUS_I * cprime * w[1];
    ScaledSpinor::pack(s.log_mag, v)
}

impl Construction3D {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        if params.dimension != Dimension::Three {
            return Err(Error::Dimension(params.dimension.as_u32()));
        }
        let decomp = AnnulusDecomposition::build(params)?;
        // Warm the normalization cache so later sweeps only read it.
        for &m in &decomp.n {
            f_m_constant(m)?;
        }
        let origin = OriginCutoffs { rho: decomp.rho[0] };
        let n0 = params.n0;
        Ok(Self {
            params,
            decomp,
            profile: CutoffProfile,
            origin,
            interior: InteriorMode {
                power: n0 - 2,
                kappa: (n0 - 1) as i32,
            },
        })
    }

    fn mode(&self, k: usize, p: &Polar) -> Result<ScaledSpinor<4>> {
        self.decomp.check_mode(k)?;
        let m = self.decomp.n[k];
        let f = f_m_printed(m, p.cos_theta, p.e_iphi)?;
        let log_mag = self.decomp.log_a[k] - m as f64 * p.r.ln() + half_norm(&f).ln();
        Ok(placed(block(k), log_mag, f))
    }

    fn interior_mode(&self, p: &Polar) -> Result<ScaledSpinor<4>> {
        let kappa = self.interior.kappa;
        let y = spinor_harm_half(kappa, p.cos_theta, p.e_iphi)?;
        let c = (4.0 * std::f64::consts::PI / kappa as f64).sqrt();
        let log_mag = self.interior.power as f64 * p.r.ln() + (c * half_norm(&y)).ln();
        Ok(placed(2, log_mag, y))
    }

    pub fn eval_e(&self, k: usize, x: [f64; 3]) -> Result<ScaledSpinor<4>> {
        self.mode(k, &polar(x)?)
    }

    /// `r^{n_0-2} sqrt(4 pi / kappa) Y_{kappa,1/2}` in the lower pair.
    pub fn eval_interior(&self, x: [f64; 3]) -> Result<ScaledSpinor<4>> {
        self.interior_mode(&polar(x)?)
    }

    fn beyond(&self, r: f64) -> Error {
        Error::Beyond {
            r,
            outer: self.decomp.outer_radius(),
        }
    }

    pub fn eval_u(&self, x: [f64; 3]) -> Result<ScaledSpinor<4>> {
        let p = match polar(x) {
            Ok(p) => p,
            Err(_) => return Ok(ScaledSpinor::zero()),
        };
        match self.decomp.annulus_index(p.r) {
            Region::Core => {
                let psi = self.origin.psi(p.r).value;
                let psit = self.origin.psitilde(p.r).value;
                if psit == 0.0 {
                    return self.mode(0, &p);
                }
                let outer = self.mode(0, &p)?.scale(psi);
                Ok(outer.add(&self.interior_mode(&p)?.scale(psit)))
            }
            Region::Annulus(k) => {
                let c = chi_k(p.r, k, &self.decomp)?.value;
                let ct = chitilde_k(p.r, k, &self.decomp)?.value;
                if c == 0.0 {
                    return self.mode(k, &p);
                }
                if ct == 0.0 {
                    return self.mode(k + 1, &p);
                }
                let a = self.mode(k, &p)?.scale(ct);
                Ok(a.add(&self.mode(k + 1, &p)?.scale(c)))
            }
            Region::Beyond => Err(self.beyond(p.r)),
        }
    }

    /// `D3 u` from the analytic cutoff derivatives.
    pub fn dirac_u(&self, x: [f64; 3]) -> Result<ScaledSpinor<4>> {
        let p = polar(x)?;
        match self.decomp.annulus_index(p.r) {
            Region::Core => {
                let psi = self.origin.psi(p.r).derivative;
                let psit = self.origin.psitilde(p.r).derivative;
                let mut out = ScaledSpinor::zero();
                if psi != 0.0 {
                    out = out.add(&cutoff_term(&self.mode(0, &p)?, block(0), psi, p.xhat));
                }
                if psit != 0.0 {
                    out = out.add(&cutoff_term(&self.interior_mode(&p)?, 2, psit, p.xhat));
                }
                Ok(out)
            }
            Region::Annulus(k) => {
                let c = chi_k(p.r, k, &self.decomp)?.derivative;
                let ct = chitilde_k(p.r, k, &self.decomp)?.derivative;
                let mut out = ScaledSpinor::zero();
                if ct != 0.0 {
                    out = out.add(&cutoff_term(&self.mode(k, &p)?, block(k), ct, p.xhat));
                }
                if c != 0.0 {
                    out = out.add(&cutoff_term(&self.mode(k + 1, &p)?, block(k + 1), c, p.xhat));
                }
                Ok(out)
            }
            Region::Beyond => Err(self.beyond(p.r)),
        }
    }

    /// `V` on the annuli from the two explicit transition matrices, and by
    /// the rank-one recipe with analytic `D3 u` on the core ball.
    pub fn eval_v(&self, x: [f64; 3]) -> Result<PotentialMatrix<4>> {
        let p = polar(x)?;
        let k = match self.decomp.annulus_index(p.r) {
            Region::Core => return self.eval_v_rank_one_analytic(x),
            Region::Annulus(k) => k,
            Region::Beyond => return Err(self.beyond(p.r)),
        };
        let c = chi_k(p.r, k, &self.decomp)?;
        let ct = chitilde_k(p.r, k, &self.decomp)?;
        let mut v = PotentialMatrix::zero();
        if c.derivative == 0.0 && ct.derivative == 0.0 {
            return Ok(v);
        }
        let ek = self.mode(k, &p)?;
        let ek1 = self.mode(k + 1, &p)?;
        let scale = ek.log_mag.max(ek1.log_mag);
        let pair = |s: &ScaledSpinor<4>, off: usize| {
            let v = s.components_at(scale);
            [v[off], v[off + 1]]
        };
        let (bk, bk1) = (block(k), block(k + 1));
        // Pairs of u: chitilde E_k at block(k), chi E_{k+1} at block(k+1).
        let ek_pair = pair(&ek, bk);
        let ek1_pair = pair(&ek1, bk1);
        let uk = [ek_pair[0] * ct.value, ek_pair[1] * ct.value];
        let uk1 = [ek1_pair[0] * c.value, ek1_pair[1] * c.value];
        let denom = half_norm(&uk).powi(2) + half_norm(&uk1).powi(2);
        let mut fill = |row_block: usize, w: SpinorHalf| {
            for (col_block, col) in [(bk, uk), (bk1, uk1)] {
                for i in 0..2 {
                    for j in 0..2 {
                        v.entries[row_block + i][col_block + j] += w[i] * col[j].conj() / denom;
                    }
                }
            }
        };
        if c.derivative != 0.0 {
            // Rows of block(k): (-i sigma.xhat)(chi' E_{k+1}) times u^*.
            let s = sigma_xhat(p.xhat, ek1_pair);
            fill(bk, [MINUS_I * c.derivative * s[0], MINUS_I * c.derivative * s[1]]);
        }
        if ct.derivative != 0.0 {
            let s = sigma_xhat(p.xhat, ek_pair);
            fill(bk1, [MINUS_I * ct.derivative * s[0], MINUS_I * ct.derivative * s[1]]);
        }
        Ok(v)
    }

    /// `(D3 u) u^* / |u|^2` with `D3 u` from [`Self::dirac_u`].
    pub fn eval_v_rank_one_analytic(&self, x: [f64; 3]) -> Result<PotentialMatrix<4>> {
        let u = self.eval_u(x)?;
        if u.is_zero() {
            return Err(Error::Origin);
        }
        let du = self.dirac_u(x)?;
        Ok(PotentialMatrix::rank_one(&du.components_at(u.log_mag), &u))
    }

    /// `(D3 u) u^* / |u|^2` with `D3 u` by central differences of step `h`.
    pub fn eval_v_rank_one_fd(&self, x: [f64; 3], h: f64) -> Result<PotentialMatrix<4>> {
        let u = self.eval_u(x)?;
        if u.is_zero() {
            return Err(Error::Origin);
        }
        let du = dirac_fd(|y: &[f64]| self.eval_u([y[0], y[1], y[2]]), &x, h)?;
        Ok(PotentialMatrix::rank_one(&du.components_at(u.log_mag), &u))
    }

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
    pub fn residual(&self, x: [f64; 3], h: f64) -> Result<f64> {
        let u = self.eval_u(x)?;
        if u.is_zero() {
            return Err(Error::Origin);
        }
        let du = dirac_fd(|y: &[f64]| self.eval_u([y[0], y[1], y[2]]), &x, h)?;
        let vu = self.eval_v(x)?.apply(&u);
        Ok(du.relative_difference(&vu) * (du.log_mag.max(vu.log_mag) - u.log_mag).exp())
    }
}

pub fn eval_e3(k: usize, x: [f64; 3], c: &Construction3D) -> Result<ScaledSpinor<4>> {
    c.eval_e(k, x)
}

pub fn eval_u3(x: [f64; 3], c: &Construction3D) -> Result<ScaledSpinor<4>> {
    c.eval_u(x)
}

pub fn eval_v3(x: [f64; 3], c: &Construction3D) -> Result<PotentialMatrix<4>> {
    c.eval_v(x)
}

pub fn residual3(x: [f64; 3], c: &Construction3D, h: f64) -> Result<f64> {
    c.residual(x, h)
}
