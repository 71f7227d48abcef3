//! The smooth step `chi` and its rescaled copies on annuli and on the core ball.
//!
//! `chi(s) = a(s) / (a(s) + a(1 - s))` with `a(s) = exp(-1/s)` for `s > 0`.
//! Written as a logistic in `t = 1/s - 1/(1-s)` it never forms tiny
//! intermediate quotients.

use crate::params::AnnulusDecomposition;
use crate::{Error, Result};

/// Smooth monotone step from 0 (at `s <= 0`) to 1 (at `s >= 1`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub fn chi(&self, s: f64) -> f64 {
        chi(s)
    }

    pub fn chi_prime(&self, s: f64) -> f64 {
        chi_prime(s)
    }
}

fn logistic(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

pub fn chi(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        logistic(1.0 / s - 1.0 / (1.0 - s))
    }
}

pub fn chi_prime(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let t = 1.0 / s - 1.0 / (1.0 - s);
    // chi (1 - chi) = logistic(t) logistic(-t)
    logistic(t) * logistic(-t) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)))
}

/// Value and `r`-derivative of a rescaled cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffValue {
    pub value: f64,
    pub derivative: f64,
}

impl CutoffValue {
    const ZERO: Self = Self {
        value: 0.0,
        derivative: 0.0,
    };
    const ONE: Self = Self {
        value: 1.0,
        derivative: 0.0,
    };
}

fn in_annulus(r: f64, k: usize, dc: &AnnulusDecomposition) -> Result<[f64; 5]> {
    dc.check_annulus(k)?;
    let sub = dc.rho_sub[k];
    if !(sub[0]..=sub[4]).contains(&r) {
        return Err(Error::OutsideAnnulus {
            r,
            k,
            lo: sub[0],
            hi: sub[4],
        });
    }
    Ok(sub)
}

/// `chi_k(r) = chi((r - rho_{k1}) / q_k)`, rising across the second quarter.
pub fn chi_k(r: f64, k: usize, dc: &AnnulusDecomposition) -> Result<CutoffValue> {
    let sub = in_annulus(r, k, dc)?;
    if r <= sub[1] {
        return Ok(CutoffValue::ZERO);
    }
    if r >= sub[2] {
        return Ok(CutoffValue::ONE);
    }
    let q = dc.quarter(k);
    let s = (r - sub[1]) / q;
    Ok(CutoffValue {
        value: chi(s),
        derivative: chi_prime(s) / q,
    })
}

/// `chitilde_k(r) = chi((rho_{k3} - r) / q_k)`, falling across the third quarter.
pub fn chitilde_k(r: f64, k: usize, dc: &AnnulusDecomposition) -> Result<CutoffValue> {
    let sub = in_annulus(r, k, dc)?;
    if r <= sub[2] {
        return Ok(CutoffValue::ONE);
    }
    if r >= sub[3] {
        return Ok(CutoffValue::ZERO);
    }
    let q = dc.quarter(k);
    let s = (sub[3] - r) / q;
    Ok(CutoffValue {
        value: chi(s),
        derivative: -chi_prime(s) / q,
    })
}

/// Core-ball cutoffs for the ball of radius `rho`: `psi` rises on
/// `(rho/4, rho/2)` and `psitilde` falls on `(rho/2, 3 rho/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginCutoffs {
    pub rho: f64,
}

impl OriginCutoffs {
    pub fn psi(&self, r: f64) -> CutoffValue {
        let q = self.rho / 4.0;
        if r <= q {
            return CutoffValue::ZERO;
        }
        if r >= 2.0 * q {
            return CutoffValue::ONE;
        }
        let s = (r - q) / q;
        CutoffValue {
            value: chi(s),
            derivative: chi_prime(s) / q,
        }
    }

    pub fn psitilde(&self, r: f64) -> CutoffValue {
        let q = self.rho / 4.0;
        if r <= 2.0 * q {
            return CutoffValue::ONE;
        }
        if r >= 3.0 * q {
            return CutoffValue::ZERO;
        }
        let s = (3.0 * q - r) / q;
        CutoffValue {
            value: chi(s),
            derivative: -chi_prime(s) / q,
        }
    }

    /// `(s, w)` where `w` is the width of the transition shell containing
    /// `r` and `s` the distance to its nearer end in units of `w`.
    pub fn transition_position(&self, r: f64) -> Option<(f64, f64)> {
        let q = self.rho / 4.0;
        if r <= q || r >= 3.0 * q {
            return None;
        }
        let t = (r / q).fract();
        Some((t.min(1.0 - t), q))
    }
}
