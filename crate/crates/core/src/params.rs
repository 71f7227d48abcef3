//! Degrees, radii and log-amplitudes of the annulus decomposition.
//!
//! Starting from an odd seed degree `n0`, the degrees grow by
//! `n_{k+1} = n_k + 2 floor(sqrt(n_k))`, the radii are `rho_k = n_k^{1/(1+delta)}`
//! and the amplitudes obey `a_{k+1} = rho_k^{2 d_k} a_k` with `a_0 = 1`.
//! Amplitudes overflow any float after a handful of annuli, so only
//! `ln a_k` is ever stored.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Spatial dimension of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn from_u32(d: u32) -> Result<Self> {
        match d {
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            other => Err(Error::Dimension(other)),
        }
    }

    pub fn as_u32(self) -> u32 {
        match self {
            Self::Two => 2,
            Self::Three => 3,
        }
    }
}

/// `delta = 1 - 2 epsilon`; rejects `epsilon >= 1` (where `delta <= -1`).
pub fn derive_delta(epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon >= 1.0 {
        return Err(Error::Epsilon(epsilon));
    }
    Ok(1.0 - 2.0 * epsilon)
}

/// Degrees at or above this bound are rejected as a parameter error.
pub const MAX_DEGREE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub epsilon: f64,
    pub delta: f64,
    pub n0: u64,
    pub k_max: usize,
    pub dimension: Dimension,
}

impl ConstructionParams {
    pub fn new(epsilon: f64, n0: u64, k_max: usize, dimension: Dimension) -> Result<Self> {
        let delta = derive_delta(epsilon)?;
        if n0 < 3 || n0 % 2 == 0 {
            return Err(Error::SeedDegree(n0));
        }
        Ok(Self {
            epsilon,
            delta,
            n0,
            k_max,
            dimension,
        })
    }

    /// Exponent `2 - 2 epsilon = 1 + delta` of the decay envelope.
    pub fn decay_exponent(&self) -> f64 {
        1.0 + self.delta
    }
}

/// Where a radius falls with respect to the built annuli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `r < rho_0`.
    Core,
    /// `rho_k <= r <= rho_{k+1}`; ties go to the lower annulus.
    Annulus(usize),
    /// `r > rho_{k_max}`.
    Beyond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusDecomposition {
    pub params: ConstructionParams,
    /// Degrees `n_0..=n_{k_max}`.
    pub n: Vec<u64>,
    /// Half increments `d_k = (n_{k+1} - n_k) / 2`, one per annulus.
    pub d: Vec<u64>,
    /// Radii `rho_0..=rho_{k_max}`.
    pub rho: Vec<f64>,
    /// Quarter points `rho_{k0}..rho_{k4}` of each annulus.
    pub rho_sub: Vec<[f64; 5]>,
    /// `ln a_0..=ln a_{k_max}`.
    pub log_a: Vec<f64>,
}

impl AnnulusDecomposition {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        let k_max = params.k_max;
        let inv = 1.0 / (1.0 + params.delta);

        let mut n = vec![params.n0];
        let mut d = Vec::new();
        for k in 0..k_max {
            let nk = n[k];
            let step = nk.isqrt();
            let next = step
                .checked_mul(2)
                .and_then(|s| nk.checked_add(s))
                .filter(|&v| v < MAX_DEGREE)
                .ok_or(Error::DegreeOverflow(k))?;
            d.push(step);
            n.push(next);
        }

        let rho: Vec<f64> = n.iter().map(|&nk| (nk as f64).powf(inv)).collect();
        if rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::DegreeOverflow(k_max));
        }

        let rho_sub = (0..k_max)
            .map(|k| {
                let (lo, hi) = (rho[k], rho[k + 1]);
                let q = (hi - lo) / 4.0;
                [lo, lo + q, lo + 2.0 * q, lo + 3.0 * q, hi]
            })
            .collect();

        let mut log_a = vec![0.0];
        for k in 0..k_max {
            log_a.push(log_a[k] + 2.0 * d[k] as f64 * rho[k].ln());
        }

        Ok(Self {
            params,
            n,
            d,
            rho,
            rho_sub,
            log_a,
        })
    }

    /// Number of annuli (`k_max`).
    pub fn annuli(&self) -> usize {
        self.d.len()
    }

    pub fn inner_radius(&self) -> f64 {
        self.rho[0]
    }

    pub fn outer_radius(&self) -> f64 {
        self.rho[self.rho.len() - 1]
    }

    /// Width of one quarter of annulus `k`.
    pub fn quarter(&self, k: usize) -> f64 {
        (self.rho[k + 1] - self.rho[k]) / 4.0
    }

    pub fn annulus_index(&self, r: f64) -> Region {
        if r < self.rho[0] {
            return Region::Core;
        }
        if r > self.outer_radius() || self.annuli() == 0 {
            return Region::Beyond;
        }
        // First radius >= r; boundary points belong to the lower annulus.
        let j = self.rho.partition_point(|&x| x < r);
        Region::Annulus(j.saturating_sub(1).min(self.annuli() - 1))
    }

    /// `ln |E_k|` at radius `r` without the angular factor: `ln a_k - n_k ln r`.
    pub fn log_radial(&self, k: usize, r: f64) -> f64 {
        self.log_a[k] - self.n[k] as f64 * r.ln()
    }

    /// Worst-case deviations of the sequences from their asymptotic forms.
    pub fn diagnostics(&self) -> SequenceDiagnostics {
        let mut out = SequenceDiagnostics::default();
        let e = 1.0 + self.params.delta;
        for k in 0..self.annuli() {
            let n = self.n[k] as f64;
            if self.n[k] >= 100 {
                let dev = (self.d[k] as f64 - n.sqrt()).abs();
                out.d_deviation = Some(out.d_deviation.map_or(dev, |v| v.max(dev)));
            }
            let rho = self.rho[k];
            if rho >= 50.0 {
                let gap = (self.rho[k + 1] - rho) * e / (2.0 * rho.powf((1.0 - self.params.delta) / 2.0));
                let dev = (gap - 1.0).abs();
                out.gap_deviation = Some(out.gap_deviation.map_or(dev, |v| v.max(dev)));
            }
            if self.n[k] >= 9 {
                out.rho_ratio = out.rho_ratio.max(self.rho[k + 1] / rho);
            }
            for i in 0..100 {
                let r = rho + (self.rho[k + 1] - rho) * i as f64 / 99.0;
                let gap = (self.log_radial(k, r) - self.log_radial(k + 1, r)).abs();
                out.log_ratio = out.log_ratio.max(gap);
            }
        }
        out
    }

    pub(crate) fn check_annulus(&self, k: usize) -> Result<()> {
        if k >= self.annuli() {
            return Err(Error::AnnulusIndex {
                index: k,
                count: self.annuli(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.n.len() {
            return Err(Error::AnnulusIndex {
                index: k,
                count: self.annuli(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SequenceDiagnostics {
    /// `max |d_k - sqrt(n_k)|` over `n_k >= 100`.
    pub d_deviation: Option<f64>,
    /// `max |(rho_{k+1} - rho_k)(1+delta) / (2 rho_k^{(1-delta)/2}) - 1|` over `rho_k >= 50`.
    pub gap_deviation: Option<f64>,
    /// `max |ln|E_k| - ln|E_{k+1}||` (radial parts) over 100 radii per annulus.
    pub log_ratio: f64,
    /// `max rho_{k+1} / rho_k` over `n_k >= 9`.
    pub rho_ratio: f64,
}
