//! Sharp-decay zero modes of the massless Dirac operator in two and three
//! dimensions, and numerical certification of the weighted Carleman
//! inequalities that rule out faster decay.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: annulus radii, degrees and log-amplitudes of the glued construction.
//! * [`specfun`]: associated Legendre functions, spherical and spinor harmonics.
//! * [`smooth`]: the smooth step profile and the per-annulus cutoffs.
//! * [`algebra`]: Pauli/Dirac matrices, log-scaled spinors and finite-difference Dirac operators.
//! * [`build2d`], [`build3d`]: the explicit solutions `u` and potentials `V` with `D u = V u`.
//! * [`carleman`]: quadrature checks of the weighted inequalities.
//! * [`verify`]: whole-construction scans aggregated into a [`verify::VerificationReport`].
//! * [`cli`]: configuration and the `verify` / `profile` / `carleman` commands.

pub mod algebra;
pub mod build2d;
pub mod build3d;
pub mod carleman;
pub mod cli;
pub mod error;
pub mod params;
pub mod smooth;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
