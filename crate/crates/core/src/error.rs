use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("epsilon must be finite and < 1 (got {0})")]
    Epsilon(f64),
    #[error("seed degree n0 must be odd and >= 3 (got {0})")]
    SeedDegree(u64),
    #[error("dimension must be 2 or 3 (got {0})")]
    Dimension(u32),
    #[error("degree sequence overflows at annulus {0}")]
    DegreeOverflow(usize),
    #[error("annulus index {index} out of range (decomposition has {count} annuli)")]
    AnnulusIndex { index: usize, count: usize },
    #[error("radius {r} lies outside annulus {k} = [{lo}, {hi}]")]
    OutsideAnnulus { r: f64, k: usize, lo: f64, hi: f64 },
    #[error("radius {r} is beyond the built domain (outer radius {outer})")]
    Beyond { r: f64, outer: f64 },
    #[error("evaluation at the origin is undefined")]
    Origin,
    #[error("invalid harmonic index: {0}")]
    HarmonicIndex(String),
    #[error("argument out of range: {0}")]
    Argument(String),
    #[error("weight exponent {0} exceeds the floating-point budget")]
    WeightOverflow(f64),
    #[error("support [{r_in}, {r_out}] is not inside |x| > {rho}")]
    Support { r_in: f64, r_out: f64, rho: f64 },
}
