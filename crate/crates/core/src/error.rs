use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid window parameters: {0}")]
    InvalidWindow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample points must be strictly increasing and of equal length <= {max}")]
    NonIncreasingSamples { max: usize },

    #[error("Zak transform period must be positive, got {0}")]
    NonPositivePeriod(f64),

    #[error("imaginary part {im:e} of Zg(x, 1/2) exceeds tolerance {tol:e} at x = {x}")]
    HalfLineNotReal { x: f64, im: f64, tol: f64 },

    #[error("no zero of the Zak transform found on the line xi = 1/2 (residual {residual:e})")]
    ZeroNotFound { residual: f64 },

    #[error("grid minimum of |Zg| at xi = {xi} is off the line xi = 1/2")]
    ZeroOffHalfLine { xi: f64 },

    #[error("multiple Zak zero candidates: {0}")]
    MultipleZeros(String),

    #[error("lattice density alpha*beta = {alpha_beta} must be < 1 for this operation")]
    DensityViolation { alpha_beta: f64 },

    #[error("eps = {eps} must satisfy 0 < eps < (1 - alpha)/2 = {limit}")]
    EpsTooLarge { eps: f64, limit: f64 },

    #[error("no admissible lattice point for residue {l} (implementation bug)")]
    NoAdmissiblePoint { l: usize },

    #[error("perturbation delta_{k} = {delta} lies outside the admissible interval [{lo}, {hi}]")]
    PerturbationOutsideInterval { k: usize, delta: f64, lo: f64, hi: f64 },

    #[error("alternating sign pattern violated at k = {k}")]
    SignPatternViolated { k: i64 },

    #[error("uniform gap nu = {nu:e} below floor {floor:e}")]
    NuBelowFloor { nu: f64, floor: f64 },

    #[error("section too small: interior column half-width would be {0}")]
    SectionTooSmall(i64),

    #[error("matrix section is numerically singular (condition number {cond:e})")]
    Singular { cond: f64 },

    #[error("Fourier factorization deviation {deviation:e} exceeds {limit:e}")]
    FactorizationMismatch { deviation: f64, limit: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
