use thiserror::Error;

/// Failures raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {dim} outside supported range 1..={max}")]
    Dimension { dim: usize, max: usize },

    #[error("expected {expected} entries for a square matrix, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("eigenvector basis is near-defective (condition score {score:.3e})")]
    NearDefective { score: f64 },

    #[error("iteration did not converge after {iterations} steps")]
    NonConvergence { iterations: usize },

    #[error("matrix is singular (|det| = {det_abs:.3e})")]
    Singular { det_abs: f64 },

    #[error("quadrature depth exceeded: estimate {estimate:.12e}, error bound {error_bound:.3e}")]
    DepthExceeded { estimate: f64, error_bound: f64 },

    #[error("invalid quadrature spec: {0}")]
    QuadratureSpec(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("splitting susceptibility diverges at the exceptional point (|Δ| = {delta_abs:.3e})")]
    DivergentAtEp { delta_abs: f64 },

    #[error("thermal occupation requires a positive frequency, got {nu}")]
    NonPositiveFrequency { nu: f64 },

    #[error("ν I − M is singular at ν = {nu} (lasing condition)")]
    SingularAtFrequency { nu: f64 },

    #[error("covariance matrix violates the uncertainty relation: {0}")]
    NonPhysicalCovariance(String),

    #[error("pure state with nonzero purity derivative ({dpurity:.3e})")]
    PurityDerivativeSingularity { dpurity: f64 },

    #[error("finite-difference estimates disagree: {coarse:.6e} vs {fine:.6e}")]
    StepTooLarge { coarse: f64, fine: f64 },

    #[error("Fock truncation too small: tail weight {tail:.3e} above {nmax} photons")]
    TruncationTooSmall { nmax: usize, tail: f64 },

    #[error("sensitivity bound undefined for zero Fisher information")]
    ZeroInformation,

    #[error("log-log fit is poor (r² = {r_squared:.5})")]
    PoorFit { exponent: f64, r_squared: f64 },

    #[error("system is at or above the lasing threshold (max Im ν = {max_growth:.3e})")]
    AboveThreshold { max_growth: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
