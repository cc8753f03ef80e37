use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dispersion exponent alpha = {0} outside the accepted range (-1, 2]")]
    AlphaOutOfRange(f64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("elliptic modulus k = {0} outside [0, 1)")]
    InvalidModulus(f64),

    #[error("Benjamin-Ono admissibility violated: {0}")]
    Admissibility(String),

    #[error("grid period {actual} does not match the required period {expected}")]
    PeriodMismatch { expected: f64, actual: f64 },

    #[error("no convergence after {iterations} iterations (last increment {last_increment:e})")]
    NotConverged { iterations: usize, last_increment: f64 },

    #[error("mean-component equation has no real root (discriminant {discriminant:e})")]
    NoRealRoot { discriminant: f64 },

    #[error("mean-component equation: no sign change bracketed around {center}")]
    NoBracket { center: f64 },

    #[error("non-finite iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("perturbed solve at {corner} failed: {source}")]
    PerturbedSolve {
        corner: String,
        #[source]
        source: Box<Error>,
    },

    #[error("branch jump at {corner}: deviation {deviation:e} exceeds threshold {threshold:e}")]
    BranchJump { corner: String, deviation: f64, threshold: f64 },

    #[error("degenerate Gram determinant G = {gram:e} (floor {floor:e})")]
    DegenerateGram { gram: f64, floor: f64 },

    #[error("Omega-derivatives are required for the general-nonlinearity dispersion matrix")]
    MissingOmegaDerivatives,

    #[error("zero entry in the Morse sign sequence (1, {m_a:e}, {minus_g:e})")]
    DegenerateSequence { m_a: f64, minus_g: f64 },

    #[error("integral identities violated on an accepted solve: r1 = {r1:e}, r2 = {r2:e} (tolerance {tolerance:e})")]
    IdentityViolation { r1: f64, r2: f64, tolerance: f64 },

    #[error("quadratic nonlinearity required: {0}")]
    NotQuadratic(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
