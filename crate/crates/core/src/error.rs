use thiserror::Error;

/// Errors raised by the algebraic and lattice routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("grade overflow: grade {grade} exceeds ambient dimension {dim}")]
    Grade { grade: usize, dim: usize },
    #[error("unsupported triad: family {family} in dimension {dim}")]
    UnsupportedTriad { family: String, dim: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("distortion undefined: every node is critical")]
    DistortionUndefined,
    #[error("invalid exponent p = {0}; the p-Laplacian needs p > 1")]
    InvalidExponent(f64),
    #[error("similarity incompatible with the lattice: {0}")]
    LatticeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed map file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
