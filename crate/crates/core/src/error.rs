use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Gamma function pole at argument {0}")]
    GammaPole(f64),

    #[error("argument {0} is within {1} of a pole")]
    NearPole(f64, f64),

    #[error("degenerate polynomial: leading coefficient is zero")]
    DegeneratePolynomial,

    #[error("quadrature did not converge: value {value}, error estimate {error}")]
    NonConvergence { value: f64, error: f64 },

    #[error("index {index} out of range for a basis of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("argument {0} lies on the cut [-2, 2]")]
    OnCut(String),

    #[error("inner product not integrable: degrees {deg_f} + {deg_g} require s > {need}, got s = {s}")]
    NotIntegrable { deg_f: usize, deg_g: usize, need: f64, s: f64 },

    #[error("matrix is not skew-symmetric (asymmetry {0})")]
    NotSkew(f64),

    #[error("matrix dimension {0} is not even")]
    OddDimension(usize),

    #[error("matrix is not square")]
    NotSquare,

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("Markov chain accepted no proposals; reduce the step scale")]
    NoAcceptance,
}

pub type Result<T> = std::result::Result<T, Error>;
