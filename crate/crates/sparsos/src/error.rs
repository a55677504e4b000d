use thiserror::Error;

/// Errors raised across the library. The CLI maps `usage`/format errors to
/// exit code 2 and mathematical infeasibility to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group specification: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generator set is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("{d} does not divide {n}; smallest divisor of {n} that is >= {d} is {suggestion}")]
    NotDivisible { n: u64, d: u64, suggestion: u64 },

    #[error("vertex map is not a bijection between the two vertex sets")]
    BadVertexMap,

    #[error("invalid chordality certificate: {0}")]
    BadCertificate(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix violates the required sparsity pattern at entry ({i}, {j})")]
    SparsityViolation { i: usize, j: usize },

    #[error("no PSD completion exists: clique block {clique} has eigenvalue {min_eig:e}")]
    Infeasible { clique: String, min_eig: f64 },

    #[error("function is not real-valued (asymmetry {0:e})")]
    NotReal(f64),

    #[error("function is negative: f({witness}) = {value:e}")]
    NotNonnegative { witness: String, value: f64 },

    #[error("support violation: {0}")]
    Support(String),

    #[error("matrix is not invariant under the involution (defect {0:e})")]
    NotInvariant(f64),

    #[error("not an equalizing involution: {0}")]
    BadInvolution(String),

    #[error("invalid measure: {0}")]
    BadMeasure(String),

    #[error("moment assignment is missing index {0}")]
    IncompleteMoments(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("export not supported: {0}")]
    Export(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code under the CLI contract: 1 for mathematical
    /// infeasibility, 2 for usage and format errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPsd { .. }
            | Error::NotNonnegative { .. }
            | Error::Infeasible { .. }
            | Error::NotDivisible { .. }
            | Error::CertificateInvalid(_) => 1,
            _ => 2,
        }
    }
}
