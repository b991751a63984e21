use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate form (discriminant zero)")]
    DegenerateForm,
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(i64),
    #[error("elements belong to different rings")]
    RingMismatch,
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("numerical precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("quadrature tolerance not met (error estimate {0:e})")]
    ToleranceNotMet(f64),
    #[error("enumeration modulus too large for budget ({0} residues)")]
    ModulusTooLarge(u128),
    #[error("pair is degenerate; a nondegenerate pair is required")]
    NondegenerateRequired,
    #[error("ring is not maximal at {0}")]
    NotMaximalAt(u64),
    #[error("ring is not maximal")]
    NotMaximal,
    #[error("lattice enumeration budget exceeded")]
    BudgetExceeded,
    #[error("unit saturation budget exceeded")]
    SaturationBudgetExceeded,
    #[error("relation search did not stabilise")]
    RelationDeficit,
    #[error("sample too small ({0} < {1})")]
    SampleTooSmall(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid family spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
