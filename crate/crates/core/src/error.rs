use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IqcError {
    #[error("dimension mismatch in `{block}`: expected {expected}, got {got}")]
    Dimension {
        block: String,
        expected: String,
        got: String,
    },

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("resolvent (zI - A) is singular at z = {re} + {im}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("A has an eigenvalue on the unit circle (modulus {modulus})")]
    EigenvalueOnUnitCircle { modulus: f64 },

    #[error("plant matrix A is not Schur (spectral radius {spectral_radius})")]
    NotSchur { spectral_radius: f64 },

    #[error("matrix `{what}` is singular or not positive definite")]
    Singular { what: String },

    #[error("iteration did not converge in {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("algebraic loop not well-posed: {0}")]
    IllPosedLoop(String),

    #[error("trajectory violates the shift-register structure at step {step}")]
    MalformedTrajectory { step: usize },

    #[error("multiplier parameters are not doubly hyperdominant (worst margin {worst_margin:e})")]
    NotHyperdominant { worst_margin: f64 },

    #[error("invalid convex function: {0}")]
    InvalidFunction(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl IqcError {
    pub(crate) fn dim(block: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        IqcError::Dimension {
            block: block.into(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}

impl From<std::io::Error> for IqcError {
    fn from(e: std::io::Error) -> Self {
        IqcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, IqcError>;
