use thiserror::Error;

/// Errors raised by the numerical engines, the oracles and the front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluctError {
    #[error("argument outside the analyticity domain: {0}")]
    Domain(String),

    #[error("pole of the kernel hit at s1 = {re}{im:+}i")]
    Pole { re: f64, im: f64 },

    #[error("model does not support this operation: {0}")]
    UnsupportedModel(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("non-finite integrand value at {0}")]
    Eval(String),

    #[error("logarithm evaluated on its branch cut at {re}{im:+}i")]
    BranchCutHit { re: f64, im: f64 },

    #[error("logarithm of the kernel has non-zero index along the imaginary axis")]
    NonzeroIndex,

    #[error("function vanishes on the counting contour (min |F| = {min_abs:e})")]
    ZeroOnContour { min_abs: f64 },

    #[error("winding number {winding} is not an integer")]
    NonIntegerWinding { winding: f64 },

    #[error("located {located} roots but the argument principle counts {counted}")]
    CountMismatch { located: usize, counted: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("stability condition E B < E A fails (E B = {mean_b}, E A = {mean_a})")]
    Stability { mean_b: f64, mean_a: f64 },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, FluctError>;

impl From<std::io::Error> for FluctError {
    fn from(e: std::io::Error) -> Self {
        FluctError::Io(e.to_string())
    }
}
