use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// An iterative construction did not reach its target.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// A quadrature rule does not meet the exactness a level requires.
    #[error("quadrature at level {level} is exact only to degree {degree}, {required} required")]
    Exactness {
        level: u32,
        degree: usize,
        required: usize,
    },
}

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
