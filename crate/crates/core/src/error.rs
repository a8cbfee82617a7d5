use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-domain input.
    #[error("invalid input: {0}")]
    Input(String),
    /// The combinatorial structure does not support the request (for example
    /// a graph without cycles).
    #[error("structural error: {0}")]
    Structure(String),
    /// A mathematical precondition of the requested operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An iterative method did not converge.
    #[error("no convergence in {method} after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        last_change: f64,
    },
    /// Some other numerical failure (non-finite values, failed self-check).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The input is valid but lies outside what can be certified, for
    /// example a tail that cannot be bounded from the declared metadata.
    #[error("unsupported input: {0}")]
    Unsupported(String),
    /// The input falls under the other branch of the theorem
    /// (lattice versus non-lattice).
    #[error("wrong theorem: {0}")]
    WrongTheorem(String),
    /// A simulation horizon is too short to cover the requested time.
    #[error("simulation horizon {n_max} too short; try n_max >= {suggested}")]
    Horizon { n_max: usize, suggested: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => {
        $crate::Error::Input(alloc::format!($($arg)*))
    };
}
pub(crate) use input_err;
