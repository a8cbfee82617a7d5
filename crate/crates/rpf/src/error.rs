use thiserror::Error;

/// Front-end errors. Input problems map to exit code 2, numerical
/// failures to exit code 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at {}: {message}", if pointer.is_empty() { "/" } else { pointer.as_str() })]
    Schema { pointer: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{module}: {source}")]
    Numerical {
        module: &'static str,
        #[source]
        source: rpf_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 3,
            _ => 2,
        }
    }

    /// Prefixes the message with where it happened.
    pub fn context(self, what: &str) -> CliError {
        match self {
            CliError::Input(m) => CliError::Input(format!("{what}: {m}")),
            CliError::Numerical { module, source } => CliError::Numerical { module, source },
            other => other,
        }
    }
}

/// Core errors: bad input stays an input error, everything else is a
/// numerical failure tagged with the module that most likely raised it.
impl From<rpf_core::Error> for CliError {
    fn from(e: rpf_core::Error) -> Self {
        use rpf_core::Error as E;
        let module = match &e {
            E::Input(m) => return CliError::Input(m.clone()),
            E::Structure(_) => "symbolic",
            E::Precondition(_) => "potential",
            E::NoConvergence { .. } => "spectral",
            E::WrongTheorem(_) | E::Unsupported(_) => "renewal",
            E::Horizon { .. } => "simulate",
            E::Numerical(_) => "numerics",
        };
        CliError::Numerical { module, source: e }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
