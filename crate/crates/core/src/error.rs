use thiserror::Error;

/// Errors produced anywhere in the free-energy pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown atom `{name}` (available: {})", available.join(", "))]
    UnknownAtom { name: String, available: Vec<String> },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Convergence { estimate: f64, error_bound: f64 },

    #[error(
        "Matsubara sum did not converge within {terms} terms (partial sum {partial_sum:e})"
    )]
    MatsubaraTruncation { terms: usize, partial_sum: f64 },

    /// Dirac reflection coefficients at y = zeta with a vanishing Pi00 (the T = 0 operator).
    #[error("indeterminate 0/0 reflection coefficient at y = zeta = {zeta}; use the T = 0 form")]
    Indeterminate { zeta: f64 },

    #[error("no record at separation {separation:e} m for {model}")]
    MissingGridPoint { separation: f64, model: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
