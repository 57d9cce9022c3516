use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row at line {line}: {content:?}")]
    MalformedRow { line: usize, content: String },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("series too short: n = {n}, at least 3 points are required")]
    TooShort { n: usize },

    #[error("degenerate variogram: {0}")]
    DegenerateVariogram(&'static str),

    #[error("lag {lag} out of range (maximum {max})")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("no informative points left for the fit")]
    NoInformativePoints,

    #[error("non-finite residual encountered during the fit")]
    NonFiniteResidual,

    #[error("singular kriging system: pivot {pivot_index} below tolerance{}", fmt_t(*.t))]
    SingularSystem { pivot_index: usize, t: Option<u64> },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn fmt_t(t: Option<u64>) -> String {
    t.map(|t| format!(" (t = {t})")).unwrap_or_default()
}

impl Error {
    /// Attach the time parameter to a singular-system error.
    pub(crate) fn at_t(self, t: u64) -> Self {
        match self {
            Error::SingularSystem { pivot_index, .. } => Error::SingularSystem {
                pivot_index,
                t: Some(t),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
