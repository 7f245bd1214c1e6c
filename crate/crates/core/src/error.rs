use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("two-state chain with alpha = beta = 0 has no unique stationary distribution")]
    DegenerateChain,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rate floor of PU {pu} cannot be met")]
    Infeasible { pu: usize },

    #[error("lambda = 0 and mu = 0: stationarity has no finite water level")]
    Unbounded,

    #[error("stationarity residual is still positive at the bracket upper end {p_upper}")]
    BracketTooSmall { p_upper: f64 },

    #[error("cannot load {bits} bit(s) on a subcarrier with zero effective gain")]
    InfeasibleBit { bits: u32 },

    #[error("subcarrier carries no bit to remove")]
    NoBitToRemove,

    #[error("problem too large for exhaustive search: {0}")]
    Size(String),

    #[error("no grid point satisfies all constraints at this resolution")]
    InfeasibleAtResolution,

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            expected,
        }
    }
}
