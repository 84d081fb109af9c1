use thiserror::Error;

/// Errors produced by distribution construction, risk evaluation, hedging
/// and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("{what} = {value} outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at row {row}: cannot read {cell:?} as a finite real")]
    Parse { row: usize, cell: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("optimizer hit its iteration cap; best value {best_value} (gap not certified)")]
    IterationCap { best_value: f64, certified: bool },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("replication N={n}, r={replication}: {source}")]
    Replication {
        n: usize,
        replication: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::IterationCap { .. }
            | Error::Infeasible(_)
            | Error::DegenerateCurve(_) => true,
            Error::Replication { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
