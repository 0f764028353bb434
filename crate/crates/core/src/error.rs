use thiserror::Error;

pub type Result<T> = std::result::Result<T, MsdError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsdError {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// Odd-n routine called with even n or vice versa.
    #[error("parity mismatch: {0}")]
    Parity(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Table construction failed at a particular cell.
    #[error("table build failed at n = {n}, q = {q}: {source}")]
    TableCell {
        n: String,
        q: f64,
        #[source]
        source: Box<MsdError>,
    },

    #[error("table format error: {0}")]
    TableFormat(String),
}

impl MsdError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MsdError::Domain(msg.into())
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            MsdError::NoSignChange { .. } | MsdError::NoConvergence { .. } | MsdError::TableCell { .. }
        )
    }
}
