use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid degree sequence: in-stubs {in_stubs} != out-stubs {out_stubs}")]
    UnbalancedSequence { in_stubs: u64, out_stubs: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight bound violated: max |C_i| D_i = {observed} exceeds c = {bound}")]
    Certification { observed: f64, bound: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("dense solve refused: n = {n} exceeds guard {guard}")]
    TooLarge { n: usize, guard: usize },

    #[error("branching process is not subcritical: rho = {rho}")]
    NotSubcritical { rho: f64 },

    #[error("population cap of {cap} nodes exceeded")]
    PopulationCap { cap: u64 },

    #[error("no outbound stubs to size-bias")]
    NoStubs,

    #[error("failure budget exceeded: {0}")]
    FailureBudget(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from the inputs (configuration, parameters,
    /// files) rather than from a failure while running.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::UnbalancedSequence { .. }
                | Error::DimensionMismatch { .. }
                | Error::Parse(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
