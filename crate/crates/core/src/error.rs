use thiserror::Error;

/// Errors raised by the sequence, subdivision, decimation and pyramid routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period too short: period {period} but one output sample touches {required} coarse points")]
    PeriodTooShort { period: usize, required: usize },

    #[error("degenerate parameter: {what} (value {value:e})")]
    DegenerateParameter { what: &'static str, value: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("mask has no even-indexed taps")]
    EmptyEvenPart,

    #[error("even-part symbol vanishes on the unit circle (min modulus {min_modulus:e}); no summable inverse exists")]
    SymbolZeroOnCircle { min_modulus: f64 },

    #[error("decimation filter did not stabilize before window {window}")]
    NoConvergence { window: usize },

    #[error("odd period {0}: decimation needs an even period")]
    OddPeriod(usize),

    #[error("decay fit failed: {0}")]
    FitFailed(String),

    #[error("period not divisible: period {period} is not a multiple of 2^{levels}")]
    PeriodNotDivisible { period: usize, levels: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("parity sums violated: even {even}, odd {odd}")]
    ParitySum { even: f64, odd: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
