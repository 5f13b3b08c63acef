//! Error type shared across the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad input data or arguments.
    Input,
    /// A numerical procedure failed or hit a degenerate case.
    Numerical,
    /// A constraint system has no acceptable solution.
    Infeasible,
}

/// All errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    // ---- input files and series validation ----
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {message}")]
    Csv { path: String, message: String },
    #[error("header declares no tenor columns")]
    NoTenors,
    #[error("tenor column {column} ({value}) is not a positive number")]
    TenorParse { column: usize, value: String },
    #[error("tenors must be strictly increasing: column {column} holds {value} after {previous}")]
    NonMonotoneTenors {
        column: usize,
        value: f64,
        previous: f64,
    },
    #[error("unparseable date {value:?} at row {row} (expected YYYY-MM-DD)")]
    DateParse { row: usize, value: String },
    #[error("dates must be strictly increasing: row {row} holds {value}")]
    DatesNotIncreasing { row: usize, value: String },
    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    CellParse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row} has {found} rate cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("rate {value} at row {row}, column {column} is outside the (-0.5, 1.0) sanity band")]
    RateOutOfBand {
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("need at least {required} observation rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },
    #[error("invalid tenor: years must be a positive finite number, got {0}")]
    InvalidTenor(f64),
    #[error("date index {index} out of range for series of {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    // ---- cash flows ----
    #[error("cash flow fields must be finite (time {time}, amount {amount})")]
    NonFiniteCashFlow { time: f64, amount: f64 },
    #[error("cash flow times must be strictly increasing: {value} at position {index}")]
    UnorderedCashFlows { index: usize, value: f64 },
    #[error("cash-flow stream is empty")]
    EmptyStream,
    #[error("face value must be positive, got {0}")]
    NonPositiveFace(f64),

    // ---- dimension / argument mismatches ----
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("series tenors do not match the model's tenors")]
    TenorMismatch,
    #[error("component count {k} out of range 1..={max}")]
    ComponentsOutOfRange { k: usize, max: usize },
    #[error("key-rate index {index} out of range for {len} tenors")]
    KeyIndexOutOfRange { index: usize, len: usize },

    // ---- numerical failures ----
    #[error("matrix is not symmetric (asymmetry {max_asymmetry:e} exceeds 1e-9)")]
    NonSymmetric { max_asymmetry: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    JacobiNoConvergence { sweeps: usize },
    #[error("covariance matrix is all zero; no principal directions exist")]
    DegenerateCovariance,
    #[error("zero-variance tenor makes the requested statistic undefined")]
    ZeroVariance,
    #[error("base price is zero; sensitivity is undefined")]
    ZeroBasePrice,
    #[error("present value must be positive, got {0}")]
    NonPositivePresentValue(f64),
    #[error("regression needs more rows: {rows} rows cannot support {regressors} regressors")]
    TooFewRowsForRegression { rows: usize, regressors: usize },
    #[error("sigma values must be non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("confidence must lie in (0.5, 1), got {0}")]
    ConfidenceOutOfRange(f64),
    #[error("z value {z} does not match confidence {confidence} (expected {expected:.6})")]
    ZMismatch {
        z: f64,
        confidence: f64,
        expected: f64,
    },
    #[error("initial value must be positive, got {0}")]
    NonPositiveValue(f64),

    // ---- immunization ----
    #[error("instrument {id:?} has non-positive present value {pv}")]
    NonPositiveInstrumentPv { id: String, pv: f64 },
    #[error("duplicate instrument id {0:?}")]
    DuplicateInstrumentId(String),
    #[error("universe holds no instruments")]
    NoInstruments,
    #[error("exact policy needs at least as many instruments as constraints ({constraints}); use least_norm for {instruments} instruments")]
    PolicyMismatch {
        constraints: usize,
        instruments: usize,
    },
    #[error("constraint system is infeasible: best achievable residual {residual:e}")]
    Infeasible { residual: f64 },
    #[error("solution contains short positions but shorts are disallowed")]
    ShortsDisallowed,

    // ---- model serialization ----
    #[error("invalid model JSON: {0}")]
    ModelJson(String),
    #[error("model invariant violated: {0}")]
    ModelInvariant(String),
}

impl Error {
    /// Classify this error for exit-code mapping.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Io { .. }
            | Csv { .. }
            | NoTenors
            | TenorParse { .. }
            | NonMonotoneTenors { .. }
            | DateParse { .. }
            | DatesNotIncreasing { .. }
            | CellParse { .. }
            | RaggedRow { .. }
            | RateOutOfBand { .. }
            | TooFewRows { .. }
            | InvalidTenor(_)
            | IndexOutOfRange { .. }
            | NegativeTime(_)
            | NonFiniteCashFlow { .. }
            | UnorderedCashFlows { .. }
            | EmptyStream
            | NonPositiveFace(_)
            | LengthMismatch { .. }
            | TenorMismatch
            | ComponentsOutOfRange { .. }
            | KeyIndexOutOfRange { .. }
            | ConfidenceOutOfRange(_)
            | NonPositiveValue(_)
            | DuplicateInstrumentId(_)
            | NoInstruments
            | PolicyMismatch { .. }
            | ModelJson(_)
            | ModelInvariant(_) => ErrorCategory::Input,

            NonSymmetric { .. }
            | JacobiNoConvergence { .. }
            | DegenerateCovariance
            | ZeroVariance
            | ZeroBasePrice
            | NonPositivePresentValue(_)
            | TooFewRowsForRegression { .. }
            | NegativeSigma(_)
            | ZMismatch { .. }
            | NonPositiveInstrumentPv { .. } => ErrorCategory::Numerical,

            Infeasible { .. } | ShortsDisallowed => ErrorCategory::Infeasible,
        }
    }
}
