//! Error types shared across the crate.

use thiserror::Error;

/// A circuit failed structural validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("column {column}: generators overlap on input wire {wire}")]
    Overlap { column: usize, wire: usize },
    #[error("column {column}: generator at wire {wire} needs {needed} wires but only {available} exist")]
    OutOfRange {
        column: usize,
        wire: usize,
        needed: usize,
        available: usize,
    },
    #[error("column {column}: {what} has {got} modes, expected {expected}")]
    ModeCount {
        column: usize,
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("declared {declared} output wires but the columns produce {actual}")]
    OutputWidth { declared: usize, actual: usize },
    #[error("cannot compose: left has {left_out} outputs, right has {right_in} inputs")]
    Compose { left_out: usize, right_in: usize },
}

/// Source text or JSON could not be turned into a circuit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("invalid json: {0}")]
    Json(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Fock-space operations applied to incompatible states.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("mode {mode} out of range for a {modes}-mode state")]
    BadMode { mode: usize, modes: usize },
    #[error("expected a {expected}-mode state, got {got}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("photon cap {cap} exceeded ({count} photons)")]
    PhotonCap { cap: u32, count: u32 },
}

/// Numerical preconditions that do not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("matrix is not unitary: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Dimension { expected: usize, rows: usize, cols: usize },
    #[error("circuit contains {0}, which has no single-photon matrix")]
    NotLopp(&'static str),
    #[error("no decomposition found within tolerance {0:.1e}")]
    NoSolution(f64),
    #[error("triangle invariant violated: {0}")]
    InvariantViolation(String),
    #[error("not a Tmn grid: {0}")]
    NotTmn(String),
}

/// The rewrite engine stopped before reaching a normal form.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("rewrite budget of {0} steps exhausted")]
    Budget(usize),
    #[error("no {rule} redex at column {column}, row {row}")]
    NotARedex { rule: String, column: usize, row: usize },
    #[error("{rule} changed the semantics by {residual:.3e}")]
    Unsound { rule: String, residual: f64 },
    #[error("connecting-wire index does not fit in an occupation")]
    Overflow,
    #[error("state update failed: {0}")]
    Fock(String),
    #[error("rank did not decrease at step {step} (rule {rule})")]
    RankIncrease { step: usize, rule: String },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Preconditions of the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("not a Tmn circuit: {0}")]
    NotTmn(String),
    #[error("not a Trec circuit: {0}")]
    NotTrec(String),
    #[error("too expensive: {0}")]
    CostGuard(String),
    #[error("arity mismatch: {left_in} -> {left_out} vs {right_in} -> {right_out}")]
    ArityMismatch {
        left_in: usize,
        left_out: usize,
        right_in: usize,
        right_out: usize,
    },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Umbrella error used by the analysis layer and the command line tool.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Circuit(_) | Error::Shape(_) => "shape",
            Error::Parse(ParseError::Circuit(_)) => "shape",
            Error::Parse(_) => "parse",
            Error::Numeric(_) => "numeric",
            Error::Fock(FockError::PhotonCap { .. }) => "budget",
            Error::Fock(_) => "shape",
            Error::Rewrite(RewriteError::Budget(_)) => "budget",
            Error::Rewrite(RewriteError::Circuit(_)) => "shape",
            Error::Rewrite(RewriteError::NotARedex { .. }) => "usage",
            Error::Rewrite(_) => "numeric",
            Error::Analysis(AnalysisError::ArityMismatch { .. }) => "shape",
            Error::Analysis(AnalysisError::CostGuard(_)) => "budget",
            Error::Analysis(AnalysisError::Rewrite(RewriteError::Budget(_))) => "budget",
            Error::Analysis(_) => "numeric",
        }
    }
}
