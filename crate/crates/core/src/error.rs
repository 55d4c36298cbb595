//! Shared error type for the whole crate.
//!
//! Everything fallible returns [`Result`]; nothing here panics on bad data.
//! Variants carry enough context (line, column, offending value) that the CLI
//! can print a usable diagnostic without re-deriving anything.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Structural CSV problem: wrong header, wrong field count, unparseable cell.
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },

    /// A labor/capital/production value was zero, negative, or non-finite.
    #[error("non-positive value {value} at line {line}, column {column}")]
    NonPositiveValue {
        line: usize,
        column: &'static str,
        value: f64,
    },

    /// Years must increase by exactly one per row.
    #[error("non-uniform year step at line {line}: {prev} followed by {next}")]
    NonUniformYearStep { line: usize, prev: i32, next: i32 },

    /// Panels need at least three rows to support any of the fits.
    #[error("too few rows: got {rows}, need at least 3")]
    TooFewRows { rows: usize },

    /// Zero variance in the abscissae; a line fit is not identified.
    #[error("degenerate design: all abscissae equal")]
    DegenerateDesign,

    /// The model produced NaN/inf and damping could not move past it.
    #[error("non-finite residual: {context}")]
    NonFiniteResidual { context: String },

    /// The damped normal matrix stayed unfactorable even at maximal damping.
    #[error("singular normal matrix even under maximal damping")]
    SingularNormalMatrix,

    /// User-supplied starting point violates the model's domain.
    #[error("initial guess out of range: {reason}")]
    InitOutOfRange { reason: String },

    /// Growth rates must be strictly positive for returns classification.
    #[error("growth rate must be positive, got {value}")]
    NonPositiveRate { value: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero divisor: {what}")]
    ZeroDivisor { what: &'static str },

    #[error("input must be positive: {what} = {value}")]
    NonPositiveInput { what: &'static str, value: f64 },

    /// The output exponent of an invariant must be nonzero to solve for output.
    #[error("zero output exponent: cannot solve the invariant for the third variable")]
    ZeroExponent,

    /// A logistic state must stay strictly below its carrying capacity.
    #[error("out of range: {what} = {value} must lie strictly below its capacity")]
    OutOfRange { what: &'static str, value: f64 },

    /// The generator's capital coefficient scales every invariant; zero is unusable.
    #[error("zero scale coefficient: generator has a = 0")]
    ZeroScaleCoefficient,

    #[error("zero denominator: {what}")]
    ZeroDenominator { what: &'static str },

    /// Labor sits exactly at its carrying capacity; the share is undefined there.
    #[error("labor at capacity: L = N_L = {value}")]
    AtCapacity { value: f64 },

    /// A trajectory formula needs converged member fits with sane parameters.
    #[error("degenerate fit: {reason}")]
    DegenerateFit { reason: String },

    #[error("non-finite value: {what}")]
    NonFiniteValue { what: String },

    #[error("empty series: {what}")]
    EmptySeries { what: String },

    /// Filesystem problems, surfaced by the CLI with the path included.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
