use thiserror::Error;

/// Errors produced by graph construction, sampling, test evaluation and the
/// numeric theory routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, bad flag value, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// Input too small or empty for the requested operation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A parameter lies outside the domain of its family (e.g. θ ≤ 0).
    #[error("parameter outside domain: {0}")]
    ParameterDomain(String),

    /// A density or mixture evaluated to zero (or a non-finite value) where a
    /// positive value is required.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// An integrator stopped without reaching the requested tolerance. The
    /// partial estimate and its error estimate are carried along.
    #[error("integration tolerance not met: estimate {estimate} with error {error_estimate} exceeds tolerance {tolerance}")]
    ToleranceNotMet {
        estimate: f64,
        error_estimate: f64,
        tolerance: f64,
    },

    /// Neighbor schedule outside the supported symbolic forms.
    #[error("unsupported neighbor schedule: {0}")]
    UnsupportedSchedule(String),

    /// The excluded a(h,θ₁) = b(h,θ₁) direction where the limiting power at the
    /// upper threshold is not determined.
    #[error("degenerate direction: a(h,θ1) - b(h,θ1) = 0, limiting power undetermined")]
    DegenerateDirection,

    /// A conditional test whose conditional variance vanishes.
    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    /// An assumption on the parametric family is violated (e.g. zero
    /// Fisher-type expectation).
    #[error("family assumption violated: {0}")]
    AssumptionViolated(String),

    /// Empirical and predicted grids do not line up cell for cell.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Config or data file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
