use thiserror::Error;

/// 1-based position inside a map spec source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for SourcePos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: SourcePos, message: String },

    #[error("validation error at {pos}: {message}")]
    Validation { pos: SourcePos, message: String },

    #[error("leaf `{leaf}` is not area preserving: |det Df - 1| = {defect:.3e} at ({x}, {y})")]
    AreaPreservation {
        leaf: String,
        defect: f64,
        x: f64,
        y: f64,
    },

    #[error("adaptive quadrature did not converge: estimated error {estimate:.3e} > tol {tol:.3e} after {intervals} intervals")]
    NonConvergence {
        estimate: f64,
        tol: f64,
        intervals: usize,
    },

    #[error("sample ({x}, {y}) leaves the chart")]
    ChartViolation { x: f64, y: f64 },

    #[error("ambiguous lift between points {index} and {next}: circle distance {distance} >= 1/2", next = index + 1)]
    AmbiguousLift { index: usize, distance: f64 },

    #[error("implicit midpoint step failed to converge at ({x}, {y})")]
    IntegratorFailure { x: f64, y: f64 },

    #[error("map is not rigid near the {side} boundary: {detail}")]
    NotRigidNearBoundary { side: &'static str, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::AreaPreservation { .. } => 2,
            Error::NotRigidNearBoundary { .. } => 3,
            Error::NonConvergence { .. } | Error::IntegratorFailure { .. } => 4,
            Error::ChartViolation { .. } | Error::AmbiguousLift { .. } | Error::InvalidInput(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
