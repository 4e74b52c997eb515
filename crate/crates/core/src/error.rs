//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the discretization, the solvers and the experiment
/// drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation point outside the spline domain.
    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// A per-quadrature-point field had the wrong number of samples.
    #[error("weight field has {got} samples, expected {expected}")]
    WeightLengthMismatch { expected: usize, got: usize },

    /// Symmetric factorization hit a non-positive or non-finite pivot.
    #[error("factorization failed: pivot {pivot} is {value} (singular or indefinite matrix)")]
    FactorizationFailure { pivot: usize, value: f64 },

    /// The quasilinear coefficient alpha = 1 - k psi_t lost positivity, so the
    /// step cannot be trusted.
    #[error("degenerate coefficient at t = {t:.6e} s: min alpha = {min_alpha:.6e} <= 0")]
    Degeneracy { t: f64, min_alpha: f64 },

    /// The fixed-point corrector did not reach the tolerance.
    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last relative increment {last_increment:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_increment: f64,
    },

    /// Characteristic roots too close for the exponential-basis solution.
    #[error(
        "near-confluent characteristic roots (separation {separation:.3e} of scale {scale:.3e})"
    )]
    ConfluentRoots { separation: f64, scale: f64 },

    /// Unknown manufactured-solution catalog entry.
    #[error("unknown manufactured case '{0}'")]
    UnknownCase(String),

    /// Configuration file or preset problem.
    #[error("config error: {0}")]
    Config(String),

    /// Two trajectories cannot be compared.
    #[error("trajectory grids incompatible: {0}")]
    GridMismatch(String),

    /// A sweep member failed; carries the offending relaxation time.
    #[error("sweep member tau = {tau:.6e} s failed: {source}")]
    SweepMember {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 numerical failure, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownCase(_) | Error::InvalidArgument(_) => 2,
            Error::Degeneracy { .. }
            | Error::NonConvergence { .. }
            | Error::FactorizationFailure { .. }
            | Error::OutOfDomain { .. }
            | Error::WeightLengthMismatch { .. }
            | Error::ConfluentRoots { .. }
            | Error::GridMismatch { .. } => 3,
            Error::SweepMember { source, .. } => source.exit_code(),
            Error::Io(_) => 1,
        }
    }
}
