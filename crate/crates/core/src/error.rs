//! Crate-wide error type.

use crate::dynamics::Telemetry;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates a structural invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Palm conditioning at a point where the one-point density vanishes.
    #[error("degenerate Palm conditioning at x = {x}: K(x,x) = {diag:.3e} <= {floor:.3e}")]
    DegenerateConditioning { x: f64, diag: f64, floor: f64 },

    /// Duplicate points passed where distinct points are required.
    #[error("duplicate point {x} in correlation argument")]
    DuplicatePoint { x: f64 },

    /// A kernel matrix produced a negative determinant beyond roundoff.
    #[error("determinant {det:.3e} below the roundoff clamp {clamp:.3e}; kernel is not PSD")]
    NegativeDeterminant { det: f64, clamp: f64 },

    /// An iterative eigenvalue solve did not converge.
    #[error("eigenvalue iteration failed to converge (index {index})")]
    EigenNonConvergence { index: usize },

    /// Adaptive quadrature exhausted its panel budget.
    #[error(
        "quadrature did not reach tolerance {tol:.3e} on [{a}, {b}] (error estimate {err:.3e})"
    )]
    QuadratureNonConvergence { a: f64, b: f64, tol: f64, err: f64 },

    /// The SDE integrator hit dt_min without finding an acceptable step.
    #[error("integrator blowup at t = {time}: dt_min reached; {telemetry}")]
    Blowup { time: f64, telemetry: Telemetry },

    /// A sampler error tagged with the draw index it occurred in.
    #[error("draw {draw}: {source}")]
    Draw {
        draw: usize,
        #[source]
        source: Box<Error>,
    },

    /// An estimator was handed an empty sample.
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// Numeric overflow that log-space evaluation could not absorb.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
