//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors surfaced by construction, validation, and the numeric routines.
#[derive(Debug, Clone, Error)]
pub enum RabiError {
    /// A matrix handed to a Hermitian-only routine was not Hermitian.
    #[error(
        "matrix is not Hermitian: max deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// A state vector was not normalized to 1 within the norm tolerance.
    #[error("state norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    /// A vector or matrix contained a NaN or infinite entry.
    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },

    /// Dimensions of the inputs do not match the operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The Jacobi eigensolver failed to reach its off-diagonal target.
    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    EigenConvergence { sweeps: usize, off: f64 },

    /// Gram–Schmidt input vector was linearly dependent on its predecessors.
    #[error(
        "vector {index} is linearly dependent on its predecessors (residual norm {residual:.3e})"
    )]
    RankDeficient { index: usize, residual: f64 },

    /// A POVM element had an eigenvalue below the positivity floor.
    #[error("POVM element {index} has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { index: usize, eigenvalue: f64 },

    /// POVM elements do not sum to the identity.
    #[error("POVM elements sum deviates from identity by {deviation:.3e}")]
    IncompletePovm { deviation: f64 },

    /// Measurement probabilities failed the completeness check.
    #[error("outcome probabilities sum to {sum} instead of 1")]
    InvalidProbabilities { sum: f64 },

    /// Both Rabi frequencies vanish, so the analytic three-level eigensystem
    /// is degenerate; use the numeric eigensolver instead.
    #[error("degenerate spectrum at omega = (0, 0); use hermitian_eig on the Hamiltonian")]
    DegenerateSpectrum,

    /// The (theta, omega_plus) parameterization is undefined at omega_plus = 0.
    #[error("parameterization is singular: omega_plus = 0")]
    SingularParameterization,

    /// omega_plus * t sits on a multiple of 2*pi where the requested quantity
    /// diverges or is undefined.
    #[error("singular time: |sin(omega_plus t / 2)| = {value:.3e} is below {tolerance:.3e}")]
    SingularTime { value: f64, tolerance: f64 },

    /// The quantum Fisher information matrix is singular and cannot be inverted.
    #[error("QFIM is singular (indicator {indicator:.3e})")]
    SingularQfim { indicator: f64 },

    /// An extremal eigenvalue is degenerate, so the optimal probe is not unique.
    #[error("extremal eigenvalue is degenerate (multiplicity {multiplicity})")]
    DegenerateExtremal { multiplicity: usize },

    /// A scalar argument was outside its admissible range.
    #[error("invalid argument {name}: {message}")]
    InvalidArgument { name: &'static str, message: String },

    /// A configuration file or flag set failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, RabiError>;
