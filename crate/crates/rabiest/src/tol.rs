//! Numeric tolerances pinned in one place.
//!
//! Every comparison threshold used by validation and the numeric routines is
//! a named constant here, so a reader can audit the numeric policy of the
//! whole crate at a glance and tests can reference the same values the
//! production code enforces.

/// Relative Hermiticity tolerance: a matrix H is accepted as Hermitian when
/// max|H - H^dag| <= HERMITICITY_REL * max|H| (entrywise max-abs norms).
pub const HERMITICITY_REL: f64 = 1e-10;

/// Absolute tolerance on |norm - 1| for state vectors.
pub const STATE_NORM_ABS: f64 = 1e-12;

/// Pairwise inner products of an orthonormal family must stay below this.
pub const ORTHONORMAL_ABS: f64 = 1e-10;

/// Gram-Schmidt declares rank deficiency when the orthogonalized residual
/// norm falls below this fraction of the input vector norm.
pub const RANK_DEFICIENT_REL: f64 = 1e-10;

/// POVM elements may carry eigenvalues down to -POVM_PSD_ABS before they are
/// rejected as non-positive.
pub const POVM_PSD_ABS: f64 = 1e-10;

/// Max-abs deviation allowed between the element sum of a POVM and identity.
pub const POVM_COMPLETENESS_ABS: f64 = 1e-10;

/// Outcome probabilities of a measurement must sum to 1 within this.
pub const PROB_SUM_ABS: f64 = 1e-9;

/// An outcome probability below this floor is treated as exactly zero by the
/// classical Fisher information routine.
pub const PROB_FLOOR: f64 = 1e-12;

/// Likelihood probabilities are clamped at this floor before taking ln.
pub const LIKELIHOOD_CLAMP: f64 = 1e-12;

/// A time t is "singular" for omega_plus when |sin(omega_plus t / 2)| falls
/// below this, i.e. omega_plus t sits within ~2e-9 of a multiple of 2*pi.
pub const SINGULAR_TIME_SIN: f64 = 1e-9;

/// Condition-number threshold above which a Fisher information matrix is
/// flagged singular and inversion is refused.
pub const CONDITION_SINGULAR: f64 = 1e12;

/// Base step for central finite differences; the step used on axis i is
/// FD_STEP_BASE * (1 + |omega_i|).
pub const FD_STEP_BASE: f64 = 1e-5;

/// The compass refinement of the likelihood maximizer stops once its step
/// drops below this.
pub const MLE_REFINE_MIN_STEP: f64 = 1e-6;

/// Bisection width at which the crossover-equation root is accepted.
pub const CROSSOVER_BISECTION_ABS: f64 = 1e-10;

/// Residual |Re<psi|d_i psi>| accepted from the analytic derivative path.
pub const NORM_PRESERVATION_ABS: f64 = 1e-9;

/// Eigenvalues of a measurement element above this count toward its rank
/// when deciding whether the zero-probability Fisher limit applies.
pub const RANK_ONE_EIGENVALUE_ABS: f64 = 1e-8;
