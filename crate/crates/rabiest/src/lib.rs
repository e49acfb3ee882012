//! Precision limits and adaptive estimation for jointly driven multi-level
//! systems.
//!
//! The crate computes how well several drive amplitudes of a coupled-level
//! system can be estimated at once:
//!
//! - [`qcore`] — dense complex linear algebra sized for small Hermitian
//!   problems: states, matrices, a Jacobi eigensolver, propagators, POVM
//!   sampling, and seeded RNG streams.
//! - [`models`] — the three-level ladder and (l+1)-level star coupling
//!   families, their eigensystems, and probe-state parameterizations.
//! - [`qfim`] — quantum Fisher information matrices of pure-state families
//!   from analytic, finite-difference, or exact-origin derivatives, with
//!   symmetric-logarithmic-derivative and classical-information helpers.
//! - [`closed_form`] — closed-form information matrices, optimal probes and
//!   measurements, attainable-variance bounds for joint, separate, and
//!   control-assisted schemes, and the regime-crossover solver.
//! - [`adaptive`] — the simulated control-chased estimation loop: seeded
//!   measurement rounds, cumulative maximum-likelihood updates, and ensemble
//!   statistics.
//! - [`verify`] — self-checking suites wired to the `verify` CLI command.
//! - [`cli`] — the `rabiest` binary: CSV experiment drivers over the above.
//!
//! Determinism is a design rule: every stochastic path takes an explicit
//! seed and equal seeds give bitwise-equal results.

pub mod adaptive;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod models;
pub mod qcore;
pub mod qfim;
pub mod tol;
pub mod verify;

pub use error::{RabiError, Result};
pub use models::{RabiModel, RabiParameters};
