//! Dimension-agnostic quantum primitives: complex matrices, pure states,
//! Hermitian eigendecomposition, measurements, and seeded randomness.

pub mod eig;
pub mod matrix;
pub mod povm;
pub mod rng;
pub mod state;

pub use eig::{evolve, hermitian_eig, propagator, EigenSystem};
pub use matrix::ComplexMatrix;
pub use povm::Povm;
pub use rng::RngStream;
pub use state::{inner, orthonormalize, vec_norm, QuantumState};
