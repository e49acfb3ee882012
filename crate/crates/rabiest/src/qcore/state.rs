//! Pure-state vectors and Gram-Schmidt orthonormalization.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::tol;

/// Normalized pure state on a finite-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amps: Array1<C64>,
}

impl QuantumState {
    /// Wraps an amplitude vector, requiring unit norm within the crate norm
    /// tolerance.
    pub fn new(amps: Array1<C64>) -> Result<Self> {
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(RabiError::NonFinite {
                context: "QuantumState::new",
            });
        }
        let norm = vec_norm(&amps);
        let deviation = (norm - 1.0).abs();
        if deviation > tol::STATE_NORM_ABS {
            return Err(RabiError::NotNormalized { deviation });
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector into a state.
    pub fn from_unnormalized(amps: Array1<C64>) -> Result<Self> {
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(RabiError::NonFinite {
                context: "QuantumState::from_unnormalized",
            });
        }
        let norm = vec_norm(&amps);
        if norm <= 0.0 {
            return Err(RabiError::RankDeficient {
                index: 0,
                residual: norm,
            });
        }
        let inv = C64::new(1.0 / norm, 0.0);
        Ok(Self {
            amps: amps.mapv(|z| z * inv),
        })
    }

    /// Computational basis state |level> on `dim` levels.
    pub fn basis(dim: usize, level: usize) -> Self {
        assert!(level < dim, "basis level out of range");
        let mut amps = Array1::zeros(dim);
        amps[level] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &QuantumState) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// Global-phase-insensitive distance 1 - |<self|other>|.
    ///
    /// Zero for states equal up to a phase e^{i phi}; at most 1.
    pub fn global_phase_distance(&self, other: &QuantumState) -> f64 {
        1.0 - self.inner(other).norm()
    }
}

/// Inner product <a|b> on raw amplitude vectors.
pub fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    assert_eq!(a.len(), b.len(), "inner product dimension mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt with a second orthogonalization pass.
///
/// Returns unit vectors spanning the same flag of subspaces as the input.
/// Fails with the offending index when a vector is linearly dependent on its
/// predecessors within the rank tolerance.
pub fn orthonormalize(vectors: &[Array1<C64>]) -> Result<Vec<Array1<C64>>> {
    let mut out: Vec<Array1<C64>> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        let original = vec_norm(v);
        if original <= 0.0 {
            return Err(RabiError::RankDeficient {
                index,
                residual: 0.0,
            });
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let overlap = inner(q, &w);
                w = &w - &q.mapv(|z| z * overlap);
            }
        }
        let residual = vec_norm(&w);
        if residual < tol::RANK_DEFICIENT_REL * original {
            return Err(RabiError::RankDeficient { index, residual });
        }
        let inv = C64::new(1.0 / residual, 0.0);
        out.push(w.mapv(|z| z * inv));
    }
    Ok(out)
}
