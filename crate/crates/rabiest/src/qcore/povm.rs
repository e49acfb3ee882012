//! Positive operator-valued measures: validation, Born probabilities, and
//! multinomial outcome sampling.

use crate::error::{RabiError, Result};
use crate::qcore::eig::hermitian_eig;
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::rng::RngStream;
use crate::qcore::state::QuantumState;
use crate::tol;

/// A validated measurement: Hermitian PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    /// Validates Hermiticity, positive semidefiniteness (up to a small
    /// negative eigenvalue tolerance), and completeness, then wraps the
    /// elements.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(RabiError::InvalidArgument {
                name: "elements",
                message: "a measurement needs at least one element".into(),
            });
        }
        let dim = elements[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (index, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(RabiError::DimensionMismatch {
                    context: "povm element",
                    expected: dim,
                    actual: e.dim(),
                });
            }
            if e.hermiticity_deviation() > tol::POVM_PSD_ABS {
                return Err(RabiError::NotHermitian {
                    deviation: e.hermiticity_deviation(),
                    tolerance: tol::POVM_PSD_ABS,
                });
            }
            let eig = hermitian_eig(e)?;
            if let Some(&lambda) = eig
                .eigenvalues
                .iter()
                .find(|&&lambda| lambda < -tol::POVM_PSD_ABS)
            {
                return Err(RabiError::NotPositive {
                    index,
                    eigenvalue: lambda,
                });
            }
            sum = sum.add(e);
        }
        let deviation = sum.sub(&ComplexMatrix::identity(dim)).max_abs();
        if deviation > tol::POVM_COMPLETENESS_ABS {
            return Err(RabiError::IncompletePovm { deviation });
        }
        Ok(Self { elements })
    }

    /// Projectors onto the computational basis states.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let basis = QuantumState::basis(dim, k);
                ComplexMatrix::outer(basis.amplitudes(), basis.amplitudes())
            })
            .collect();
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Born-rule outcome probabilities for a pure state.
    ///
    /// Tiny negative values from rounding are clamped to zero; the vector is
    /// renormalized after checking the raw sum against the unit-sum
    /// tolerance.
    pub fn probabilities(&self, psi: &QuantumState) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(RabiError::DimensionMismatch {
                context: "povm probabilities",
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let mut probs: Vec<f64> = self
            .elements
            .iter()
            .map(|e| {
                let applied = e.apply(psi.amplitudes());
                psi.amplitudes()
                    .iter()
                    .zip(applied.iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum::<f64>()
            })
            .collect();
        let sum: f64 = probs.iter().sum();
        if !(sum - 1.0).abs().is_finite() || (sum - 1.0).abs() > tol::PROB_SUM_ABS {
            return Err(RabiError::InvalidProbabilities { sum });
        }
        for p in &mut probs {
            if *p < 0.0 {
                if *p < -tol::PROB_SUM_ABS {
                    return Err(RabiError::InvalidProbabilities { sum: *p });
                }
                *p = 0.0;
            }
        }
        let clamped_sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= clamped_sum;
        }
        Ok(probs)
    }

    /// Draws `shots` outcomes and returns per-element counts.
    pub fn sample_counts(
        &self,
        psi: &QuantumState,
        shots: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<usize>> {
        let probs = self.probabilities(psi)?;
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..shots {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut chosen = probs.len() - 1;
            for (k, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = k;
                    break;
                }
            }
            counts[chosen] += 1;
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use num_complex::Complex64 as C64;

    #[test]
    fn computational_basis_is_valid() {
        let povm = Povm::computational(3);
        Povm::new(povm.elements().to_vec()).unwrap();
    }

    #[test]
    fn rejects_incomplete_set() {
        let mut elements = Povm::computational(3).elements().to_vec();
        elements.pop();
        assert!(matches!(
            Povm::new(elements),
            Err(RabiError::IncompletePovm { .. })
        ));
    }

    #[test]
    fn rejects_negative_element() {
        let id = ComplexMatrix::identity(2);
        let basis = QuantumState::basis(2, 0);
        let proj = ComplexMatrix::outer(basis.amplitudes(), basis.amplitudes());
        // E1 = I + P, E2 = -P: completeness holds but E2 is negative.
        let e1 = id.add(&proj);
        let e2 = proj.scale(C64::new(-1.0, 0.0));
        assert!(matches!(
            Povm::new(vec![e1, e2]),
            Err(RabiError::NotPositive { .. })
        ));
    }

    #[test]
    fn probabilities_follow_born_rule() {
        let povm = Povm::computational(2);
        let psi =
            QuantumState::new(Array1::from(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)])).unwrap();
        let p = povm.probabilities(&psi).unwrap();
        assert!((p[0] - 0.36).abs() < 1e-15);
        assert!((p[1] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn sampling_matches_distribution() {
        let povm = Povm::computational(2);
        let psi =
            QuantumState::new(Array1::from(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)])).unwrap();
        let mut rng = RngStream::from_seed(11);
        let shots = 40_000;
        let counts = povm.sample_counts(&psi, shots, &mut rng).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), shots);
        let freq = counts[1] as f64 / shots as f64;
        // Five-sigma band around p = 0.64 for 40k draws.
        assert!((freq - 0.64).abs() < 5.0 * (0.64f64 * 0.36 / shots as f64).sqrt());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let povm = Povm::computational(3);
        let psi = QuantumState::new(Array1::from(vec![
            C64::new(0.5, 0.0),
            C64::new(0.5, 0.5),
            C64::new(0.0, 0.5),
        ]))
        .unwrap();
        let mut a = RngStream::from_seed(5);
        let mut b = RngStream::from_seed(5);
        let ca = povm.sample_counts(&psi, 200, &mut a).unwrap();
        let cb = povm.sample_counts(&psi, 200, &mut b).unwrap();
        assert_eq!(ca, cb);
    }
}
