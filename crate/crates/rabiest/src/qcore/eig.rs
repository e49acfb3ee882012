//! Hermitian eigendecomposition and spectral time evolution.
//!
//! The solver is a cyclic complex Jacobi iteration. Dimensions in this crate
//! never exceed a few tens of levels, where Jacobi is simple, accurate to a
//! few ulps, and exactly diagonal-preserving: a diagonal input produces the
//! standard basis as eigenvectors with no rounding at all. Matrix
//! exponentials are always evaluated through the spectral decomposition.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::state::QuantumState;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order with matched orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<QuantumState>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds sum_k lambda_k |v_k><v_k|.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut acc = ComplexMatrix::zeros(n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let proj = ComplexMatrix::outer(v.amplitudes(), v.amplitudes());
            acc = acc.add(&proj.scale(C64::new(*lambda, 0.0)));
        }
        acc
    }

    /// Max-abs deviation of the eigenvector Gram matrix from identity.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g = self.eigenvectors[i].inner(&self.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g - C64::new(target, 0.0)).norm());
            }
        }
        dev
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// The input is validated against the crate Hermiticity tolerance first.
/// Eigenvalues come back ascending; eigenvectors are orthonormal columns of
/// the accumulated Jacobi rotations.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<EigenSystem> {
    h.check_hermitian()?;
    let n = h.dim();
    let mut a: Array2<C64> = h.data().clone();
    // Symmetrize so rounding in the input cannot bias the iteration.
    for i in 0..n {
        for j in 0..n {
            if i < j {
                let avg = 0.5 * (a[(i, j)] + a[(j, i)].conj());
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            } else if i == j {
                a[(i, j)] = C64::new(a[(i, j)].re, 0.0);
            }
        }
    }
    let mut v: Array2<C64> = Array2::eye(n);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let target = scale * 1e-15 * n as f64;

    let mut converged = false;
    let mut last_off = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].norm());
            }
        }
        last_off = off;
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs <= target * 1e-2 {
                    continue;
                }
                let phase = b / C64::new(babs, 0.0);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * babs);
                // Smaller-magnitude root of t^2 - 2 tau t - 1 = 0; the sign
                // matches the R[p][q] = -s e^{i phi} rotation layout.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::new(c, 0.0);
                let s_ph = phase * s;
                // Column update: B = A R with R[p][p]=c, R[q][p]=s e^{-i phi},
                // R[p][q]=-s e^{i phi}, R[q][q]=c.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs + akq * s_ph.conj();
                    a[(k, q)] = akq * cs - akp * s_ph;
                }
                // Row update: A = R^H B.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs + aqk * s_ph;
                    a[(q, k)] = aqk * cs - apk * s_ph.conj();
                }
                // Eigenvector accumulation: V = V R.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs + vkq * s_ph.conj();
                    v[(k, q)] = vkq * cs - vkp * s_ph;
                }
                // Pin the rotated pair exactly.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(RabiError::EigenConvergence {
            sweeps: MAX_SWEEPS,
            off: last_off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &k in &order {
        eigenvalues.push(a[(k, k)].re);
        let col = Array1::from_shape_fn(n, |i| v[(i, k)]);
        eigenvectors.push(QuantumState::new(col)?);
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Unitary e^{-i H t} assembled from the spectral decomposition of H.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = eig.dim();
    let mut u = ComplexMatrix::zeros(n);
    for (lambda, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let proj = ComplexMatrix::outer(v.amplitudes(), v.amplitudes());
        u = u.add(&proj.scale(C64::from_polar(1.0, -lambda * t)));
    }
    Ok(u)
}

/// Evolves |psi> to e^{-i H t}|psi> through the spectral decomposition.
pub fn evolve(h: &ComplexMatrix, t: f64, psi: &QuantumState) -> Result<QuantumState> {
    if h.dim() != psi.dim() {
        return Err(RabiError::DimensionMismatch {
            context: "evolve",
            expected: h.dim(),
            actual: psi.dim(),
        });
    }
    let eig = hermitian_eig(h)?;
    let mut out = Array1::<C64>::zeros(psi.dim());
    for (lambda, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let amp = v.inner(psi) * C64::from_polar(1.0, -lambda * t);
        out = &out + &v.amplitudes().mapv(|z| z * amp);
    }
    QuantumState::new(out)
}
