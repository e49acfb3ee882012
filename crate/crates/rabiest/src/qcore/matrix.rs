//! Dense square complex matrices for few-level Hamiltonians and operators.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::tol;

/// Square complex matrix with finite entries.
///
/// Dimensions in this crate are tiny (at most a few tens of levels), so all
/// operations are plain dense loops with no external linear-algebra backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<C64>,
}

impl ComplexMatrix {
    /// Wraps an array after checking that it is square and entrywise finite.
    pub fn from_array(data: Array2<C64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(RabiError::DimensionMismatch {
                context: "ComplexMatrix::from_array",
                expected: r,
                actual: c,
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(RabiError::NonFinite {
                context: "ComplexMatrix::from_array",
            });
        }
        Ok(Self { data })
    }

    /// Builds a matrix from a closure over (row, column) indices.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        Self::from_array(Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim),
        }
    }

    /// Rank-one matrix |a><b|.
    pub fn outer(a: &Array1<C64>, b: &Array1<C64>) -> Self {
        let n = a.len();
        assert_eq!(n, b.len(), "outer product dimension mismatch");
        let data = Array2::from_shape_fn((n, n), |(i, j)| a[i] * b[j].conj());
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        Self {
            data: Array2::from_shape_fn((n, n), |(i, j)| self.data[(j, i)].conj()),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "matmul dimension mismatch");
        Self {
            data: self.data.dot(&rhs.data),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "add dimension mismatch");
        Self {
            data: &self.data + &rhs.data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "sub dimension mismatch");
        Self {
            data: &self.data - &rhs.data,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * factor),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        assert_eq!(self.dim(), v.len(), "apply dimension mismatch");
        self.data.dot(v)
    }

    /// Entrywise max-abs norm, the norm used by every matrix tolerance here.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs deviation from the adjoint.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Checks Hermiticity against the crate-wide relative tolerance.
    pub fn check_hermitian(&self) -> Result<()> {
        let tolerance = tol::HERMITICITY_REL * self.max_abs();
        let deviation = self.hermiticity_deviation();
        if deviation > tolerance {
            return Err(RabiError::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }
}
