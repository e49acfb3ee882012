//! Coupling models and their closed-form spectral data.
//!
//! Two Hamiltonian families are covered. The ladder model couples a middle
//! level symmetrically to two outer levels with strengths (Omega_1, Omega_2):
//!
//! ```text
//!         [ 0        Omega_1  0       ]
//! H = 1/2 [ Omega_1  0        Omega_2 ]
//!         [ 0        Omega_2  0       ]
//! ```
//!
//! Its spectrum is {-Omega_plus, 0, +Omega_plus} with
//! Omega_plus = sqrt(Omega_1^2 + Omega_2^2)/2, and the eigenvectors are
//! parameterized by the mixing angle theta with tan(theta) = Omega_1/Omega_2.
//! The star model couples a hub level 0 to `l` spokes with one strength per
//! spoke. Both expose their parameter-derivative generators dH/dOmega_i.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::rng::RngStream;
use crate::qcore::state::QuantumState;
use crate::tol;

/// The vector of Rabi frequencies being estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiParameters {
    omegas: Vec<f64>,
}

impl RabiParameters {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(RabiError::InvalidArgument {
                name: "omegas",
                message: "at least one frequency is required".into(),
            });
        }
        if omegas.iter().any(|w| !w.is_finite()) {
            return Err(RabiError::NonFinite {
                context: "rabi parameters",
            });
        }
        Ok(Self { omegas })
    }

    /// Convenience constructor for the two-parameter ladder model.
    pub fn pair(omega1: f64, omega2: f64) -> Result<Self> {
        Self::new(vec![omega1, omega2])
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.omegas[i]
    }

    /// Half the Euclidean norm of the frequency vector; the positive
    /// eigenfrequency of both models.
    pub fn omega_plus(&self) -> f64 {
        0.5 * self.omegas.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Mixing angle of the two-parameter ladder model,
    /// theta = atan2(Omega_1, Omega_2) in [-pi, pi].
    pub fn theta(&self) -> Result<f64> {
        if self.omegas.len() != 2 {
            return Err(RabiError::DimensionMismatch {
                context: "mixing angle",
                expected: 2,
                actual: self.omegas.len(),
            });
        }
        Ok(self.omegas[0].atan2(self.omegas[1]))
    }
}

/// Which coupling topology is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiModel {
    /// Three levels in a ladder: 0 -- 1 -- 2, two frequencies.
    ThreeLevel,
    /// Hub level 0 coupled to `spokes` outer levels, one frequency each.
    Star { spokes: usize },
}

impl RabiModel {
    pub fn dim(&self) -> usize {
        match self {
            RabiModel::ThreeLevel => 3,
            RabiModel::Star { spokes } => spokes + 1,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            RabiModel::ThreeLevel => 2,
            RabiModel::Star { spokes } => *spokes,
        }
    }

    /// The computational level used as the default probe for this model.
    pub fn probe_level(&self) -> usize {
        match self {
            RabiModel::ThreeLevel => 1,
            RabiModel::Star { .. } => 0,
        }
    }

    /// Positions (row < col) coupled by parameter `i`.
    fn coupling(&self, i: usize) -> (usize, usize) {
        match self {
            RabiModel::ThreeLevel => [(0, 1), (1, 2)][i],
            RabiModel::Star { .. } => (0, i + 1),
        }
    }

    /// dH/dOmega_i, a constant matrix with 1/2 on the coupled pair.
    pub fn generator(&self, i: usize) -> Result<ComplexMatrix> {
        if i >= self.param_count() {
            return Err(RabiError::InvalidArgument {
                name: "parameter index",
                message: format!("index {i} out of {}", self.param_count()),
            });
        }
        let (r, c) = self.coupling(i);
        let mut g = ComplexMatrix::zeros(self.dim());
        g.set(r, c, C64::new(0.5, 0.0));
        g.set(c, r, C64::new(0.5, 0.0));
        Ok(g)
    }

    /// H(Omega) = sum_i Omega_i dH/dOmega_i.
    pub fn hamiltonian(&self, params: &RabiParameters) -> Result<ComplexMatrix> {
        if params.len() != self.param_count() {
            return Err(RabiError::DimensionMismatch {
                context: "hamiltonian parameters",
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut h = ComplexMatrix::zeros(self.dim());
        for (i, &w) in params.omegas().iter().enumerate() {
            let (r, c) = self.coupling(i);
            h.set(r, c, C64::new(0.5 * w, 0.0));
            h.set(c, r, C64::new(0.5 * w, 0.0));
        }
        Ok(h)
    }
}

/// Closed-form eigensystem of the three-level ladder Hamiltonian.
///
/// Eigenvalues are -Omega_plus, 0, +Omega_plus with eigenvectors
///
/// ```text
/// |phi_0>  = cos(theta)|0> - sin(theta)|2>
/// |phi_+-> = (sin(theta)|0> +- |1> + cos(theta)|2>) / sqrt(2)
/// ```
#[derive(Debug, Clone)]
pub struct ThreeLevelEigensystem {
    pub omega_plus: f64,
    pub theta: f64,
    pub phi_zero: QuantumState,
    pub phi_plus: QuantumState,
    pub phi_minus: QuantumState,
}

impl ThreeLevelEigensystem {
    pub fn new(params: &RabiParameters) -> Result<Self> {
        if params.len() != 2 {
            return Err(RabiError::DimensionMismatch {
                context: "three-level eigensystem",
                expected: 2,
                actual: params.len(),
            });
        }
        let omega_plus = params.omega_plus();
        if omega_plus == 0.0 {
            return Err(RabiError::DegenerateSpectrum);
        }
        let theta = params.theta()?;
        let (sin_t, cos_t) = (
            params.omega(0) / (2.0 * omega_plus),
            params.omega(1) / (2.0 * omega_plus),
        );
        let re = |x: f64| C64::new(x, 0.0);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let phi_zero = QuantumState::new(Array1::from(vec![re(cos_t), re(0.0), re(-sin_t)]))?;
        let phi_plus = QuantumState::new(Array1::from(vec![
            re(sin_t * inv_sqrt2),
            re(inv_sqrt2),
            re(cos_t * inv_sqrt2),
        ]))?;
        let phi_minus = QuantumState::new(Array1::from(vec![
            re(sin_t * inv_sqrt2),
            re(-inv_sqrt2),
            re(cos_t * inv_sqrt2),
        ]))?;
        Ok(Self {
            omega_plus,
            theta,
            phi_zero,
            phi_plus,
            phi_minus,
        })
    }
}

/// Derivatives of the spectral coordinates (theta, Omega_plus) with respect
/// to the physical frequencies (Omega_1, Omega_2).
#[derive(Debug, Clone, Copy)]
pub struct ParameterJacobian {
    /// [d theta / d Omega_1, d theta / d Omega_2]
    pub d_theta: [f64; 2],
    /// [d Omega_plus / d Omega_1, d Omega_plus / d Omega_2]
    pub d_omega_plus: [f64; 2],
}

impl ParameterJacobian {
    pub fn new(params: &RabiParameters) -> Result<Self> {
        if params.len() != 2 {
            return Err(RabiError::DimensionMismatch {
                context: "parameter jacobian",
                expected: 2,
                actual: params.len(),
            });
        }
        let omega_plus = params.omega_plus();
        if omega_plus == 0.0 {
            return Err(RabiError::SingularParameterization);
        }
        let (w1, w2) = (params.omega(0), params.omega(1));
        let denom_theta = 4.0 * omega_plus * omega_plus;
        Ok(Self {
            d_theta: [w2 / denom_theta, -w1 / denom_theta],
            d_omega_plus: [w1 / (4.0 * omega_plus), w2 / (4.0 * omega_plus)],
        })
    }

    /// Determinant of the (theta, Omega_plus) <- (Omega_1, Omega_2) map;
    /// equals 1/(4 Omega_plus) and never vanishes away from the origin.
    pub fn wronskian(&self) -> f64 {
        self.d_theta[0] * self.d_omega_plus[1] - self.d_theta[1] * self.d_omega_plus[0]
    }
}

/// A probe state expressed in the eigenbasis: c0, c+, c- multiplying
/// |phi_0>, |phi_+>, |phi_->.
///
/// An overall phase is fixed by making c0 real and non-negative, which is
/// always reachable by a global phase and loses no generality.
#[derive(Debug, Clone, Copy)]
pub struct ProbeCoefficients {
    pub c_zero: f64,
    pub c_plus: C64,
    pub c_minus: C64,
}

impl ProbeCoefficients {
    pub fn new(c_zero: f64, c_plus: C64, c_minus: C64) -> Result<Self> {
        if c_zero < 0.0 {
            return Err(RabiError::InvalidArgument {
                name: "c_zero",
                message: "phase convention requires c0 >= 0".into(),
            });
        }
        let norm2 = c_zero * c_zero + c_plus.norm_sqr() + c_minus.norm_sqr();
        if (norm2 - 1.0).abs() > 10.0 * tol::STATE_NORM_ABS {
            return Err(RabiError::NotNormalized {
                deviation: (norm2 - 1.0).abs(),
            });
        }
        Ok(Self {
            c_zero,
            c_plus,
            c_minus,
        })
    }

    /// Decomposes a state over an eigensystem, rotating the global phase so
    /// c0 is real and non-negative.
    pub fn from_state(eig: &ThreeLevelEigensystem, psi: &QuantumState) -> Result<Self> {
        let c0 = eig.phi_zero.inner(psi);
        let cp = eig.phi_plus.inner(psi);
        let cm = eig.phi_minus.inner(psi);
        let phase = if c0.norm() > 1e-15 {
            (c0 / c0.norm()).conj()
        } else {
            C64::new(1.0, 0.0)
        };
        Self::new((c0 * phase).re.max(0.0), cp * phase, cm * phase)
    }

    /// Reassembles the state c0|phi_0> + c+|phi_+> + c-|phi_->.
    pub fn to_state(&self, eig: &ThreeLevelEigensystem) -> Result<QuantumState> {
        let mut amps = Array1::<C64>::zeros(3);
        for (coeff, phi) in [
            (C64::new(self.c_zero, 0.0), &eig.phi_zero),
            (self.c_plus, &eig.phi_plus),
            (self.c_minus, &eig.phi_minus),
        ] {
            amps = &amps + &phi.amplitudes().mapv(|z| z * coeff);
        }
        QuantumState::new(amps)
    }

    /// Coefficients of the bare middle level |1> = (|phi_+> - |phi_->)/sqrt(2).
    pub fn middle_level() -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c_zero: 0.0,
            c_plus: C64::new(inv_sqrt2, 0.0),
            c_minus: C64::new(-inv_sqrt2, 0.0),
        }
    }

    /// Haar-like random coefficients: six standard normals, normalized, with
    /// the global phase fixed by the c0 >= 0 convention.
    pub fn random(rng: &mut RngStream) -> Self {
        loop {
            let raw: Vec<C64> = (0..3)
                .map(|_| C64::new(rng.normal(), rng.normal()))
                .collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            let c0 = raw[0] / norm;
            let phase = if c0.norm() > 1e-15 {
                (c0 / c0.norm()).conj()
            } else {
                C64::new(1.0, 0.0)
            };
            return Self {
                c_zero: (c0 * phase).re.max(0.0),
                c_plus: raw[1] / norm * phase,
                c_minus: raw[2] / norm * phase,
            };
        }
    }
}
