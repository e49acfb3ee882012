//! Quantum Fisher information for unitarily evolved pure states.
//!
//! The chain is: a probe state, the evolved output state, its parameter
//! derivatives, and from those the information matrix
//!
//! ```text
//! J_ij = 4 Re<d_i psi|d_j psi> - 4 Im<d_i psi|psi> Im<d_j psi|psi>.
//! ```
//!
//! Derivatives come from one of three routes. The analytic route expands the
//! three-level output state in the Hamiltonian eigenbasis and differentiates
//! the closed form — mixing-angle rotation terms plus frequency-shift terms.
//! The finite-difference route works for any model by central differences of
//! the spectral propagator. The origin route is exact for any linear family
//! H(Omega) = sum_i Omega_i G_i at Omega = 0, where the propagator is the
//! identity and d_i psi = -i t G_i |psi> with no truncation error at all.
//! Dual routes exist so each can certify the other.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::models::{
    ParameterJacobian, ProbeCoefficients, RabiModel, RabiParameters, ThreeLevelEigensystem,
};
use crate::qcore::eig::{evolve, hermitian_eig};
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::povm::Povm;
use crate::qcore::state::QuantumState;
use crate::tol;

/// How a set of state derivatives was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// Closed-form eigenbasis expansion (three-level model).
    Analytic,
    /// Central finite differences of the propagator (any model).
    FiniteDifference,
    /// Exact rule d_i psi = -i t G_i |psi> at Omega = 0 (any linear model).
    LinearOrigin,
}

/// Output state plus its parameter derivatives in the computational basis.
#[derive(Debug, Clone)]
pub struct StateDerivatives {
    pub base: QuantumState,
    pub partials: Vec<Array1<C64>>,
    pub method: DerivativeMethod,
    /// |Re<psi|d_i psi>| per parameter; zero for exact normalization.
    pub norm_residuals: Vec<f64>,
}

impl StateDerivatives {
    fn assemble(
        base: QuantumState,
        partials: Vec<Array1<C64>>,
        method: DerivativeMethod,
    ) -> Result<Self> {
        let norm_residuals: Vec<f64> = partials
            .iter()
            .map(|dp| {
                base.amplitudes()
                    .iter()
                    .zip(dp.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<C64>()
                    .re
                    .abs()
            })
            .collect();
        // Differentiating a unit-norm family must keep <psi|d_i psi> purely
        // imaginary; only the truncation-free routes are held to this.
        if method != DerivativeMethod::FiniteDifference {
            for &r in &norm_residuals {
                if r > tol::NORM_PRESERVATION_ABS {
                    return Err(RabiError::NonFinite {
                        context: "norm-preservation residual",
                    });
                }
            }
        }
        Ok(Self {
            base,
            partials,
            method,
            norm_residuals,
        })
    }

    pub fn param_count(&self) -> usize {
        self.partials.len()
    }
}

/// Evolved probe state |psi(t)> = e^{-i H(Omega) t} |probe>.
pub fn output_state(
    model: &RabiModel,
    params: &RabiParameters,
    t: f64,
    probe: &QuantumState,
) -> Result<QuantumState> {
    let h = model.hamiltonian(params)?;
    evolve(&h, t, probe)
}

/// Closed-form derivatives of the three-level output state.
///
/// With P = e^{-i Omega_plus t} - 1 and probe coefficients (c0, c+, c-) in
/// the eigenbasis at the working point, the derivative along parameter i is
///
/// ```text
/// |d_i psi> = (d_i theta/sqrt2) (c+ P + c- P*) |phi_0>
///           + [-i t (d_i Omega_plus) c+ e^{-i Omega_plus t} + (c0 d_i theta/sqrt2) P ] |phi_+>
///           + [ i t (d_i Omega_plus) c- e^{ i Omega_plus t} + (c0 d_i theta/sqrt2) P*] |phi_->.
/// ```
pub fn state_derivatives_analytic(
    params: &RabiParameters,
    t: f64,
    probe: &ProbeCoefficients,
) -> Result<StateDerivatives> {
    let eig = ThreeLevelEigensystem::new(params)?;
    let jac = ParameterJacobian::new(params)?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let e_minus = C64::from_polar(1.0, -eig.omega_plus * t);
    let e_plus = e_minus.conj();
    let p = e_minus - C64::new(1.0, 0.0);
    let c0 = C64::new(probe.c_zero, 0.0);

    let mix = |coeffs: [C64; 3]| -> Array1<C64> {
        let mut amps = Array1::<C64>::zeros(3);
        for (c, phi) in coeffs
            .iter()
            .zip([&eig.phi_zero, &eig.phi_plus, &eig.phi_minus])
        {
            amps = &amps + &phi.amplitudes().mapv(|z| z * *c);
        }
        amps
    };

    let base = QuantumState::new(mix([c0, probe.c_plus * e_minus, probe.c_minus * e_plus]))?;

    let mut partials = Vec::with_capacity(2);
    for i in 0..2 {
        let d_theta = jac.d_theta[i];
        let d_radial = jac.d_omega_plus[i];
        let rot = C64::new(d_theta * inv_sqrt2, 0.0);
        let coeff_zero = rot * (probe.c_plus * p + probe.c_minus * p.conj());
        let coeff_plus = C64::new(0.0, -t * d_radial) * probe.c_plus * e_minus + c0 * rot * p;
        let coeff_minus =
            C64::new(0.0, t * d_radial) * probe.c_minus * e_plus + c0 * rot * p.conj();
        partials.push(mix([coeff_zero, coeff_plus, coeff_minus]));
    }
    StateDerivatives::assemble(base, partials, DerivativeMethod::Analytic)
}

/// Central-difference derivatives of the output state, any model.
///
/// The step scales with the parameter magnitude. Truncation is O(h^2 t^3),
/// so this route is a cross-check, not a precision source.
pub fn state_derivatives_fd(
    model: &RabiModel,
    params: &RabiParameters,
    t: f64,
    probe: &QuantumState,
) -> Result<StateDerivatives> {
    let base = output_state(model, params, t, probe)?;
    let n = params.len();
    let mut partials = Vec::with_capacity(n);
    for i in 0..n {
        let h = tol::FD_STEP_BASE * (1.0 + params.omega(i).abs());
        let mut up = params.omegas().to_vec();
        let mut down = up.clone();
        up[i] += h;
        down[i] -= h;
        let psi_up = output_state(model, &RabiParameters::new(up)?, t, probe)?;
        let psi_down = output_state(model, &RabiParameters::new(down)?, t, probe)?;
        let diff = (psi_up.amplitudes() - psi_down.amplitudes()).mapv(|z| z / (2.0 * h));
        partials.push(diff);
    }
    StateDerivatives::assemble(base, partials, DerivativeMethod::FiniteDifference)
}

/// Exact derivatives at Omega = 0 for a linear Hamiltonian family.
///
/// H(0) = 0 makes the propagator the identity, and expanding the
/// time-ordered exponential gives d_i psi = -i t G_i |probe> exactly — no
/// discretization enters, so downstream comparisons can be held to
/// near-machine tolerances.
pub fn state_derivatives_origin(
    model: &RabiModel,
    t: f64,
    probe: &QuantumState,
) -> Result<StateDerivatives> {
    if probe.dim() != model.dim() {
        return Err(RabiError::DimensionMismatch {
            context: "origin derivatives",
            expected: model.dim(),
            actual: probe.dim(),
        });
    }
    let mut partials = Vec::with_capacity(model.param_count());
    for i in 0..model.param_count() {
        let g = model.generator(i)?;
        let applied = g.apply(probe.amplitudes());
        partials.push(applied.mapv(|z| z * C64::new(0.0, -t)));
    }
    StateDerivatives::assemble(probe.clone(), partials, DerivativeMethod::LinearOrigin)
}

/// The information matrix with its numerical health indicators.
#[derive(Debug, Clone)]
pub struct QfimResult {
    pub matrix: Array2<f64>,
    /// Max |Im(<d_i psi|d_j psi> + <d_i psi|psi><psi|d_j psi>)| — the
    /// pure-state weak-commutation quantity; zero means one measurement can
    /// saturate all parameters at once.
    pub commutation_residual: f64,
    /// Eigenvalue ratio lambda_max/lambda_min; infinite when the matrix has
    /// a non-positive eigenvalue.
    pub condition_number: f64,
    pub singular: bool,
}

impl QfimResult {
    pub(crate) fn from_matrix(matrix: Array2<f64>, commutation_residual: f64) -> Self {
        let eigs = real_symmetric_eigenvalues(&matrix);
        let lambda_min = eigs.first().copied().unwrap_or(0.0);
        let lambda_max = eigs.last().copied().unwrap_or(0.0);
        let condition_number = if lambda_min > 0.0 {
            lambda_max / lambda_min
        } else {
            f64::INFINITY
        };
        let singular =
            !(condition_number.is_finite()) || condition_number > tol::CONDITION_SINGULAR;
        Self {
            matrix,
            commutation_residual,
            condition_number,
            singular,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        real_symmetric_eigenvalues(&self.matrix)
    }

    /// Sum of inverse eigenvalues — the unweighted quantum Cramer-Rao cost.
    pub fn trace_inverse(&self) -> Result<f64> {
        if self.singular {
            return Err(RabiError::SingularQfim {
                indicator: self.condition_number,
            });
        }
        Ok(self.eigenvalues().iter().map(|l| 1.0 / l).sum())
    }
}

fn real_symmetric_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let embedded = ComplexMatrix::from_fn(n, |i, j| C64::new(0.5 * (m[(i, j)] + m[(j, i)]), 0.0))
        .expect("finite real matrix");
    hermitian_eig(&embedded)
        .expect("symmetric matrix always diagonalizes")
        .eigenvalues
}

/// Assembles the information matrix from state derivatives.
pub fn qfim_pure(derivs: &StateDerivatives) -> Result<QfimResult> {
    let n = derivs.param_count();
    let psi = derivs.base.amplitudes();
    let overlap = |a: &Array1<C64>, b: &Array1<C64>| -> C64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    };
    // <d_i psi|psi> is purely imaginary for a norm-preserving family; only
    // its imaginary part enters.
    let alphas: Vec<f64> = derivs
        .partials
        .iter()
        .map(|dp| overlap(dp, psi).im)
        .collect();
    let mut matrix = Array2::<f64>::zeros((n, n));
    let mut commutation_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gram = overlap(&derivs.partials[i], &derivs.partials[j]);
            matrix[(i, j)] = 4.0 * gram.re - 4.0 * alphas[i] * alphas[j];
            let di_psi = overlap(&derivs.partials[i], psi);
            let psi_dj = overlap(psi, &derivs.partials[j]);
            commutation_residual = commutation_residual.max((gram + di_psi * psi_dj).im.abs());
        }
    }
    // Exact symmetrization: Re of a Gram matrix is symmetric up to rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = avg;
            matrix[(j, i)] = avg;
        }
    }
    Ok(QfimResult::from_matrix(matrix, commutation_residual))
}

/// Rank-one information matrix at a revival time, where
/// e^{-i Omega_plus t} = 1 and the information collapses onto the radial
/// direction:
///
/// ```text
/// J = 4 t^2 (1 - c0^2 - (|c+|^2 - |c-|^2)^2) * d Omega_plus (d Omega_plus)^T.
/// ```
pub fn qfim_singular_form(
    params: &RabiParameters,
    t: f64,
    probe: &ProbeCoefficients,
) -> Result<QfimResult> {
    let omega_plus = params.omega_plus();
    if omega_plus == 0.0 {
        return Err(RabiError::SingularParameterization);
    }
    let half_phase_sin = (0.5 * omega_plus * t).sin();
    if half_phase_sin.abs() > tol::SINGULAR_TIME_SIN {
        return Err(RabiError::SingularTime {
            value: half_phase_sin.abs(),
            tolerance: tol::SINGULAR_TIME_SIN,
        });
    }
    let jac = ParameterJacobian::new(params)?;
    let imbalance = probe.c_plus.norm_sqr() - probe.c_minus.norm_sqr();
    let weight = 4.0 * t * t * (1.0 - probe.c_zero * probe.c_zero - imbalance * imbalance);
    let mut matrix = Array2::<f64>::zeros((2, 2));
    for i in 0..2 {
        for j in i..2 {
            let entry = weight * jac.d_omega_plus[i] * jac.d_omega_plus[j];
            matrix[(i, j)] = entry;
            matrix[(j, i)] = entry;
        }
    }
    Ok(QfimResult::from_matrix(matrix, 0.0))
}

/// Symmetric logarithmic derivative of a pure-state family:
/// L_i = 2(|d_i psi><psi| + |psi><d_i psi|).
pub fn sld_pure(derivs: &StateDerivatives, i: usize) -> Result<ComplexMatrix> {
    if i >= derivs.param_count() {
        return Err(RabiError::InvalidArgument {
            name: "parameter index",
            message: format!("index {i} out of {}", derivs.param_count()),
        });
    }
    let psi = derivs.base.amplitudes();
    let dp = &derivs.partials[i];
    let term = ComplexMatrix::outer(dp, psi);
    Ok(term.add(&term.adjoint()).scale(C64::new(2.0, 0.0)))
}

/// Classical Fisher information of a measurement, with explicit handling of
/// vanishing outcome probabilities.
#[derive(Debug, Clone)]
pub struct CfiOutcome {
    pub matrix: Array2<f64>,
    /// Outcomes with vanishing probability whose element is not rank-one,
    /// where the Fisher contribution has no direction-free limit; they are
    /// omitted and reported here.
    pub dropped_outcomes: Vec<usize>,
}

/// F_ij = sum_k (d_i p_k)(d_j p_k)/p_k with d_i p_k = 2 Re<psi|E_k|d_i psi>.
///
/// An outcome with p_k below the probability floor and a rank-one element
/// c|gamma><gamma| contributes its analytic limit
/// 4 c Re(<gamma|d_i psi>* <gamma|d_j psi>) instead of a 0/0 ratio.
pub fn cfi_from_povm(derivs: &StateDerivatives, povm: &Povm) -> Result<CfiOutcome> {
    let n = derivs.param_count();
    let psi = derivs.base.amplitudes();
    if povm.dim() != derivs.base.dim() {
        return Err(RabiError::DimensionMismatch {
            context: "classical information",
            expected: derivs.base.dim(),
            actual: povm.dim(),
        });
    }
    let mut matrix = Array2::<f64>::zeros((n, n));
    let mut dropped = Vec::new();
    for (k, element) in povm.elements().iter().enumerate() {
        let applied = element.apply(psi);
        let prob = psi
            .iter()
            .zip(applied.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>();
        if prob >= tol::PROB_FLOOR {
            let dp: Vec<f64> = derivs
                .partials
                .iter()
                .map(|dpsi| {
                    2.0 * psi
                        .iter()
                        .zip(element.apply(dpsi).iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum::<C64>()
                        .re
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    matrix[(i, j)] += dp[i] * dp[j] / prob;
                }
            }
            continue;
        }
        // Vanishing probability: usable only for rank-one elements.
        let eig = hermitian_eig(element)?;
        let significant: Vec<usize> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol::RANK_ONE_EIGENVALUE_ABS)
            .map(|(idx, _)| idx)
            .collect();
        if significant.len() != 1 {
            dropped.push(k);
            continue;
        }
        let weight = eig.eigenvalues[significant[0]];
        let gamma = &eig.eigenvectors[significant[0]];
        let amps: Vec<C64> = derivs
            .partials
            .iter()
            .map(|dpsi| {
                gamma
                    .amplitudes()
                    .iter()
                    .zip(dpsi.iter())
                    .map(|(g, d)| g.conj() * d)
                    .sum()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                matrix[(i, j)] += 4.0 * weight * (amps[i].conj() * amps[j]).re;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = avg;
            matrix[(j, i)] = avg;
        }
    }
    Ok(CfiOutcome {
        matrix,
        dropped_outcomes: dropped,
    })
}
