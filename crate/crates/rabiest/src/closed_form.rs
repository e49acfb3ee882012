//! Closed-form information geometry of the three-level ladder model.
//!
//! Everything here reduces the information matrix to three scalars. With
//! P = e^{-i Omega_plus t} - 1 and probe coefficients (c0, c+, c-), define
//!
//! ```text
//! M = c+* P* + c-* P,    N = c+* P* - c-* P,
//! ```
//!
//! and the quadratic forms
//!
//! ```text
//! A = -8 c0^2 (Im M)^2 + 4 c0^2 |P|^2 + 2 |M|^2
//! B = -4 t^2 Re(M N*)^2 / |P|^4 + 4 t^2 - 4 c0^2 t^2
//! C = -4 sqrt2 c0 Im M (Re(M N*)/|P|^2) t + 2 sqrt2 c0 t Im N.
//! ```
//!
//! The information matrix in physical coordinates is then
//!
//! ```text
//! J_ij = A d_i theta d_j theta + B d_i Omega_plus d_j Omega_plus
//!        + C (d_i theta d_j Omega_plus + d_j theta d_i Omega_plus),
//! ```
//!
//! and because the two Jacobian rows are orthogonal with fixed norms, the
//! inverse trace collapses to (4A + 4 Omega_plus^2 B)/(AB - C^2). Minimizing
//! over probes gives the equal-weight bright-state superposition and the
//! floor 1/t^2 + Omega_plus^2 / (4 sin^2(Omega_plus t / 2)).

use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::models::{
    ParameterJacobian, ProbeCoefficients, RabiModel, RabiParameters, ThreeLevelEigensystem,
};
use crate::qcore::eig::hermitian_eig;
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::povm::Povm;
use crate::qcore::state::{orthonormalize, QuantumState};
use crate::qfim::{state_derivatives_analytic, QfimResult, StateDerivatives};
use crate::tol;
use ndarray::Array2;

/// The phase factor P and the probe mixtures M, N it induces.
#[derive(Debug, Clone, Copy)]
pub struct PmnCoefficients {
    pub p: C64,
    pub m: C64,
    pub n: C64,
}

/// P = e^{-i Omega_plus t} - 1 with M, N as defined in the module docs.
pub fn pmn_coefficients(omega_plus: f64, t: f64, probe: &ProbeCoefficients) -> PmnCoefficients {
    let p = C64::from_polar(1.0, -omega_plus * t) - C64::new(1.0, 0.0);
    let m = probe.c_plus.conj() * p.conj() + probe.c_minus.conj() * p;
    let n = probe.c_plus.conj() * p.conj() - probe.c_minus.conj() * p;
    PmnCoefficients { p, m, n }
}

/// The three scalars that close the information matrix.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Evaluates A, B, C away from revival times.
///
/// At a revival (|P| = 0) the B and C expressions are 0/0; callers must use
/// the rank-one revival form instead, so this errors there.
pub fn abc_coefficients(
    omega_plus: f64,
    t: f64,
    probe: &ProbeCoefficients,
) -> Result<ClosedFormCoefficients> {
    let half_sin = (0.5 * omega_plus * t).sin();
    if half_sin.abs() < tol::SINGULAR_TIME_SIN {
        return Err(RabiError::SingularTime {
            value: half_sin.abs(),
            tolerance: tol::SINGULAR_TIME_SIN,
        });
    }
    let pmn = pmn_coefficients(omega_plus, t, probe);
    let sqrt2 = std::f64::consts::SQRT_2;
    let c0 = probe.c_zero;
    let p2 = pmn.p.norm_sqr();
    let im_m = pmn.m.im;
    let re_mn = (pmn.m * pmn.n.conj()).re;
    let a = -8.0 * c0 * c0 * im_m * im_m + 4.0 * c0 * c0 * p2 + 2.0 * pmn.m.norm_sqr();
    let b = -4.0 * t * t * re_mn * re_mn / (p2 * p2) + 4.0 * t * t - 4.0 * c0 * c0 * t * t;
    let c = -4.0 * sqrt2 * c0 * im_m * (re_mn / p2) * t + 2.0 * sqrt2 * c0 * t * pmn.n.im;
    Ok(ClosedFormCoefficients { a, b, c })
}

/// Full 2x2 information matrix from the closed form, in the physical
/// (Omega_1, Omega_2) coordinates.
pub fn qfim_closed_form(
    params: &RabiParameters,
    t: f64,
    probe: &ProbeCoefficients,
) -> Result<QfimResult> {
    let coeffs = abc_coefficients(params.omega_plus(), t, probe)?;
    let jac = ParameterJacobian::new(params)?;
    let mut matrix = Array2::<f64>::zeros((2, 2));
    for i in 0..2 {
        for j in 0..2 {
            matrix[(i, j)] = coeffs.a * jac.d_theta[i] * jac.d_theta[j]
                + coeffs.b * jac.d_omega_plus[i] * jac.d_omega_plus[j]
                + coeffs.c
                    * (jac.d_theta[i] * jac.d_omega_plus[j] + jac.d_theta[j] * jac.d_omega_plus[i]);
        }
    }
    Ok(QfimResult::from_matrix(matrix, 0.0))
}

/// Tr J^{-1} = (4A + 4 Omega_plus^2 B)/(AB - C^2), using the fixed Jacobian
/// row norms; errors when the closed form is degenerate.
pub fn trace_inverse_closed_form(
    params: &RabiParameters,
    t: f64,
    probe: &ProbeCoefficients,
) -> Result<f64> {
    let omega_plus = params.omega_plus();
    let coeffs = abc_coefficients(omega_plus, t, probe)?;
    let det = coeffs.a * coeffs.b - coeffs.c * coeffs.c;
    let scale = (coeffs.a.abs() * coeffs.b.abs()).max(coeffs.c * coeffs.c);
    if det <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        return Err(RabiError::SingularQfim {
            indicator: if det > 0.0 {
                scale / det
            } else {
                f64::INFINITY
            },
        });
    }
    Ok((4.0 * coeffs.a + 4.0 * omega_plus * omega_plus * coeffs.b) / det)
}

/// The probe-optimized floor of Tr J^{-1}:
/// 1/t^2 + Omega_plus^2 / (4 sin^2(Omega_plus t / 2)).
///
/// The Omega_plus = 0 limit is finite, 2/t^2. At a revival time of a
/// nonzero Omega_plus every probe is blind to the mixing angle and the
/// floor diverges, reported as an error.
pub fn min_trace_inverse(omega_plus: f64, t: f64) -> Result<f64> {
    if t <= 0.0 || !t.is_finite() {
        return Err(RabiError::InvalidArgument {
            name: "t",
            message: "evolution time must be positive and finite".into(),
        });
    }
    if omega_plus == 0.0 {
        return Ok(2.0 / (t * t));
    }
    let half_sin = (0.5 * omega_plus * t).sin();
    if half_sin.abs() < tol::SINGULAR_TIME_SIN && omega_plus * t > 1.0 {
        return Err(RabiError::SingularTime {
            value: half_sin.abs(),
            tolerance: tol::SINGULAR_TIME_SIN,
        });
    }
    Ok(1.0 / (t * t) + omega_plus * omega_plus / (4.0 * half_sin * half_sin))
}

/// The probe that attains the floor: an equal-weight superposition of the
/// two bright states with phases locked to P,
/// (P*/(sqrt2 |P|)) |phi_+> + (P/(sqrt2 |P|)) |phi_->.
pub fn optimal_probe_coefficients(omega_plus: f64, t: f64) -> Result<ProbeCoefficients> {
    let p = C64::from_polar(1.0, -omega_plus * t) - C64::new(1.0, 0.0);
    let pabs = p.norm();
    if (0.5 * omega_plus * t).sin().abs() < tol::SINGULAR_TIME_SIN {
        return Err(RabiError::SingularTime {
            value: (0.5 * omega_plus * t).sin().abs(),
            tolerance: tol::SINGULAR_TIME_SIN,
        });
    }
    let inv = 1.0 / (std::f64::consts::SQRT_2 * pabs);
    ProbeCoefficients::new(0.0, p.conj() * inv, p * inv)
}

/// The optimal probe as a lab-frame state vector.
pub fn optimal_probe_state(params: &RabiParameters, t: f64) -> Result<QuantumState> {
    let eig = ThreeLevelEigensystem::new(params)?;
    optimal_probe_coefficients(params.omega_plus(), t)?.to_state(&eig)
}

/// A projective measurement that saturates the matrix bound.
#[derive(Debug, Clone)]
pub struct OptimalPovm {
    pub povm: Povm,
    /// True when a derivative direction collapsed onto the span of earlier
    /// vectors and its projector was dropped.
    pub reduced: bool,
}

/// Builds the saturating measurement from any derivative set: orthonormalize
/// {psi, d_1 psi, d_2 psi}, project onto each survivor, and add the
/// complement of their span if it is nontrivial.
pub fn saturating_povm(derivs: &StateDerivatives) -> Result<OptimalPovm> {
    let dim = derivs.base.dim();
    let mut raw = vec![derivs.base.amplitudes().clone()];
    raw.extend(derivs.partials.iter().cloned());
    let (gammas, reduced) = match orthonormalize(&raw) {
        Ok(v) => (v, false),
        Err(RabiError::RankDeficient { index, .. }) => {
            // Drop the collapsed direction and orthonormalize the rest.
            let mut pruned = raw.clone();
            pruned.remove(index);
            (orthonormalize(&pruned)?, true)
        }
        Err(e) => return Err(e),
    };
    let mut elements: Vec<ComplexMatrix> =
        gammas.iter().map(|g| ComplexMatrix::outer(g, g)).collect();
    let mut sum = ComplexMatrix::zeros(dim);
    for e in &elements {
        sum = sum.add(e);
    }
    let remainder = ComplexMatrix::identity(dim).sub(&sum);
    if remainder.max_abs() > 1e-12 {
        elements.push(remainder);
    }
    Ok(OptimalPovm {
        povm: Povm::new(elements)?,
        reduced,
    })
}

/// The saturating measurement at the optimal probe for given parameters.
pub fn optimal_povm(params: &RabiParameters, t: f64) -> Result<OptimalPovm> {
    let probe = optimal_probe_coefficients(params.omega_plus(), t)?;
    let derivs = state_derivatives_analytic(params, t, &probe)?;
    saturating_povm(&derivs)
}

/// Single-parameter information 4 t^2 (<G_i^2> - <G_i>^2) for a commuting
/// family H = Omega_i G_i (the separate-estimation scenario with the other
/// frequencies known to vanish).
pub fn qfi_single(model: &RabiModel, index: usize, probe: &QuantumState, t: f64) -> Result<f64> {
    let g = model.generator(index)?;
    if probe.dim() != g.dim() {
        return Err(RabiError::DimensionMismatch {
            context: "single-parameter information",
            expected: g.dim(),
            actual: probe.dim(),
        });
    }
    let g_psi = g.apply(probe.amplitudes());
    let mean: f64 = probe
        .amplitudes()
        .iter()
        .zip(g_psi.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    let second: f64 = g_psi.iter().map(|z| z.norm_sqr()).sum();
    Ok(4.0 * t * t * (second - mean * mean))
}

/// The variance-maximizing probe for one generator: an equal superposition
/// of its extremal eigenvectors.
pub fn single_optimal_probe(model: &RabiModel, index: usize) -> Result<QuantumState> {
    let g = model.generator(index)?;
    let eig = hermitian_eig(&g)?;
    let n = eig.eigenvalues.len();
    let lambda_min = eig.eigenvalues[0];
    let lambda_max = eig.eigenvalues[n - 1];
    let gap = 1e-12 * (lambda_max - lambda_min).abs().max(1.0);
    let min_mult = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l - lambda_min < gap)
        .count();
    let max_mult = eig
        .eigenvalues
        .iter()
        .filter(|&&l| lambda_max - l < gap)
        .count();
    if min_mult > 1 || max_mult > 1 {
        return Err(RabiError::DegenerateExtremal {
            multiplicity: min_mult.max(max_mult),
        });
    }
    let lo = eig.eigenvectors[0].amplitudes();
    let hi = eig.eigenvectors[n - 1].amplitudes();
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    QuantumState::new((lo + hi).mapv(|z| z * inv_sqrt2))
}

/// Joint-estimation cost per parameter slot: with l parameters sharing
/// l * probes copies, the floor is Tr J^{-1}_min / (l * probes). Errors at
/// revival times where the floor diverges.
pub fn joint_bound(omega_plus: f64, t: f64, probes: usize) -> Result<f64> {
    check_probes(probes)?;
    Ok(min_trace_inverse(omega_plus, t)? / (2.0 * probes as f64))
}

/// Separate-estimation cost for the frequency pair: each parameter consumes
/// `probes` copies at single-parameter information t^2, totalling 2/(m t^2).
pub fn separate_bound(probes: usize, t: f64) -> Result<f64> {
    separate_bound_multi(2, probes, t)
}

/// Separate-estimation cost for l parameters: l / (m t^2).
pub fn separate_bound_multi(l: usize, probes: usize, t: f64) -> Result<f64> {
    check_probes(probes)?;
    Ok(l as f64 / (probes as f64 * t * t))
}

/// Total-variance cost of the control-assisted joint scheme under a control
/// mismatch of Euclidean size `mismatch`:
///
/// ```text
/// 1/(2 m t^2) + mismatch^2 / (8 m sin^2(mismatch * t / 2)),
/// ```
///
/// with the exact mismatch = 0 limit 1/(m t^2). Returns infinity at revival
/// times of the mismatch itself.
pub fn controlled_bound(probes: usize, t: f64, mismatch: f64) -> Result<f64> {
    check_probes(probes)?;
    let m = probes as f64;
    if mismatch == 0.0 {
        return Ok(1.0 / (m * t * t));
    }
    let s = (0.5 * mismatch * t).sin();
    Ok(1.0 / (2.0 * m * t * t) + mismatch * mismatch / (8.0 * m * s * s))
}

/// Small-mismatch expansion of [`controlled_bound`]:
/// 1/(m t^2) + mismatch^2 / (24 m).
pub fn controlled_bound_quadratic(probes: usize, t: f64, mismatch: f64) -> Result<f64> {
    check_probes(probes)?;
    let m = probes as f64;
    Ok(1.0 / (m * t * t) + mismatch * mismatch / (24.0 * m))
}

/// Tabulates the attainable inverse total variance of the control-assisted
/// scheme against the control mismatch: each requested offset is paired with
/// 1/[`controlled_bound`] at that mismatch (zero where the bound diverges).
pub fn robustness_curve(
    omega_plus_offsets: &[f64],
    t: f64,
    probes: usize,
) -> Result<Vec<(f64, f64)>> {
    check_probes(probes)?;
    let mut curve = Vec::with_capacity(omega_plus_offsets.len());
    for &offset in omega_plus_offsets {
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(RabiError::InvalidArgument {
                name: "omega_plus_offsets",
                message: format!("offsets must be finite and nonnegative, got {offset}"),
            });
        }
        let bound = controlled_bound(probes, t, offset)?;
        let inverse = if bound.is_finite() && bound > 0.0 {
            1.0 / bound
        } else {
            0.0
        };
        curve.push((offset, inverse));
    }
    Ok(curve)
}

fn check_probes(probes: usize) -> Result<()> {
    if probes == 0 {
        return Err(RabiError::InvalidArgument {
            name: "probes",
            message: "at least one probe copy is required".into(),
        });
    }
    Ok(())
}

/// Which scheme wins at a given setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    JointFavored,
    SeparateFavored,
}

/// Side-by-side costs of the three schemes at one operating point.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub joint: f64,
    pub separate: f64,
    pub controlled: f64,
    pub regime: Regime,
}

/// Evaluates all three bounds; a revival time makes the joint cost infinite
/// rather than an error so tabulation can continue across it.
pub fn bound_report(omega_plus: f64, t: f64, probes: usize, mismatch: f64) -> Result<BoundReport> {
    check_probes(probes)?;
    let joint = match joint_bound(omega_plus, t, probes) {
        Ok(v) => v,
        Err(RabiError::SingularTime { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let separate = separate_bound(probes, t)?;
    let controlled = controlled_bound(probes, t, mismatch)?;
    let regime = if joint < separate {
        Regime::JointFavored
    } else {
        Regime::SeparateFavored
    };
    Ok(BoundReport {
        joint,
        separate,
        controlled,
        regime,
    })
}

/// Costs of the control-assisted star protocol with l spokes: joint
/// 1/(m t^2) against separate l/(m t^2) — an l-fold gap.
#[derive(Debug, Clone, Copy)]
pub struct MultilevelBounds {
    pub joint: f64,
    pub separate: f64,
    pub ratio: f64,
}

pub fn multilevel_bounds(spokes: usize, probes: usize, t: f64) -> Result<MultilevelBounds> {
    check_probes(probes)?;
    if spokes < 2 {
        return Err(RabiError::InvalidArgument {
            name: "spokes",
            message: "the star model needs at least two spokes".into(),
        });
    }
    let joint = spokes as f64 / (t * t) / (spokes as f64 * probes as f64);
    let separate = separate_bound_multi(spokes, probes, t)?;
    Ok(MultilevelBounds {
        joint,
        separate,
        ratio: separate / joint,
    })
}

/// The phase x* > 0 where joint and separate costs cross, the root of
/// x = 2 sqrt3 sin(x/2) in [pi, 4], found by bisection.
pub fn crossover_phase() -> f64 {
    let f = |x: f64| x - 2.0 * 3.0f64.sqrt() * (0.5 * x).sin();
    let (mut lo, mut hi) = (std::f64::consts::PI, 4.0);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > tol::CROSSOVER_BISECTION_ABS {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The evolution time at which the two schemes cross for a given
/// Omega_plus: t* = x*/Omega_plus.
pub fn crossover_time(omega_plus: f64) -> Result<f64> {
    if omega_plus <= 0.0 || !omega_plus.is_finite() {
        return Err(RabiError::InvalidArgument {
            name: "omega_plus",
            message: "crossover time needs a positive eigenfrequency".into(),
        });
    }
    Ok(crossover_phase() / omega_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::rng::RngStream;
    use crate::qfim::{cfi_from_povm, qfim_pure};

    #[test]
    fn mixture_identities_hold_for_random_probes() {
        let mut rng = RngStream::from_seed(101);
        for _ in 0..50 {
            let probe = ProbeCoefficients::random(&mut rng);
            let pmn = pmn_coefficients(0.73, 4.1, &probe);
            let p2 = pmn.p.norm_sqr();
            let re_mn = (pmn.m * pmn.n.conj()).re;
            let imbalance = probe.c_plus.norm_sqr() - probe.c_minus.norm_sqr();
            assert!((re_mn - p2 * imbalance).abs() < 1e-13);
            let weight = pmn.m.norm_sqr() + pmn.n.norm_sqr();
            let expected = 2.0 * p2 * (1.0 - probe.c_zero * probe.c_zero);
            assert!((weight - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_matrix_matches_derivative_engine() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let mut rng = RngStream::from_seed(53);
        for _ in 0..10 {
            let probe = ProbeCoefficients::random(&mut rng);
            let closed = qfim_closed_form(&params, 5.0, &probe).unwrap();
            let derivs = state_derivatives_analytic(&params, 5.0, &probe).unwrap();
            let engine = qfim_pure(&derivs).unwrap();
            let scale = engine.matrix.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (closed.matrix[(i, j)] - engine.matrix[(i, j)]).abs() < 1e-10 * scale,
                        "entry ({i},{j}) disagrees"
                    );
                }
            }
        }
    }

    #[test]
    fn trace_formula_matches_matrix_inverse() {
        let params = RabiParameters::pair(-0.8, 0.45).unwrap();
        let mut rng = RngStream::from_seed(59);
        for _ in 0..10 {
            let probe = ProbeCoefficients::random(&mut rng);
            let direct = trace_inverse_closed_form(&params, 3.7, &probe);
            let derivs = state_derivatives_analytic(&params, 3.7, &probe).unwrap();
            let engine = qfim_pure(&derivs).unwrap();
            match direct {
                Ok(v) => {
                    let reference = engine.trace_inverse().unwrap();
                    assert!((v - reference).abs() < 1e-9 * reference.abs());
                }
                Err(RabiError::SingularQfim { .. }) => assert!(engine.singular),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn floor_values_are_pinned() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let floor = min_trace_inverse(params.omega_plus(), 5.0).unwrap();
        assert!((floor - 0.094_633_749_538_994_99).abs() < 1e-15);
        assert!((min_trace_inverse(0.1, 5.0).unwrap() - 0.080_843_854_251_568_31).abs() < 1e-15);
        let t_quarter = 0.5 * std::f64::consts::PI / 0.1;
        assert!(
            (min_trace_inverse(0.1, t_quarter).unwrap() - 0.009_052_847_345_693_513).abs() < 1e-15
        );
        assert!((min_trace_inverse(0.0, 5.0).unwrap() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn optimal_probe_attains_the_floor_and_no_probe_beats_it() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let omega_plus = params.omega_plus();
        let t = 5.0;
        let floor = min_trace_inverse(omega_plus, t).unwrap();
        let best = optimal_probe_coefficients(omega_plus, t).unwrap();
        let attained = trace_inverse_closed_form(&params, t, &best).unwrap();
        assert!((attained - floor).abs() < 1e-12 * floor);
        let coeffs = abc_coefficients(omega_plus, t, &best).unwrap();
        let p2 = pmn_coefficients(omega_plus, t, &best).p.norm_sqr();
        assert!((coeffs.a - 4.0 * p2).abs() < 1e-12);
        assert!((coeffs.b - 4.0 * t * t).abs() < 1e-10);
        assert!(coeffs.c.abs() < 1e-12);
        let mut rng = RngStream::from_seed(67);
        for _ in 0..200 {
            let probe = ProbeCoefficients::random(&mut rng);
            match trace_inverse_closed_form(&params, t, &probe) {
                Ok(v) => assert!(v >= floor - 1e-12 * floor),
                Err(RabiError::SingularQfim { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn dark_probe_is_singular() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let dark = ProbeCoefficients::new(1.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let coeffs = abc_coefficients(params.omega_plus(), 5.0, &dark).unwrap();
        let p2 = pmn_coefficients(params.omega_plus(), 5.0, &dark)
            .p
            .norm_sqr();
        assert!((coeffs.a - 4.0 * p2).abs() < 1e-14);
        assert!(coeffs.b.abs() < 1e-12);
        assert!(coeffs.c.abs() < 1e-14);
        assert!(matches!(
            trace_inverse_closed_form(&params, 5.0, &dark),
            Err(RabiError::SingularQfim { .. })
        ));
    }

    #[test]
    fn saturating_measurement_reaches_the_quantum_matrix() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let t = 5.0;
        let probe = optimal_probe_coefficients(params.omega_plus(), t).unwrap();
        let derivs = state_derivatives_analytic(&params, t, &probe).unwrap();
        let quantum = qfim_pure(&derivs).unwrap();
        let measurement = optimal_povm(&params, t).unwrap();
        assert!(!measurement.reduced);
        let classical = cfi_from_povm(&derivs, &measurement.povm).unwrap();
        assert!(classical.dropped_outcomes.is_empty());
        let scale = quantum.matrix.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (classical.matrix[(i, j)] - quantum.matrix[(i, j)]).abs() < 1e-9 * scale,
                    "classical != quantum at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn scheme_bounds_are_pinned() {
        assert!((joint_bound(0.1, 5.0, 1).unwrap() - 0.040_421_927_125_784_16).abs() < 1e-15);
        assert!((joint_bound(0.1, 50.0, 1).unwrap() - 0.003_689_973_514_265_259_3).abs() < 1e-15);
        assert!((separate_bound(1, 5.0).unwrap() - 0.08).abs() < 1e-15);
        let t_pi_half = 0.5 * std::f64::consts::PI / 0.1;
        assert!((t_pi_half - 15.707_963_267_948_966).abs() < 1e-12);
        assert!(
            (joint_bound(0.1, t_pi_half, 1).unwrap() - 0.004_526_423_672_846_756_5).abs() < 1e-15
        );
        assert!((separate_bound(1, t_pi_half).unwrap() - 0.008_105_694_691_387_022).abs() < 1e-15);
    }

    #[test]
    fn controlled_bound_is_pinned_and_bracketed() {
        let exact = controlled_bound(1, 5.0, 0.3).unwrap();
        assert!((exact - 0.044_212_741_584_382_44).abs() < 1e-15);
        assert!((controlled_bound(1, 5.0, 0.0).unwrap() - 0.04).abs() < 1e-16);
        let quad = controlled_bound_quadratic(1, 5.0, 0.3).unwrap();
        assert!((quad - 0.043_75).abs() < 1e-15);
        let residual = exact - quad;
        assert!(residual > 0.0);
        let leading = 0.3f64.powi(4) * 25.0 / 480.0;
        assert!(
            residual <= 1.5 * leading,
            "residual {residual} vs {leading}"
        );
        // The exact curve sits above the quadratic model everywhere.
        for k in 1..40 {
            let d = 0.05 * k as f64;
            let e = controlled_bound(1, 5.0, d).unwrap();
            let q = controlled_bound_quadratic(1, 5.0, d).unwrap();
            assert!(e >= q - 1e-12);
        }
    }

    #[test]
    fn crossover_matches_equation_and_orders_regimes() {
        let x = crossover_phase();
        assert!((x - 2.0 * 3.0f64.sqrt() * (0.5 * x).sin()).abs() < 1e-9);
        assert!((x - 3.428_515_149_802_965_6).abs() < 1e-9);
        let t_star = crossover_time(0.1).unwrap();
        assert!((t_star - 34.285_151_498_029_656).abs() < 1e-8);
        let at_star = bound_report(0.1, t_star, 1, 0.0).unwrap();
        assert!((at_star.joint - at_star.separate).abs() < 1e-8 * at_star.separate);
        let before = bound_report(0.1, 5.0, 1, 0.0).unwrap();
        assert_eq!(before.regime, Regime::JointFavored);
        let after = bound_report(0.1, 50.0, 1, 0.0).unwrap();
        assert_eq!(after.regime, Regime::SeparateFavored);
    }

    #[test]
    fn robustness_curve_is_even_and_decays_from_the_exact_limit() {
        let offsets = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let curve = robustness_curve(&offsets, 5.0, 1).unwrap();
        assert_eq!(curve.len(), offsets.len());
        assert!((curve[0].1 - 25.0).abs() < 1e-12);
        assert!((curve[3].1 - 22.617_914_297_204_24).abs() < 1e-9);
        for pair in curve.windows(2) {
            assert!(
                pair[1].1 < pair[0].1,
                "inverse variance should decrease with mismatch below pi/t"
            );
        }
        // The underlying bound depends on the mismatch only through its
        // square, so the curve is even in the offset.
        for &d in &offsets[1..] {
            let plus = controlled_bound(1, 5.0, d).unwrap();
            let minus = controlled_bound(1, 5.0, -d).unwrap();
            assert_eq!(plus, minus);
        }
        assert!(robustness_curve(&[-0.1], 5.0, 1).is_err());
        assert!(robustness_curve(&[f64::NAN], 5.0, 1).is_err());
    }

    #[test]
    fn star_gap_scales_with_spoke_count() {
        for spokes in 2..=8 {
            let b = multilevel_bounds(spokes, 3, 4.0).unwrap();
            assert!((b.ratio - spokes as f64).abs() < 1e-12);
            assert!((b.joint - 1.0 / (3.0 * 16.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_parameter_probe_maximizes_generator_variance() {
        let model = RabiModel::ThreeLevel;
        for index in 0..2 {
            let probe = single_optimal_probe(&model, index).unwrap();
            let info = qfi_single(&model, index, &probe, 5.0).unwrap();
            assert!((info - 25.0).abs() < 1e-10, "max information is t^2");
        }
        let basis_probe = QuantumState::basis(3, 1);
        let info = qfi_single(&model, 0, &basis_probe, 5.0).unwrap();
        assert!(info <= 25.0 + 1e-10);
    }
}
