//! Built-in consistency suites.
//!
//! Every suite cross-checks two independent routes to the same quantity —
//! closed forms against the derivative engine, algebraic identities against
//! direct evaluation, sampled frequencies against exact probabilities — so a
//! regression in either route shows up as a disagreement. Suites draw their
//! own seeded randomness and are fully deterministic.

use ndarray::Array2;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adaptive::{
    adaptive_run, controlled_evolution, controlled_evolution_limit, AdaptiveConfig,
};
use crate::closed_form::{
    abc_coefficients, min_trace_inverse, optimal_povm, optimal_probe_coefficients,
    pmn_coefficients, qfim_closed_form, trace_inverse_closed_form,
};
use crate::error::Result;
use crate::models::{
    ParameterJacobian, ProbeCoefficients, RabiModel, RabiParameters, ThreeLevelEigensystem,
};
use crate::qcore::eig::evolve;
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::povm::Povm;
use crate::qcore::rng::RngStream;
use crate::qcore::state::QuantumState;
use crate::qfim::{cfi_from_povm, qfim_pure, state_derivatives_analytic};
use crate::tol;
use num_complex::Complex64 as C64;

/// Result of one named suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn from_run(name: &'static str, run: Result<(bool, String)>) -> Self {
        match run {
            Ok((passed, detail)) => Self {
                name,
                passed,
                detail,
            },
            Err(e) => Self {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

/// Runs every suite; `quick` trims iteration counts and skips the slow
/// statistical consistency run.
pub fn run_all(quick: bool) -> Vec<SuiteOutcome> {
    let mut outcomes = vec![
        SuiteOutcome::from_run("norm_preservation", norm_preservation(quick)),
        SuiteOutcome::from_run("povm_validity", povm_validity(quick)),
        SuiteOutcome::from_run("jacobian_identities", jacobian_identities(quick)),
        SuiteOutcome::from_run("pmn_identity", pmn_identity(quick)),
        SuiteOutcome::from_run("abc_inequalities", abc_inequalities(quick)),
        SuiteOutcome::from_run("reparameterization", reparameterization(quick)),
        SuiteOutcome::from_run("closed_form_vs_engine", closed_form_vs_engine(quick)),
        SuiteOutcome::from_run("random_probe_optimality", random_probe_optimality(quick)),
        SuiteOutcome::from_run("povm_saturation", povm_saturation(quick)),
        SuiteOutcome::from_run("trotter_convergence", trotter_convergence(quick)),
        SuiteOutcome::from_run("weak_commutation", weak_commutation(quick)),
        SuiteOutcome::from_run("singular_localization", singular_localization()),
        SuiteOutcome::from_run("born_sampling", born_sampling(quick)),
        SuiteOutcome::from_run("determinism", determinism()),
    ];
    if !quick {
        outcomes.push(SuiteOutcome::from_run("mle_consistency", mle_consistency()));
    }
    outcomes
}

pub fn all_passed(outcomes: &[SuiteOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

fn iterations(quick: bool, quick_n: usize, full_n: usize) -> usize {
    if quick {
        quick_n
    } else {
        full_n
    }
}

/// Random pair with the degenerate origin excluded.
fn random_pair(rng: &mut RngStream) -> Result<RabiParameters> {
    loop {
        let p = RabiParameters::pair(rng.uniform_in(-1.5, 1.5), rng.uniform_in(-1.5, 1.5))?;
        if p.omega_plus() > 0.05 {
            return Ok(p);
        }
    }
}

/// Random time bounded away from revivals of the given gap.
fn random_regular_time(rng: &mut RngStream, omega_plus: f64) -> f64 {
    loop {
        let t = rng.uniform_in(0.3, 6.0);
        if (0.5 * omega_plus * t).sin().abs() > 0.05 {
            return t;
        }
    }
}

fn random_dark_free_probe(rng: &mut RngStream) -> Result<ProbeCoefficients> {
    let raw = [
        C64::new(rng.normal(), rng.normal()),
        C64::new(rng.normal(), rng.normal()),
    ];
    let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
    ProbeCoefficients::new(0.0, raw[0] / norm, raw[1] / norm)
}

fn norm_preservation(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(11);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 8, 40) {
        let dim = 2 + (rng.uniform() * 4.0) as usize;
        let mut upper = Array2::<C64>::zeros((dim, dim));
        for i in 0..dim {
            upper[(i, i)] = C64::new(rng.normal(), 0.0);
            for j in i + 1..dim {
                upper[(i, j)] = C64::new(rng.normal(), rng.normal());
            }
        }
        let upper = ComplexMatrix::from_array(upper)?;
        let h = upper.add(&upper.adjoint());
        let psi = {
            let amps =
                ndarray::Array1::from_shape_fn(dim, |_| C64::new(rng.normal(), rng.normal()));
            QuantumState::from_unnormalized(amps)?
        };
        let t = rng.uniform_in(0.1, 8.0);
        let out = evolve(&h, t, &psi)?;
        let drift = (crate::qcore::state::vec_norm(out.amplitudes()) - 1.0).abs();
        worst = worst.max(drift);
    }
    let ok = worst < tol::NORM_PRESERVATION_ABS;
    Ok((ok, format!("max norm drift {worst:.3e}")))
}

fn povm_validity(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(13);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 4, 16) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        // Construction itself validates positivity and completeness.
        let opt = optimal_povm(&params, t)?;
        let probe =
            ProbeCoefficients::random(&mut rng).to_state(&ThreeLevelEigensystem::new(&params)?)?;
        let probs = opt.povm.probabilities(&probe)?;
        let sum_dev = (probs.iter().sum::<f64>() - 1.0).abs();
        worst = worst.max(sum_dev);
    }
    for dim in 2..=6 {
        let povm = Povm::computational(dim);
        let psi = QuantumState::basis(dim, dim - 1);
        let probs = povm.probabilities(&psi)?;
        worst = worst.max((probs.iter().sum::<f64>() - 1.0).abs());
    }
    let ok = worst < tol::PROB_SUM_ABS;
    Ok((ok, format!("max probability-sum deviation {worst:.3e}")))
}

fn jacobian_identities(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(17);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 20, 200) {
        let params = random_pair(&mut rng)?;
        let jac = ParameterJacobian::new(&params)?;
        let w = params.omega_plus();
        let theta_norm: f64 = jac.d_theta.iter().map(|x| x * x).sum();
        let gap_norm: f64 = jac.d_omega_plus.iter().map(|x| x * x).sum();
        let cross: f64 = jac
            .d_theta
            .iter()
            .zip(&jac.d_omega_plus)
            .map(|(a, b)| a * b)
            .sum();
        worst = worst.max((theta_norm - 1.0 / (4.0 * w * w)).abs() * 4.0 * w * w);
        worst = worst.max((gap_norm - 0.25).abs() * 4.0);
        worst = worst.max(cross.abs() * 4.0 * w);
        worst = worst.max((jac.wronskian() - 1.0 / (4.0 * w)).abs() * 4.0 * w);
    }
    let ok = worst < 1e-12;
    Ok((ok, format!("max relative identity residual {worst:.3e}")))
}

fn pmn_identity(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(19);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 20, 200) {
        let params = random_pair(&mut rng)?;
        let t = rng.uniform_in(0.1, 8.0);
        let probe = ProbeCoefficients::random(&mut rng);
        let pmn = pmn_coefficients(params.omega_plus(), t, &probe);
        let p2 = pmn.p.norm_sqr();
        let imbalance = probe.c_plus.norm_sqr() - probe.c_minus.norm_sqr();
        let r1 = ((pmn.m * pmn.n.conj()).re - p2 * imbalance).abs();
        let r2 = (pmn.m.norm_sqr() + pmn.n.norm_sqr()
            - 2.0 * p2 * (1.0 - probe.c_zero * probe.c_zero))
            .abs();
        worst = worst.max(r1).max(r2);
    }
    let ok = worst < 1e-12;
    Ok((ok, format!("max mixture identity residual {worst:.3e}")))
}

fn abc_inequalities(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(23);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 20, 200) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        let probe = ProbeCoefficients::random(&mut rng);
        let coeffs = abc_coefficients(params.omega_plus(), t, &probe)?;
        let scale = coeffs.a.abs().max(coeffs.b.abs()).max(1.0);
        worst = worst.max((-coeffs.a).max(0.0) / scale);
        worst = worst.max((-coeffs.b).max(0.0) / scale);
        let det = coeffs.a * coeffs.b - coeffs.c * coeffs.c;
        worst = worst.max((-det).max(0.0) / (scale * scale));
    }
    let ok = worst < 1e-10;
    Ok((ok, format!("max positivity violation {worst:.3e}")))
}

/// Independent assembly of the information matrix from the mixture scalars
/// and the reparameterization Jacobian; `c_sign` exists so a test can prove
/// this suite catches a flipped cross term.
fn mixture_assembly_residual(quick: bool, c_sign: f64) -> Result<f64> {
    let mut rng = RngStream::from_seed(29);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 10, 60) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        let probe = ProbeCoefficients::random(&mut rng);
        let coeffs = abc_coefficients(params.omega_plus(), t, &probe)?;
        let jac = ParameterJacobian::new(&params)?;
        let mut assembled = Array2::<f64>::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                assembled[(i, j)] = coeffs.a * jac.d_theta[i] * jac.d_theta[j]
                    + coeffs.b * jac.d_omega_plus[i] * jac.d_omega_plus[j]
                    + c_sign
                        * coeffs.c
                        * (jac.d_theta[i] * jac.d_omega_plus[j]
                            + jac.d_theta[j] * jac.d_omega_plus[i]);
            }
        }
        let reference = qfim_closed_form(&params, t, &probe)?;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((assembled[(i, j)] - reference.matrix[(i, j)]).abs());
            }
        }
    }
    Ok(worst)
}

fn reparameterization(quick: bool) -> Result<(bool, String)> {
    let worst = mixture_assembly_residual(quick, 1.0)?;
    let ok = worst < 1e-10;
    Ok((ok, format!("max assembly mismatch {worst:.3e}")))
}

fn closed_form_vs_engine(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(31);
    let mut worst_matrix = 0.0f64;
    let mut worst_trace = 0.0f64;
    for _ in 0..iterations(quick, 8, 50) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        let probe = ProbeCoefficients::random(&mut rng);
        let closed = qfim_closed_form(&params, t, &probe)?;
        let derivs = state_derivatives_analytic(&params, t, &probe)?;
        let engine = qfim_pure(&derivs)?;
        for i in 0..2 {
            for j in 0..2 {
                worst_matrix =
                    worst_matrix.max((closed.matrix[(i, j)] - engine.matrix[(i, j)]).abs());
            }
        }
        if let (Ok(ct), Ok(et)) = (
            trace_inverse_closed_form(&params, t, &probe),
            engine.trace_inverse(),
        ) {
            worst_trace = worst_trace.max((ct - et).abs() / et.abs().max(1.0));
        }
    }
    let ok = worst_matrix < 1e-9 && worst_trace < 1e-8;
    Ok((
        ok,
        format!("max matrix gap {worst_matrix:.3e}, max trace gap {worst_trace:.3e}"),
    ))
}

fn random_probe_optimality(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(37);
    let mut worst_violation = 0.0f64;
    let mut worst_attain = 0.0f64;
    for _ in 0..iterations(quick, 5, 25) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        let floor = min_trace_inverse(params.omega_plus(), t)?;
        for _ in 0..iterations(quick, 10, 40) {
            let probe = ProbeCoefficients::random(&mut rng);
            if let Ok(cost) = trace_inverse_closed_form(&params, t, &probe) {
                worst_violation = worst_violation.max((floor - cost) / floor);
            }
        }
        let best = optimal_probe_coefficients(params.omega_plus(), t)?;
        let attained = trace_inverse_closed_form(&params, t, &best)?;
        worst_attain = worst_attain.max((attained - floor).abs() / floor);
    }
    let ok = worst_violation < 1e-9 && worst_attain < 1e-10;
    Ok((
        ok,
        format!("max floor violation {worst_violation:.3e}, optimal-probe gap {worst_attain:.3e}"),
    ))
}

fn povm_saturation(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(41);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 4, 20) {
        let params = random_pair(&mut rng)?;
        let t = random_regular_time(&mut rng, params.omega_plus());
        let probe = optimal_probe_coefficients(params.omega_plus(), t)?;
        let derivs = state_derivatives_analytic(&params, t, &probe)?;
        let quantum = qfim_pure(&derivs)?;
        let povm = optimal_povm(&params, t)?;
        let classical = cfi_from_povm(&derivs, &povm.povm)?;
        if !classical.dropped_outcomes.is_empty() {
            return Ok((
                false,
                format!("dropped outcomes {:?}", classical.dropped_outcomes),
            ));
        }
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((classical.matrix[(i, j)] - quantum.matrix[(i, j)]).abs());
            }
        }
    }
    let ok = worst < 1e-8;
    Ok((ok, format!("max classical/quantum gap {worst:.3e}")))
}

fn trotter_convergence(quick: bool) -> Result<(bool, String)> {
    let model = RabiModel::ThreeLevel;
    let omega = RabiParameters::pair(0.3, 0.7)?;
    let control = RabiParameters::pair(0.25, 0.65)?;
    let t = 5.0;
    let limit = controlled_evolution_limit(&model, &omega, &control, t)?;
    let counts: &[usize] = if quick {
        &[100, 200, 400]
    } else {
        &[250, 500, 1000, 2000]
    };
    let (lo, hi) = if quick { (1.5, 2.5) } else { (1.6, 2.4) };
    let mut errs = Vec::new();
    for &n in counts {
        let u = controlled_evolution(&model, &omega, &control, t, n)?;
        errs.push(u.sub(&limit).max_abs());
    }
    let mut detail = String::new();
    let mut ok = true;
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        ok &= ratio > lo && ratio < hi;
        detail.push_str(&format!("{ratio:.3} "));
    }
    Ok((ok, format!("halving ratios {}", detail.trim_end())))
}

fn weak_commutation(quick: bool) -> Result<(bool, String)> {
    let mut rng = RngStream::from_seed(43);
    let mut worst = 0.0f64;
    for _ in 0..iterations(quick, 10, 60) {
        let params = random_pair(&mut rng)?;
        let t = rng.uniform_in(0.1, 8.0);
        let probe = random_dark_free_probe(&mut rng)?;
        let derivs = state_derivatives_analytic(&params, t, &probe)?;
        let result = qfim_pure(&derivs)?;
        worst = worst.max(result.commutation_residual);
    }
    let ok = worst < 1e-10;
    Ok((
        ok,
        format!("max commutation residual over dark-free probes {worst:.3e}"),
    ))
}

fn singular_localization() -> Result<(bool, String)> {
    let params = RabiParameters::pair(3.0, 4.0)?;
    let revival = 2.0 * std::f64::consts::PI / params.omega_plus();
    let probe = ProbeCoefficients::middle_level();
    let flag_at = |t: f64| -> Result<bool> {
        let derivs = state_derivatives_analytic(&params, t, &probe)?;
        Ok(qfim_pure(&derivs)?.singular)
    };
    let near = flag_at(revival * (1.0 - 1e-7))?;
    let far = flag_at(revival * (1.0 - 1e-3))?;
    let ok = near && !far;
    Ok((
        ok,
        format!("flagged at 1e-7 offset: {near}, flagged at 1e-3 offset: {far}"),
    ))
}

fn born_sampling(quick: bool) -> Result<(bool, String)> {
    let params = RabiParameters::pair(0.3, 0.7)?;
    let model = RabiModel::ThreeLevel;
    let h = model.hamiltonian(&params)?;
    let probe = QuantumState::basis(3, 1);
    let psi = evolve(&h, 1.3, &probe)?;
    let povm = Povm::computational(3);
    let expected = povm.probabilities(&psi)?;
    let shots = if quick { 2000 } else { 6000 };
    let seeds = if quick { 6 } else { 20 };
    let chi = ChiSquared::new((expected.len() - 1) as f64).expect("valid dof");
    let mut min_p = 1.0f64;
    for seed in 0..seeds {
        let mut rng = RngStream::from_seed(100 + seed);
        let counts = povm.sample_counts(&psi, shots, &mut rng)?;
        let stat: f64 = counts
            .iter()
            .zip(&expected)
            .map(|(&c, &p)| {
                let e = p * shots as f64;
                (c as f64 - e) * (c as f64 - e) / e
            })
            .sum();
        min_p = min_p.min(1.0 - chi.cdf(stat));
    }
    let ok = min_p > 0.001;
    Ok((ok, format!("min chi-square p-value {min_p:.4}")))
}

fn determinism() -> Result<(bool, String)> {
    let mut cfg = AdaptiveConfig::new(
        RabiModel::ThreeLevel,
        RabiParameters::pair(0.3, 0.7)?,
        1.5,
        2,
        RabiParameters::pair(0.2, 0.6)?,
    );
    cfg.segments = 50;
    cfg.grid_points = 11;
    cfg.search_box = vec![(-1.0, 1.0), (-1.0, 1.0)];
    cfg.shots_per_round = 50;
    let a = adaptive_run(&cfg)?;
    let b = adaptive_run(&cfg)?;
    let identical = a
        .records
        .iter()
        .zip(&b.records)
        .all(|(x, y)| x.counts == y.counts)
        && a.estimates
            .iter()
            .zip(&b.estimates)
            .all(|(x, y)| x.omegas() == y.omegas());
    let mut other = cfg;
    other.seed = 99;
    let c = adaptive_run(&other)?;
    let differs = a
        .records
        .iter()
        .zip(&c.records)
        .any(|(x, y)| x.counts != y.counts);
    let ok = identical && differs;
    Ok((
        ok,
        format!("seed-repeat identical: {identical}, seed-change differs: {differs}"),
    ))
}

fn mle_consistency() -> Result<(bool, String)> {
    let mut cfg = AdaptiveConfig::new(
        RabiModel::ThreeLevel,
        RabiParameters::pair(0.3, 0.7)?,
        2.0,
        6,
        RabiParameters::pair(0.25, 0.65)?,
    );
    cfg.segments = 200;
    cfg.grid_points = 15;
    cfg.search_box = vec![(-1.0, 1.0), (-1.0, 1.0)];
    cfg.shots_per_round = 60;
    let trace = adaptive_run(&cfg)?;
    let last = trace.estimates.last().expect("rounds > 0");
    let e1 = (last.omega(0) - 0.3).abs();
    let e2 = (last.omega(1) - 0.7).abs();
    let ok = e1 < 0.08 && e2 < 0.08;
    Ok((ok, format!("final estimate errors ({e1:.4}, {e2:.4})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::eig::hermitian_eig;

    // ------------------------------------------------------------------
    // full sweep
    // ------------------------------------------------------------------

    #[test]
    fn quick_sweep_passes() {
        let outcomes = run_all(true);
        for o in &outcomes {
            assert!(o.passed, "suite {} failed: {}", o.name, o.detail);
        }
        assert!(all_passed(&outcomes));
        assert!(
            !outcomes.iter().any(|o| o.name == "mle_consistency"),
            "quick mode should skip the statistical consistency run"
        );
    }

    // ------------------------------------------------------------------
    // mutation guard
    // ------------------------------------------------------------------

    #[test]
    fn reparameterization_suite_catches_flipped_cross_term() {
        let healthy = mixture_assembly_residual(true, 1.0).unwrap();
        let mutated = mixture_assembly_residual(true, -1.0).unwrap();
        assert!(healthy < 1e-10, "healthy assembly residual {healthy}");
        assert!(
            mutated > 1e-3,
            "flipped cross term went unnoticed: {mutated}"
        );
    }

    #[test]
    fn eigensolver_feeds_suites_with_orthonormal_frames() {
        let params = RabiParameters::pair(0.3, 0.7).unwrap();
        let h = RabiModel::ThreeLevel.hamiltonian(&params).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        assert!(eig.gram_deviation() < 1e-12);
    }
}
