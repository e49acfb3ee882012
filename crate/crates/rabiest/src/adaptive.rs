//! Adaptive control-assisted estimation of the frequency vector.
//!
//! The protocol divides the evolution time into segments and chases each
//! free segment with the inverse evolution of the current estimate:
//!
//! ```text
//! U(omega; c) = [ e^{+i H(c) dt} e^{-i H(omega) dt} ]^segments.
//! ```
//!
//! When the control c matches the truth the product telescopes to the
//! identity exactly, and near the truth the output state carries maximal
//! joint information. Each round measures the output in the computational
//! basis, appends the counts to a cumulative likelihood, and re-estimates by
//! maximum likelihood over a grid followed by pattern refinement; the new
//! estimate becomes the next round's control.
//!
//! The likelihood of round r always uses round r's own control, so earlier
//! rounds' contributions never change and the grid scan can be maintained
//! incrementally. The incremental path and the from-scratch path
//! ([`mle_update_with_incumbent`]) share the same per-round arithmetic and
//! fold order, so they agree bit for bit.

use ndarray::Array1;

use crate::error::{RabiError, Result};
use crate::models::{RabiModel, RabiParameters};
use crate::qcore::eig::propagator;
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::povm::Povm;
use crate::qcore::rng::RngStream;
use crate::qcore::state::QuantumState;
use crate::qfim::{qfim_pure, state_derivatives_origin, QfimResult};
use crate::tol;

/// Settings of one adaptive estimation run.
#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    pub model: RabiModel,
    pub omega_true: RabiParameters,
    pub time: f64,
    pub segments: usize,
    pub shots_per_round: usize,
    pub rounds: usize,
    pub initial_guess: RabiParameters,
    /// Per-axis closed search interval for the likelihood maximizer.
    pub search_box: Vec<(f64, f64)>,
    /// Grid points per axis in the coarse scan.
    pub grid_points: usize,
    pub seed: u64,
}

impl AdaptiveConfig {
    /// Required fields plus the crate defaults: 1000 segments, 30 shots per
    /// round, an 81-point grid on [-2, 2] per axis, seed 7.
    pub fn new(
        model: RabiModel,
        omega_true: RabiParameters,
        time: f64,
        rounds: usize,
        initial_guess: RabiParameters,
    ) -> Self {
        let search_box = vec![(-2.0, 2.0); model.param_count()];
        Self {
            model,
            omega_true,
            time,
            segments: 1000,
            shots_per_round: 30,
            rounds,
            initial_guess,
            search_box,
            grid_points: 81,
            seed: 7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.model.param_count();
        if self.omega_true.len() != l || self.initial_guess.len() != l {
            return Err(RabiError::DimensionMismatch {
                context: "adaptive parameters",
                expected: l,
                actual: self.omega_true.len().max(self.initial_guess.len()),
            });
        }
        if self.search_box.len() != l {
            return Err(RabiError::DimensionMismatch {
                context: "search box",
                expected: l,
                actual: self.search_box.len(),
            });
        }
        for &(lo, hi) in &self.search_box {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(RabiError::InvalidArgument {
                    name: "search_box",
                    message: format!("invalid interval [{lo}, {hi}]"),
                });
            }
        }
        if !(self.time.is_finite() && self.time > 0.0) {
            return Err(RabiError::InvalidArgument {
                name: "time",
                message: "evolution time must be positive and finite".into(),
            });
        }
        if self.rounds == 0 || self.shots_per_round == 0 || self.segments == 0 {
            return Err(RabiError::InvalidArgument {
                name: "rounds/shots_per_round/segments",
                message: "counts must be at least one".into(),
            });
        }
        if self.grid_points < 2 {
            return Err(RabiError::InvalidArgument {
                name: "grid_points",
                message: "the scan needs at least two points per axis".into(),
            });
        }
        Ok(())
    }

    fn dt(&self) -> f64 {
        self.time / self.segments as f64
    }
}

/// Identifier of the measurement every round performs.
pub const COMPUTATIONAL_POVM_ID: &str = "computational";

/// One measurement round: the estimate whose inverse evolution served as the
/// control, the observed counts, and the measurement identifier.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    /// The estimate used to build this round's control.
    pub control_estimate: RabiParameters,
    /// Outcome counts of the computational-basis measurement; sums to the
    /// round's shot count.
    pub counts: Vec<usize>,
    /// Which measurement produced the counts.
    pub povm_id: String,
}

/// Full history of one adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptiveTrace {
    pub records: Vec<RoundRecord>,
    /// Estimate after each round.
    pub estimates: Vec<RabiParameters>,
    /// Per-round proxy 1/(shots_so_far * |estimate - truth|^2); infinite
    /// when the estimate lands exactly on the truth.
    pub norm_inv_variance: Vec<f64>,
    pub seed: u64,
}

/// The segmented control-chased propagator
/// [e^{+i H(control) dt} e^{-i H(omega) dt}]^segments.
pub fn controlled_evolution(
    model: &RabiModel,
    omega: &RabiParameters,
    control: &RabiParameters,
    time: f64,
    segments: usize,
) -> Result<ComplexMatrix> {
    if segments == 0 {
        return Err(RabiError::InvalidArgument {
            name: "segments",
            message: "at least one segment is required".into(),
        });
    }
    let dt = time / segments as f64;
    let free = propagator(&model.hamiltonian(omega)?, dt)?;
    let ctrl = propagator(&model.hamiltonian(control)?, -dt)?;
    Ok(matrix_power(&ctrl.matmul(&free), segments))
}

/// The segment-count-to-infinity limit of the chased propagator,
/// e^{-i (H(omega) - H(control)) t}.
pub fn controlled_evolution_limit(
    model: &RabiModel,
    omega: &RabiParameters,
    control: &RabiParameters,
    time: f64,
) -> Result<ComplexMatrix> {
    let diff = model.hamiltonian(omega)?.sub(&model.hamiltonian(control)?);
    propagator(&diff, time)
}

fn matrix_power(m: &ComplexMatrix, mut n: usize) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(m.dim());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = result.matmul(&base);
        }
        n >>= 1;
        if n > 0 {
            base = base.matmul(&base);
        }
    }
    result
}

/// Log-likelihood contribution of a single round for one candidate, given
/// the candidate's cached free factor and the round's control factor.
///
/// Outcome probabilities are the squared moduli of the propagator column at
/// the probe level; zero-count outcomes are skipped and probabilities are
/// clamped from below before the logarithm. Both likelihood paths call this
/// same function so their arithmetic is identical.
fn round_contribution(
    counts: &[usize],
    ctrl_factor: &ComplexMatrix,
    free_candidate: &ComplexMatrix,
    probe_level: usize,
    segments: usize,
) -> f64 {
    let u = matrix_power(&ctrl_factor.matmul(free_candidate), segments);
    let mut ll = 0.0;
    for (outcome, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let p = u.get(outcome, probe_level).norm_sqr();
        ll += count as f64 * p.max(tol::LIKELIHOOD_CLAMP).ln();
    }
    ll
}

/// Simulates one measurement round: evolve the true parameters under the
/// control built from `omega_hat`, then sample the computational measurement
/// `shots` times.
pub fn run_round(
    model: &RabiModel,
    omega_true: &RabiParameters,
    omega_hat: &RabiParameters,
    t: f64,
    n_segments: usize,
    shots: usize,
    rng: &mut RngStream,
) -> Result<RoundRecord> {
    let probe_level = model.probe_level();
    let u_true = controlled_evolution(model, omega_true, omega_hat, t, n_segments)?;
    let out_col = Array1::from_shape_fn(model.dim(), |i| u_true.get(i, probe_level));
    // The long segmented product accumulates rounding at the 1e-12 scale,
    // so renormalize instead of validating the raw norm.
    let psi_out = QuantumState::from_unnormalized(out_col)?;
    let povm = Povm::computational(model.dim());
    let counts = povm.sample_counts(&psi_out, shots, rng)?;
    Ok(RoundRecord {
        control_estimate: omega_hat.clone(),
        counts,
        povm_id: COMPUTATIONAL_POVM_ID.to_string(),
    })
}

/// Cumulative log-likelihood of all recorded rounds at one candidate, folded
/// in record order. Each round's probabilities use that round's own control.
pub fn log_likelihood(
    model: &RabiModel,
    candidate: &RabiParameters,
    records: &[RoundRecord],
    t: f64,
    n_segments: usize,
) -> Result<f64> {
    if n_segments == 0 {
        return Err(RabiError::InvalidArgument {
            name: "n_segments",
            message: "at least one segment is required".into(),
        });
    }
    let dt = t / n_segments as f64;
    let free = propagator(&model.hamiltonian(candidate)?, dt)?;
    let probe_level = model.probe_level();
    let mut ll = 0.0;
    for record in records {
        let ctrl = propagator(&model.hamiltonian(&record.control_estimate)?, -dt)?;
        ll += round_contribution(&record.counts, &ctrl, &free, probe_level, n_segments);
    }
    Ok(ll)
}

/// Grid candidates in row-major order: the first axis varies slowest and
/// every axis ascends, so index order is lexicographic order.
fn grid_candidates(cfg: &AdaptiveConfig) -> Result<Vec<RabiParameters>> {
    let l = cfg.model.param_count();
    let g = cfg.grid_points;
    let total = g.checked_pow(l as u32).ok_or(RabiError::InvalidArgument {
        name: "grid_points",
        message: "grid too large".into(),
    })?;
    let mut candidates = Vec::with_capacity(total);
    for idx in 0..total {
        let mut coords = Vec::with_capacity(l);
        let mut rem = idx;
        for axis in 0..l {
            let stride = g.pow((l - 1 - axis) as u32);
            let j = rem / stride;
            rem %= stride;
            let (lo, hi) = cfg.search_box[axis];
            coords.push(lo + j as f64 * (hi - lo) / (g - 1) as f64);
        }
        candidates.push(RabiParameters::new(coords)?);
    }
    Ok(candidates)
}

/// One axis-by-axis exploratory sweep of the pattern search: for each axis,
/// try a positive then a negative step (clamped to the box) and accept the
/// first strict improvement before moving to the next axis.
fn explore(
    cfg: &AdaptiveConfig,
    records: &[RoundRecord],
    point: &RabiParameters,
    point_ll: f64,
    steps: &[f64],
) -> Result<(RabiParameters, f64)> {
    let l = cfg.model.param_count();
    let mut current = point.clone();
    let mut current_ll = point_ll;
    for axis in 0..l {
        for dir in [1.0, -1.0] {
            let mut coords = current.omegas().to_vec();
            let (lo, hi) = cfg.search_box[axis];
            let stepped = (coords[axis] + dir * steps[axis]).clamp(lo, hi);
            if stepped == coords[axis] {
                continue;
            }
            coords[axis] = stepped;
            let cand = RabiParameters::new(coords)?;
            let cand_ll = log_likelihood(&cfg.model, &cand, records, cfg.time, cfg.segments)?;
            if cand_ll > current_ll {
                current = cand;
                current_ll = cand_ll;
                break;
            }
        }
    }
    Ok((current, current_ll))
}

/// Pattern (compass-with-extrapolation) refinement: exploratory axis sweeps
/// move on strict improvement only; each success is followed by doubled
/// pattern moves along the established direction while they keep helping;
/// failures halve every step until all fall below the refinement floor.
/// Fully deterministic, so equal inputs give bitwise-equal outputs.
fn pattern_search(
    cfg: &AdaptiveConfig,
    records: &[RoundRecord],
    start: RabiParameters,
) -> Result<(RabiParameters, f64)> {
    let g = cfg.grid_points;
    let mut steps: Vec<f64> = cfg
        .search_box
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (g - 1) as f64)
        .collect();
    let mut base = start;
    let mut base_ll = log_likelihood(&cfg.model, &base, records, cfg.time, cfg.segments)?;
    while steps.iter().any(|&s| s >= tol::MLE_REFINE_MIN_STEP) {
        let (moved, moved_ll) = explore(cfg, records, &base, base_ll, &steps)?;
        if moved_ll > base_ll {
            let mut prev = base.clone();
            let mut cur = moved;
            let mut cur_ll = moved_ll;
            // Extrapolate along (cur - prev) while the landscape keeps
            // rewarding it; the iteration cap is a defensive bound, never
            // reached on these smooth likelihoods.
            for _ in 0..1024 {
                let coords: Vec<f64> = cur
                    .omegas()
                    .iter()
                    .zip(prev.omegas())
                    .zip(&cfg.search_box)
                    .map(|((&c, &p), &(lo, hi))| (2.0 * c - p).clamp(lo, hi))
                    .collect();
                let cand = RabiParameters::new(coords)?;
                let cand_ll = log_likelihood(&cfg.model, &cand, records, cfg.time, cfg.segments)?;
                let (ex, ex_ll) = explore(cfg, records, &cand, cand_ll, &steps)?;
                if ex_ll > cur_ll {
                    prev = cur;
                    cur = ex;
                    cur_ll = ex_ll;
                } else {
                    break;
                }
            }
            base = cur;
            base_ll = cur_ll;
        } else {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    Ok((base, base_ll))
}

/// Refines from every start and keeps the best final value; ties keep the
/// earliest start, so the grid maximizer's lexicographic tie-break survives.
fn refine_from_starts(
    cfg: &AdaptiveConfig,
    records: &[RoundRecord],
    starts: &[RabiParameters],
) -> Result<RabiParameters> {
    let mut best: Option<(RabiParameters, f64)> = None;
    for (i, start) in starts.iter().enumerate() {
        if starts[..i].iter().any(|s| s.omegas() == start.omegas()) {
            continue;
        }
        let (refined, refined_ll) = pattern_search(cfg, records, start.clone())?;
        let better = best
            .as_ref()
            .map(|&(_, ll)| refined_ll > ll)
            .unwrap_or(true);
        if better {
            best = Some((refined, refined_ll));
        }
    }
    Ok(best.expect("at least one start").0)
}

fn grid_argmax(lls: &[f64]) -> usize {
    let mut best_idx = 0usize;
    let mut best_ll = f64::NEG_INFINITY;
    for (i, &ll) in lls.iter().enumerate() {
        if ll > best_ll {
            best_ll = ll;
            best_idx = i;
        }
    }
    best_idx
}

/// From-scratch maximum-likelihood estimate over the cumulative record:
/// full grid scan (first strict maximum, i.e. the lexicographically smallest
/// maximizer) followed by pattern refinement from the grid maximizer and
/// from the optional incumbent start, keeping the better of the two.
///
/// The incumbent is how the adaptive loop protects a good running estimate:
/// the refined argmax can otherwise regress when the new round's grid
/// maximizer snaps to a different basin.
pub fn mle_update_with_incumbent(
    records: &[RoundRecord],
    cfg: &AdaptiveConfig,
    incumbent: Option<&RabiParameters>,
) -> Result<RabiParameters> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(RabiError::InvalidArgument {
            name: "records",
            message: "likelihood needs at least one round of data".into(),
        });
    }
    let candidates = grid_candidates(cfg)?;
    let mut lls = Vec::with_capacity(candidates.len());
    for cand in &candidates {
        lls.push(log_likelihood(
            &cfg.model,
            cand,
            records,
            cfg.time,
            cfg.segments,
        )?);
    }
    let best_idx = grid_argmax(&lls);
    let mut starts = vec![candidates[best_idx].clone()];
    if let Some(inc) = incumbent {
        starts.push(inc.clone());
    }
    refine_from_starts(cfg, records, &starts)
}

/// Maximum-likelihood estimate over the cumulative record: coarse grid scan
/// then pattern refinement, ties broken toward the lexicographically
/// smallest grid candidate.
pub fn mle_update(records: &[RoundRecord], cfg: &AdaptiveConfig) -> Result<RabiParameters> {
    mle_update_with_incumbent(records, cfg, None)
}

/// Runs the full adaptive protocol.
///
/// Data generation uses the true parameters with the current round's
/// control; estimation sees only the counts. The grid likelihood is
/// maintained incrementally — each round adds its own contribution to every
/// candidate's running total, which matches the from-scratch fold exactly.
pub fn adaptive_run(cfg: &AdaptiveConfig) -> Result<AdaptiveTrace> {
    cfg.validate()?;
    let dt = cfg.dt();
    let probe_level = cfg.model.probe_level();
    let mut rng = RngStream::from_seed(cfg.seed);
    let candidates = grid_candidates(cfg)?;
    // Per-candidate free factors are control-independent, so they are built
    // once and reused every round.
    let mut free_factors = Vec::with_capacity(candidates.len());
    for cand in &candidates {
        free_factors.push(propagator(&cfg.model.hamiltonian(cand)?, dt)?);
    }
    let mut ll_cum = vec![0.0f64; candidates.len()];
    let mut records: Vec<RoundRecord> = Vec::with_capacity(cfg.rounds);
    let mut estimates: Vec<RabiParameters> = Vec::with_capacity(cfg.rounds);
    let mut norm_inv_variance: Vec<f64> = Vec::with_capacity(cfg.rounds);
    let mut control = cfg.initial_guess.clone();

    for round in 0..cfg.rounds {
        // Physical side: evolve truth under this round's control, sample.
        let record = run_round(
            &cfg.model,
            &cfg.omega_true,
            &control,
            cfg.time,
            cfg.segments,
            cfg.shots_per_round,
            &mut rng,
        )?;
        records.push(record);
        let record = records.last().expect("just pushed");

        // Estimation side: one new contribution per candidate.
        let ctrl_factor = propagator(&cfg.model.hamiltonian(&record.control_estimate)?, -dt)?;
        for (i, free) in free_factors.iter().enumerate() {
            ll_cum[i] += round_contribution(
                &record.counts,
                &ctrl_factor,
                free,
                probe_level,
                cfg.segments,
            );
        }
        let best_idx = grid_argmax(&ll_cum);
        let mut starts = vec![candidates[best_idx].clone()];
        if let Some(prev) = estimates.last() {
            starts.push(prev.clone());
        }
        let estimate = refine_from_starts(cfg, &records, &starts)?;

        let shots_so_far = (cfg.shots_per_round * (round + 1)) as f64;
        let err_sq: f64 = estimate
            .omegas()
            .iter()
            .zip(cfg.omega_true.omegas())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        norm_inv_variance.push(if err_sq > 0.0 {
            1.0 / (shots_so_far * err_sq)
        } else {
            f64::INFINITY
        });
        estimates.push(estimate.clone());
        control = estimate;
    }

    Ok(AdaptiveTrace {
        records,
        estimates,
        norm_inv_variance,
        seed: cfg.seed,
    })
}

/// Ensemble inverse total variance at one round: runs the protocol once per
/// seed, takes the unbiased sample variance of each estimator component over
/// the seeds, sums the components, and normalizes by the total shot count,
/// returning 1 / (shots_so_far * (Var_1 + ... + Var_l)).
pub fn ensemble_inverse_variance(
    cfg: &AdaptiveConfig,
    seeds: &[u64],
    round_index: usize,
) -> Result<f64> {
    if seeds.len() < 2 {
        return Err(RabiError::InvalidArgument {
            name: "seeds",
            message: "the sample variance needs at least two seeds".into(),
        });
    }
    if round_index >= cfg.rounds {
        return Err(RabiError::InvalidArgument {
            name: "round_index",
            message: format!("round {round_index} out of {}", cfg.rounds),
        });
    }
    let l = cfg.model.param_count();
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(seeds.len()); l];
    for &seed in seeds {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = seed;
        let trace = adaptive_run(&run_cfg)?;
        for (axis, &value) in trace.estimates[round_index].omegas().iter().enumerate() {
            samples[axis].push(value);
        }
    }
    let n = seeds.len() as f64;
    let mut total_var = 0.0;
    for axis_samples in &samples {
        let mean = axis_samples.iter().sum::<f64>() / n;
        total_var += axis_samples
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (n - 1.0);
    }
    let shots = (cfg.shots_per_round * (round_index + 1)) as f64;
    Ok(if total_var > 0.0 {
        1.0 / (shots * total_var)
    } else {
        f64::INFINITY
    })
}

/// Information matrix of the perfectly controlled star protocol: with the
/// control locked to the truth the effective family sits at the origin,
/// where the exact derivative rule applies and the matrix is t^2 times the
/// identity for the hub probe.
pub fn multilevel_controlled_qfim(spokes: usize, t: f64) -> Result<QfimResult> {
    if spokes < 2 {
        return Err(RabiError::InvalidArgument {
            name: "spokes",
            message: "the star model needs at least two spokes".into(),
        });
    }
    let model = RabiModel::Star { spokes };
    let probe = QuantumState::basis(model.dim(), model.probe_level());
    let derivs = state_derivatives_origin(&model, t, &probe)?;
    qfim_pure(&derivs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> AdaptiveConfig {
        let mut cfg = AdaptiveConfig::new(
            RabiModel::ThreeLevel,
            RabiParameters::pair(0.3, 0.7).unwrap(),
            2.0,
            3,
            RabiParameters::pair(0.25, 0.65).unwrap(),
        );
        cfg.segments = 200;
        cfg.grid_points = 15;
        cfg.search_box = vec![(-1.0, 1.0), (-1.0, 1.0)];
        cfg.shots_per_round = 60;
        cfg
    }

    #[test]
    fn perfect_control_telescopes_to_identity() {
        let model = RabiModel::ThreeLevel;
        let omega = RabiParameters::pair(0.3, 0.7).unwrap();
        let u = controlled_evolution(&model, &omega, &omega, 5.0, 64).unwrap();
        let dev = u.sub(&ComplexMatrix::identity(3)).max_abs();
        assert!(dev < 1e-12, "telescoping failed: {dev}");
    }

    #[test]
    fn segmented_evolution_converges_first_order() {
        let model = RabiModel::ThreeLevel;
        let omega = RabiParameters::pair(0.3, 0.7).unwrap();
        let control = RabiParameters::pair(0.25, 0.65).unwrap();
        let limit = controlled_evolution_limit(&model, &omega, &control, 5.0).unwrap();
        let err = |n: usize| {
            controlled_evolution(&model, &omega, &control, 5.0, n)
                .unwrap()
                .sub(&limit)
                .max_abs()
        };
        let ratio = err(100) / err(200);
        assert!((1.5..2.5).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let cfg = small_config();
        let a = adaptive_run(&cfg).unwrap();
        let b = adaptive_run(&cfg).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.counts, rb.counts);
        }
        for (ea, eb) in a.estimates.iter().zip(&b.estimates) {
            assert_eq!(ea.omegas(), eb.omegas());
        }
        let mut other = cfg;
        other.seed = 8;
        let c = adaptive_run(&other).unwrap();
        assert!(
            a.records
                .iter()
                .zip(&c.records)
                .any(|(x, y)| x.counts != y.counts),
            "different seeds should draw different data"
        );
    }

    #[test]
    fn incremental_and_from_scratch_estimates_agree_exactly() {
        let cfg = small_config();
        let trace = adaptive_run(&cfg).unwrap();
        // Round 0 has no incumbent start.
        let first = mle_update(&trace.records[..1], &cfg).unwrap();
        assert_eq!(trace.estimates[0].omegas(), first.omegas());
        // Later rounds warm-start from the previous estimate.
        let last =
            mle_update_with_incumbent(&trace.records, &cfg, Some(&trace.estimates[cfg.rounds - 2]))
                .unwrap();
        assert_eq!(
            trace.estimates.last().unwrap().omegas(),
            last.omegas(),
            "incremental likelihood diverged from the from-scratch fold"
        );
    }

    #[test]
    fn likelihood_of_deterministic_data_is_zero() {
        // With control = truth the evolution is the identity, every shot
        // stays on the probe level, and the candidate equal to the truth
        // assigns that outcome probability one.
        let model = RabiModel::ThreeLevel;
        let truth = RabiParameters::pair(0.3, 0.7).unwrap();
        let mut rng = RngStream::from_seed(5);
        let record = run_round(&model, &truth, &truth, 5.0, 100, 40, &mut rng).unwrap();
        assert_eq!(record.counts[model.probe_level()], 40);
        assert_eq!(record.povm_id, COMPUTATIONAL_POVM_ID);
        let ll = log_likelihood(&model, &truth, &[record], 5.0, 100).unwrap();
        assert!(
            ll.abs() < 1e-9,
            "deterministic data should give ll 0, got {ll}"
        );
    }

    #[test]
    fn likelihood_clamps_zero_probability_outcomes() {
        // Fabricate counts on an outcome the candidate forbids: a candidate
        // equal to the round's control predicts all mass on the probe level.
        let model = RabiModel::ThreeLevel;
        let control = RabiParameters::pair(0.4, 0.2).unwrap();
        let record = RoundRecord {
            control_estimate: control.clone(),
            counts: vec![30, 0, 0],
            povm_id: COMPUTATIONAL_POVM_ID.to_string(),
        };
        let ll = log_likelihood(&model, &control, &[record], 5.0, 100).unwrap();
        assert!(ll.is_finite());
        assert!(
            (ll - 30.0 * tol::LIKELIHOOD_CLAMP.ln()).abs() < 1e-6,
            "clamped log-likelihood should be 30 ln(1e-12), got {ll}"
        );
    }

    #[test]
    fn flat_plateau_returns_lexicographically_smallest() {
        // At a very short time every box candidate gives the leak outcome a
        // probability far below the clamp, so all thirty counts on that
        // outcome make every candidate's likelihood exactly 30 ln(clamp):
        // a bitwise-flat plateau where the tie-break applies.
        let mut cfg = small_config();
        cfg.time = 1e-7;
        let record = RoundRecord {
            control_estimate: cfg.initial_guess.clone(),
            counts: vec![30, 0, 0],
            povm_id: COMPUTATIONAL_POVM_ID.to_string(),
        };
        let est = mle_update(&[record], &cfg).unwrap();
        assert_eq!(est.omegas(), &[-1.0, -1.0]);
    }

    #[test]
    fn estimates_stay_inside_search_box() {
        let cfg = small_config();
        let trace = adaptive_run(&cfg).unwrap();
        for est in &trace.estimates {
            for (axis, &w) in est.omegas().iter().enumerate() {
                let (lo, hi) = cfg.search_box[axis];
                assert!(w >= lo && w <= hi, "estimate {w} outside [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn likelihood_uses_each_rounds_own_control() {
        // Permuting counts across rounds with different controls must change
        // the cumulative likelihood, otherwise the bookkeeping is broken.
        let model = RabiModel::ThreeLevel;
        let truth = RabiParameters::pair(0.3, 0.7).unwrap();
        let mut rng = RngStream::from_seed(21);
        let c1 = RabiParameters::pair(0.1, 0.2).unwrap();
        let c2 = RabiParameters::pair(0.8, 0.5).unwrap();
        let r1 = run_round(&model, &truth, &c1, 5.0, 200, 200, &mut rng).unwrap();
        let r2 = run_round(&model, &truth, &c2, 5.0, 200, 200, &mut rng).unwrap();
        let cand = RabiParameters::pair(0.35, 0.6).unwrap();
        let straight = log_likelihood(&model, &cand, &[r1.clone(), r2.clone()], 5.0, 200).unwrap();
        let mut swapped1 = r1.clone();
        let mut swapped2 = r2.clone();
        swapped1.counts = r2.counts.clone();
        swapped2.counts = r1.counts.clone();
        let crossed = log_likelihood(&model, &cand, &[swapped1, swapped2], 5.0, 200).unwrap();
        assert!(
            (straight - crossed).abs() > 1e-6,
            "cross-assigned counts left the likelihood unchanged"
        );
    }

    #[test]
    fn commuting_generators_make_segmentation_exact() {
        // With the second component zero on both sides the free and control
        // generators commute, so the segmented product equals the single
        // exponential for any segment count.
        let model = RabiModel::ThreeLevel;
        let a = RabiParameters::pair(0.9, 0.0).unwrap();
        let b = RabiParameters::pair(0.4, 0.0).unwrap();
        for segments in [1usize, 7, 100] {
            let product = controlled_evolution(&model, &a, &b, 3.0, segments).unwrap();
            let limit = controlled_evolution_limit(&model, &a, &b, 3.0).unwrap();
            let dev = product.sub(&limit).max_abs();
            assert!(dev < 1e-12, "segments {segments}: deviation {dev}");
        }
    }

    #[test]
    fn run_round_is_reproducible_and_conserves_shots() {
        let model = RabiModel::ThreeLevel;
        let truth = RabiParameters::pair(0.3, 0.7).unwrap();
        let guess = RabiParameters::pair(0.5, 0.5).unwrap();
        let mut rng_a = RngStream::from_seed(33);
        let mut rng_b = RngStream::from_seed(33);
        let a = run_round(&model, &truth, &guess, 5.0, 300, 50, &mut rng_a).unwrap();
        let b = run_round(&model, &truth, &guess, 5.0, 300, 50, &mut rng_b).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.counts.iter().sum::<usize>(), 50);
        assert_eq!(a.control_estimate.omegas(), guess.omegas());
    }

    #[test]
    fn estimate_approaches_truth_with_data() {
        let mut cfg = small_config();
        cfg.rounds = 6;
        let trace = adaptive_run(&cfg).unwrap();
        let last = trace.estimates.last().unwrap();
        assert!(
            (last.omega(0) - 0.3).abs() < 0.08,
            "omega1 {}",
            last.omega(0)
        );
        assert!(
            (last.omega(1) - 0.7).abs() < 0.08,
            "omega2 {}",
            last.omega(1)
        );
        assert_eq!(trace.norm_inv_variance.len(), cfg.rounds);
        assert!(trace.norm_inv_variance.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn inverse_variance_proxy_matches_definition() {
        let cfg = small_config();
        let trace = adaptive_run(&cfg).unwrap();
        for (r, (est, &niv)) in trace
            .estimates
            .iter()
            .zip(&trace.norm_inv_variance)
            .enumerate()
        {
            let err_sq: f64 = est
                .omegas()
                .iter()
                .zip(cfg.omega_true.omegas())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let shots = (cfg.shots_per_round * (r + 1)) as f64;
            if err_sq > 0.0 {
                assert_eq!(niv, 1.0 / (shots * err_sq));
            } else {
                assert!(niv.is_infinite());
            }
        }
    }

    #[test]
    fn controlled_star_information_is_isotropic() {
        for spokes in 2..=5 {
            let t = 3.0;
            let j = multilevel_controlled_qfim(spokes, t).unwrap();
            for i in 0..spokes {
                for k in 0..spokes {
                    let want = if i == k { t * t } else { 0.0 };
                    assert!((j.matrix[(i, k)] - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let mut cfg = small_config();
        cfg.search_box = vec![(1.0, -1.0), (-1.0, 1.0)];
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.rounds = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.initial_guess = RabiParameters::new(vec![0.1]).unwrap();
        assert!(cfg.validate().is_err());
    }
}
