//! C interface to the estimation engine.
//!
//! Conventions shared by every function here:
//!
//! - Fallible calls return a [`RabiestStatus`] and deliver values through
//!   out-pointers, which are written only on `RABIEST_STATUS_OK`.
//! - Heap objects cross the boundary as opaque handles produced by a
//!   `*_new`/`*_run` call and released by the matching `*_free`, which
//!   accepts `NULL`.
//! - Panics never unwind across the boundary; they surface as
//!   `RABIEST_STATUS_INTERNAL`.
//! - Equal seeds give bitwise-equal results, exactly as in the Rust API.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ndarray::Array1;
use num_complex::Complex64;

use rabiest::adaptive::{adaptive_run, AdaptiveConfig, AdaptiveTrace};
use rabiest::closed_form::{
    controlled_bound, crossover_time, joint_bound, min_trace_inverse, optimal_probe_coefficients,
    separate_bound,
};
use rabiest::models::{ProbeCoefficients, ThreeLevelEigensystem};
use rabiest::qcore::QuantumState;
use rabiest::qfim::{qfim_pure, qfim_singular_form, state_derivatives_analytic, QfimResult};
use rabiest::{tol, RabiError, RabiModel, RabiParameters};

/// Status code returned by every fallible function in this interface.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiestStatus {
    /// The call succeeded and all out-parameters hold results.
    Ok = 0,
    /// An argument was rejected (non-finite input, out-of-range index,
    /// malformed configuration, or a state that fails validation).
    InvalidArgument = 1,
    /// The requested quantity is undefined at this point: a revival time,
    /// a singular information matrix, or vanishing drive amplitudes.
    Singular = 2,
    /// An internal computation failed; treat the out-parameters as garbage.
    Internal = 3,
    /// A required pointer argument was NULL.
    NullPointer = 4,
}

fn status_of(err: &RabiError) -> RabiestStatus {
    match err {
        RabiError::SingularTime { .. }
        | RabiError::SingularQfim { .. }
        | RabiError::SingularParameterization
        | RabiError::DegenerateSpectrum => RabiestStatus::Singular,
        RabiError::InvalidArgument { .. }
        | RabiError::InvalidConfig(_)
        | RabiError::DimensionMismatch { .. }
        | RabiError::NotHermitian { .. }
        | RabiError::NotNormalized { .. }
        | RabiError::NotPositive { .. }
        | RabiError::IncompletePovm { .. }
        | RabiError::RankDeficient { .. }
        | RabiError::InvalidProbabilities { .. } => RabiestStatus::InvalidArgument,
        _ => RabiestStatus::Internal,
    }
}

/// Runs `body` with panics converted to `RABIEST_STATUS_INTERNAL` so no
/// unwind ever crosses the C boundary.
fn guarded(body: impl FnOnce() -> RabiestStatus) -> RabiestStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(RabiestStatus::Internal)
}

/// Writes a library result through `out`, translating errors to a status.
///
/// # Safety
/// `out` must be valid for writes or NULL.
unsafe fn deliver(out: *mut f64, result: rabiest::Result<f64>) -> RabiestStatus {
    if out.is_null() {
        return RabiestStatus::NullPointer;
    }
    match result {
        Ok(value) => {
            *out = value;
            RabiestStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rabiest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Writes the smallest attainable trace of the inverse information matrix
/// for a single probe evolved for `time` at eigenfrequency `omega_plus`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_min_trace_inverse(
    omega_plus: f64,
    time: f64,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| deliver(out, min_trace_inverse(omega_plus, time)))
}

/// Writes the total-variance bound of the joint scheme that splits `probes`
/// probes over one estimation of both frequencies.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_joint_bound(
    omega_plus: f64,
    time: f64,
    probes: usize,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| deliver(out, joint_bound(omega_plus, time, probes)))
}

/// Writes the total-variance bound of the scheme that estimates each
/// frequency separately with half of `probes` probes each.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_separate_bound(
    probes: usize,
    time: f64,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| deliver(out, separate_bound(probes, time)))
}

/// Writes the total-variance bound of the control-assisted scheme whose
/// control cancels the drive up to `mismatch` in eigenfrequency. The bound
/// is even in `mismatch`, and `mismatch = 0` gives the perfect-control
/// floor `1 / (probes * time^2)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_controlled_bound(
    probes: usize,
    time: f64,
    mismatch: f64,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| deliver(out, controlled_bound(probes, time, mismatch)))
}

/// Writes the evolution time at which the joint and separate schemes trade
/// places for eigenfrequency `omega_plus`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_crossover_time(omega_plus: f64, out: *mut f64) -> RabiestStatus {
    guarded(|| deliver(out, crossover_time(omega_plus)))
}

/// Quantum information matrix of a three-level drive, produced by
/// [`rabiest_qfim_new`] and released by [`rabiest_qfim_free`].
pub struct RabiestQfim {
    result: QfimResult,
}

fn build_qfim(
    omega1: f64,
    omega2: f64,
    time: f64,
    probe: Option<&[f64; 6]>,
) -> rabiest::Result<QfimResult> {
    if !(time.is_finite() && time > 0.0) {
        return Err(RabiError::InvalidArgument {
            name: "time",
            message: "evolution time must be positive and finite".into(),
        });
    }
    let params = RabiParameters::pair(omega1, omega2)?;
    let omega_plus = params.omega_plus();
    let at_revival = (0.5 * omega_plus * time).sin().abs() <= tol::SINGULAR_TIME_SIN;
    let coeffs = match probe {
        None => {
            if at_revival {
                // The variance-minimizing family loses its defining phase at
                // a revival; fall back to its middle-level representative.
                ProbeCoefficients::middle_level()
            } else {
                optimal_probe_coefficients(omega_plus, time)?
            }
        }
        Some(values) => {
            let amplitudes =
                Array1::from_shape_fn(3, |i| Complex64::new(values[2 * i], values[2 * i + 1]));
            let state = QuantumState::from_unnormalized(amplitudes)?;
            let eig = ThreeLevelEigensystem::new(&params)?;
            ProbeCoefficients::from_state(&eig, &state)?
        }
    };
    if at_revival {
        qfim_singular_form(&params, time, &coeffs)
    } else {
        let derivs = state_derivatives_analytic(&params, time, &coeffs)?;
        qfim_pure(&derivs)
    }
}

/// Creates the quantum information matrix for drive amplitudes
/// (`omega1`, `omega2`) after evolving a probe for `time`.
///
/// `probe` selects the probe state: NULL asks for the variance-minimizing
/// probe at these settings, otherwise it must point to 6 doubles holding
/// the real and imaginary parts of the three bare-level amplitudes
/// (re0, im0, re1, im1, re2, im2); the amplitudes are normalized
/// internally. At a revival time the matrix is rank one; the handle is
/// still created and reports itself singular.
///
/// On success writes a handle to `out`, to be released with
/// [`rabiest_qfim_free`].
///
/// # Safety
/// `probe` must be NULL or valid for reads of 6 doubles; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_new(
    omega1: f64,
    omega2: f64,
    time: f64,
    probe: *const f64,
    out: *mut *mut RabiestQfim,
) -> RabiestStatus {
    let probe_values = if probe.is_null() {
        None
    } else {
        let mut values = [0.0; 6];
        values.copy_from_slice(std::slice::from_raw_parts(probe, 6));
        Some(values)
    };
    guarded(|| {
        if out.is_null() {
            return RabiestStatus::NullPointer;
        }
        match build_qfim(omega1, omega2, time, probe_values.as_ref()) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(RabiestQfim { result }));
                RabiestStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Writes entry (`row`, `col`) of the 2x2 information matrix.
///
/// # Safety
/// `qfim` must be a live handle from [`rabiest_qfim_new`]; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_entry(
    qfim: *const RabiestQfim,
    row: usize,
    col: usize,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| {
        if qfim.is_null() || out.is_null() {
            return RabiestStatus::NullPointer;
        }
        let handle = &*qfim;
        let dim = handle.result.dim();
        if row >= dim || col >= dim {
            return RabiestStatus::InvalidArgument;
        }
        *out = handle.result.matrix[(row, col)];
        RabiestStatus::Ok
    })
}

/// Writes the trace of the inverse information matrix, the figure of merit
/// for the joint estimation variance. Fails with
/// `RABIEST_STATUS_SINGULAR` when the matrix is rank deficient (as at a
/// revival time).
///
/// # Safety
/// `qfim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_trace_inverse(
    qfim: *const RabiestQfim,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| {
        if qfim.is_null() {
            return RabiestStatus::NullPointer;
        }
        deliver(out, (*qfim).result.trace_inverse())
    })
}

/// Writes the residual that measures how far the optimal measurements for
/// the two frequencies are from being jointly realizable; zero means one
/// measurement saturates both.
///
/// # Safety
/// `qfim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_commutation_residual(
    qfim: *const RabiestQfim,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| {
        if qfim.is_null() {
            return RabiestStatus::NullPointer;
        }
        deliver(out, Ok((*qfim).result.commutation_residual))
    })
}

/// Writes 1 if the information matrix is singular (rank one), else 0.
///
/// # Safety
/// `qfim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_is_singular(
    qfim: *const RabiestQfim,
    out: *mut i32,
) -> RabiestStatus {
    guarded(|| {
        if qfim.is_null() || out.is_null() {
            return RabiestStatus::NullPointer;
        }
        *out = i32::from((*qfim).result.singular);
        RabiestStatus::Ok
    })
}

/// Releases a handle from [`rabiest_qfim_new`]. Accepts NULL.
///
/// # Safety
/// `qfim` must be NULL or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rabiest_qfim_free(qfim: *mut RabiestQfim) {
    if !qfim.is_null() {
        drop(Box::from_raw(qfim));
    }
}

/// Record of a simulated adaptive estimation run, produced by
/// [`rabiest_adaptive_run`] and released by [`rabiest_trace_free`].
pub struct RabiestTrace {
    trace: AdaptiveTrace,
}

/// Simulates the control-chased adaptive estimation of a three-level drive
/// and writes a trace handle to `out`.
///
/// The simulated truth is (`omega1_true`, `omega2_true`); each of `rounds`
/// rounds applies the control matched to the current estimate, evolves for
/// `time` in `segments` product steps, draws `shots_per_round` measurement
/// outcomes, and re-maximizes the cumulative likelihood started from a
/// `grid_points` x `grid_points` scan of the box
/// [`box_lo`, `box_hi`]^2 that also contains the initial guess
/// (`guess1`, `guess2`). Equal `seed` values give bitwise-equal traces.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_adaptive_run(
    omega1_true: f64,
    omega2_true: f64,
    time: f64,
    rounds: usize,
    shots_per_round: usize,
    segments: usize,
    grid_points: usize,
    box_lo: f64,
    box_hi: f64,
    guess1: f64,
    guess2: f64,
    seed: u64,
    out: *mut *mut RabiestTrace,
) -> RabiestStatus {
    guarded(|| {
        if out.is_null() {
            return RabiestStatus::NullPointer;
        }
        let body = || -> rabiest::Result<AdaptiveTrace> {
            let truth = RabiParameters::pair(omega1_true, omega2_true)?;
            let guess = RabiParameters::pair(guess1, guess2)?;
            let mut cfg = AdaptiveConfig::new(RabiModel::ThreeLevel, truth, time, rounds, guess);
            cfg.shots_per_round = shots_per_round;
            cfg.segments = segments;
            cfg.grid_points = grid_points;
            cfg.search_box = vec![(box_lo, box_hi); 2];
            cfg.seed = seed;
            adaptive_run(&cfg)
        };
        match body() {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(RabiestTrace { trace }));
                RabiestStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Writes the number of completed rounds recorded in the trace.
///
/// # Safety
/// `trace` must be a live handle from [`rabiest_adaptive_run`]; `out` must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_trace_rounds(
    trace: *const RabiestTrace,
    out: *mut usize,
) -> RabiestStatus {
    guarded(|| {
        if trace.is_null() || out.is_null() {
            return RabiestStatus::NullPointer;
        }
        *out = (*trace).trace.estimates.len();
        RabiestStatus::Ok
    })
}

/// Writes the frequency estimate after round `round` (0-based).
///
/// # Safety
/// `trace` must be a live handle; `out_omega1` and `out_omega2` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_trace_estimate(
    trace: *const RabiestTrace,
    round: usize,
    out_omega1: *mut f64,
    out_omega2: *mut f64,
) -> RabiestStatus {
    guarded(|| {
        if trace.is_null() || out_omega1.is_null() || out_omega2.is_null() {
            return RabiestStatus::NullPointer;
        }
        let estimates = &(*trace).trace.estimates;
        if round >= estimates.len() {
            return RabiestStatus::InvalidArgument;
        }
        *out_omega1 = estimates[round].omega(0);
        *out_omega2 = estimates[round].omega(1);
        RabiestStatus::Ok
    })
}

/// Writes the running inverse-variance proxy after round `round`
/// (0-based): shots so far divided by the squared estimate error.
///
/// # Safety
/// `trace` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rabiest_trace_inverse_variance(
    trace: *const RabiestTrace,
    round: usize,
    out: *mut f64,
) -> RabiestStatus {
    guarded(|| {
        if trace.is_null() || out.is_null() {
            return RabiestStatus::NullPointer;
        }
        let values = &(*trace).trace.norm_inv_variance;
        if round >= values.len() {
            return RabiestStatus::InvalidArgument;
        }
        *out = values[round];
        RabiestStatus::Ok
    })
}

/// Releases a handle from [`rabiest_adaptive_run`]. Accepts NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rabiest_trace_free(trace: *mut RabiestTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
