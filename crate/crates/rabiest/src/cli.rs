//! Command-line front end.
//!
//! Every data command writes CSV to stdout: `#`-prefixed metadata lines,
//! one header line, then rows. Floats are printed with `{:.16e}` so values
//! round-trip exactly; non-finite values print as the sentinel `inf`.
//!
//! Exit codes: 0 success, 1 argument or configuration errors, 2 failed or
//! degenerate computations, 3 verification failures.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ndarray::Array1;
use num_complex::Complex64;

use crate::adaptive::{adaptive_run, AdaptiveConfig};
use crate::closed_form::{
    crossover_phase, crossover_time, joint_bound, multilevel_bounds, robustness_curve,
    separate_bound,
};
use crate::error::{RabiError, Result};
use crate::models::{ProbeCoefficients, RabiModel, RabiParameters, ThreeLevelEigensystem};
use crate::qcore::state::QuantumState;
use crate::qfim::{qfim_pure, qfim_singular_form, state_derivatives_analytic, QfimResult};
use crate::tol;
use crate::verify::run_all;

#[derive(Parser)]
#[command(
    name = "rabiest",
    version,
    about = "Joint estimation of coupled-transition drive amplitudes: information matrices, optimal schemes, and adaptive simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Information matrix of the three-level family at one setting.
    Qfim {
        #[arg(long, allow_hyphen_values = true)]
        omega1: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega2: f64,
        #[arg(long)]
        time: f64,
        /// Input state: `optimal` (variance-minimizing), `basis:<i>`
        /// (computational level i), or `file:<path>` (six whitespace- or
        /// comma-separated reals: re and im of the three amplitudes).
        #[arg(long, default_value = "optimal", value_parser = ProbeSpec::from_str)]
        probe: ProbeSpec,
    },
    /// Joint-scheme versus separate-scheme cost over a time sweep.
    Compare {
        /// Half-splitting of the bright doublet.
        #[arg(long, default_value_t = 0.1)]
        omega_plus: f64,
        /// Sweep range in the dimensionless phase omega_plus * t.
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        xmax: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Probe copies per parameter slot.
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Inverse total variance of the control-assisted scheme against control
    /// mismatch.
    Robustness {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 5.0)]
        time: f64,
        #[arg(long, default_value_t = 0.6)]
        max_offset: f64,
        #[arg(long, default_value_t = 60)]
        steps: usize,
    },
    /// Simulated adaptive estimation run driven by a config file.
    Adapt {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file and the environment.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Joint and separate bounds for the star family with l spokes.
    Multilevel {
        #[arg(long)]
        spokes: usize,
        #[arg(long)]
        time: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Runs the built-in consistency suites.
    Verify {
        /// Trimmed iteration counts; skips the statistical consistency run.
        #[arg(long)]
        quick: bool,
    },
}

/// Probe selection for the `qfim` command.
#[derive(Clone, Debug, PartialEq)]
enum ProbeSpec {
    Optimal,
    Basis(usize),
    File(PathBuf),
}

impl FromStr for ProbeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "optimal" {
            return Ok(ProbeSpec::Optimal);
        }
        if let Some(level) = s.strip_prefix("basis:") {
            let level: usize = level
                .parse()
                .map_err(|_| format!("invalid basis level in probe spec '{s}'"))?;
            return Ok(ProbeSpec::Basis(level));
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("empty path in probe spec".to_string());
            }
            return Ok(ProbeSpec::File(PathBuf::from(path)));
        }
        Err(format!(
            "unknown probe spec '{s}'; expected optimal, basis:<i>, or file:<path>"
        ))
    }
}

impl ProbeSpec {
    fn describe(&self) -> String {
        match self {
            ProbeSpec::Optimal => "optimal".to_string(),
            ProbeSpec::Basis(i) => format!("basis:{i}"),
            ProbeSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

/// Reads a probe state from a text file: six whitespace- or comma-separated
/// reals, the re/im pairs of the three computational amplitudes.
fn probe_from_file(path: &PathBuf) -> Result<QuantumState> {
    let text = std::fs::read_to_string(path).map_err(|e| RabiError::InvalidArgument {
        name: "probe",
        message: format!("cannot read probe file {}: {e}", path.display()),
    })?;
    let values: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| RabiError::InvalidArgument {
                name: "probe",
                message: format!("invalid number '{tok}' in probe file"),
            })
        })
        .collect::<Result<_>>()?;
    if values.len() != 6 {
        return Err(RabiError::InvalidArgument {
            name: "probe",
            message: format!(
                "probe file must hold exactly 6 reals (re, im of three amplitudes), got {}",
                values.len()
            ),
        });
    }
    let amplitudes = Array1::from_shape_fn(3, |i| Complex64::new(values[2 * i], values[2 * i + 1]));
    QuantumState::from_unnormalized(amplitudes)
}

/// Entry point returning the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &RabiError) -> i32 {
    match e {
        RabiError::InvalidArgument { .. }
        | RabiError::InvalidConfig(_)
        | RabiError::DimensionMismatch { .. } => 1,
        _ => 2,
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Qfim {
            omega1,
            omega2,
            time,
            probe,
        } => cmd_qfim(omega1, omega2, time, &probe),
        Command::Compare {
            omega_plus,
            xmax,
            steps,
            m,
        } => cmd_compare(omega_plus, xmax, steps, m).map(|()| 0),
        Command::Robustness {
            m,
            time,
            max_offset,
            steps,
        } => cmd_robustness(m, time, max_offset, steps).map(|()| 0),
        Command::Adapt { config, seed } => cmd_adapt(&config, seed).map(|()| 0),
        Command::Multilevel { spokes, time, m } => cmd_multilevel(spokes, time, m).map(|()| 0),
        Command::Verify { quick } => cmd_verify(quick),
    }
}

/// 17-significant-digit float field; non-finite values print as `inf`.
fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "inf".to_string()
    }
}

/// Resolves the probe flag to eigenbasis coefficients at this setting.
fn resolve_probe(
    spec: &ProbeSpec,
    params: &RabiParameters,
    time: f64,
    at_revival: bool,
) -> Result<(ProbeCoefficients, Option<&'static str>)> {
    match spec {
        ProbeSpec::Optimal => {
            if at_revival {
                // The variance-minimizing family loses its defining phase at
                // a revival; the middle level is its canonical member.
                Ok((
                    ProbeCoefficients::middle_level(),
                    Some("the variance-minimizing probe degenerates at a revival time; showing the middle-level representative"),
                ))
            } else {
                Ok((
                    crate::closed_form::optimal_probe_coefficients(params.omega_plus(), time)?,
                    None,
                ))
            }
        }
        ProbeSpec::Basis(level) => {
            if *level > 2 {
                return Err(RabiError::InvalidArgument {
                    name: "probe",
                    message: format!("basis level {level} out of range for a three-level system"),
                });
            }
            let eig = ThreeLevelEigensystem::new(params)?;
            let state = QuantumState::basis(3, *level);
            Ok((ProbeCoefficients::from_state(&eig, &state)?, None))
        }
        ProbeSpec::File(path) => {
            let state = probe_from_file(path)?;
            let eig = ThreeLevelEigensystem::new(params)?;
            Ok((ProbeCoefficients::from_state(&eig, &state)?, None))
        }
    }
}

fn cmd_qfim(omega1: f64, omega2: f64, time: f64, probe: &ProbeSpec) -> Result<i32> {
    if !(time.is_finite() && time > 0.0) {
        return Err(RabiError::InvalidArgument {
            name: "time",
            message: "evolution time must be positive and finite".into(),
        });
    }
    let params = RabiParameters::pair(omega1, omega2)?;
    let omega_plus = params.omega_plus();
    let at_revival = (0.5 * omega_plus * time).sin().abs() <= tol::SINGULAR_TIME_SIN;
    let (coeffs, note) = resolve_probe(probe, &params, time, at_revival)?;

    let result: QfimResult = if at_revival {
        qfim_singular_form(&params, time, &coeffs)?
    } else {
        let derivs = state_derivatives_analytic(&params, time, &coeffs)?;
        qfim_pure(&derivs)?
    };

    println!("# omega1 = {}", fmt(omega1));
    println!("# omega2 = {}", fmt(omega2));
    println!("# omega_plus = {}", fmt(omega_plus));
    println!("# time = {}", fmt(time));
    println!("# probe = {}", probe.describe());
    if let Some(note) = note {
        println!("# note = {note}");
    }
    println!("j_00,j_01,j_10,j_11,trace_inverse,commutation_residual,singular");
    let trace_inverse = if result.singular {
        f64::INFINITY
    } else {
        result.trace_inverse()?
    };
    println!(
        "{},{},{},{},{},{},{}",
        fmt(result.matrix[(0, 0)]),
        fmt(result.matrix[(0, 1)]),
        fmt(result.matrix[(1, 0)]),
        fmt(result.matrix[(1, 1)]),
        fmt(trace_inverse),
        fmt(result.commutation_residual),
        result.singular
    );
    // A singular information matrix cannot be inverted, which the caller
    // must be able to detect without parsing the table.
    Ok(if result.singular { 2 } else { 0 })
}

fn cmd_compare(omega_plus: f64, xmax: f64, steps: usize, m: usize) -> Result<()> {
    if !(omega_plus.is_finite() && omega_plus > 0.0) {
        return Err(RabiError::InvalidArgument {
            name: "omega_plus",
            message: "the doublet half-splitting must be positive".into(),
        });
    }
    if !(xmax.is_finite() && xmax > 0.0) || steps == 0 {
        return Err(RabiError::InvalidArgument {
            name: "xmax/steps",
            message: "the sweep needs a positive range and at least one step".into(),
        });
    }
    let phase = crossover_phase();
    let t_cross = crossover_time(omega_plus)?;
    let t_pi_half = std::f64::consts::FRAC_PI_2 / omega_plus;
    let pi_half_joint = joint_bound(omega_plus, t_pi_half, m)?;
    let pi_half_separate = separate_bound(m, t_pi_half)?;
    println!("# omega_plus = {}", fmt(omega_plus));
    println!("# m = {m}");
    println!("# budget = separate runs m experiments per parameter; joint runs 2m in total");
    println!("# crossover_phase = {}", fmt(phase));
    println!("# crossover_time = {}", fmt(t_cross));
    println!("# pi_half_time = {}", fmt(t_pi_half));
    println!("# pi_half_joint = {}", fmt(pi_half_joint));
    println!("# pi_half_separate = {}", fmt(pi_half_separate));
    println!("omega_plus_t,joint_bound,separate_bound");
    for k in 1..=steps {
        let x = xmax * k as f64 / steps as f64;
        let t = x / omega_plus;
        let joint = match joint_bound(omega_plus, t, m) {
            Ok(v) => v,
            Err(RabiError::SingularTime { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let separate = separate_bound(m, t)?;
        println!("{},{},{}", fmt(x), fmt(joint), fmt(separate));
    }
    Ok(())
}

fn cmd_robustness(m: usize, time: f64, max_offset: f64, steps: usize) -> Result<()> {
    if !(time.is_finite() && time > 0.0) {
        return Err(RabiError::InvalidArgument {
            name: "time",
            message: "evolution time must be positive and finite".into(),
        });
    }
    if !(max_offset.is_finite() && max_offset > 0.0) || steps == 0 {
        return Err(RabiError::InvalidArgument {
            name: "max_offset/steps",
            message: "the offset range must be positive with at least one step".into(),
        });
    }
    let offsets: Vec<f64> = (0..=steps)
        .map(|k| max_offset * k as f64 / steps as f64)
        .collect();
    let curve = robustness_curve(&offsets, time, m)?;
    println!("# m = {m}");
    println!("# time = {}", fmt(time));
    println!("delta_omega_plus,inverse_total_variance");
    for (offset, inverse) in curve {
        println!("{},{}", fmt(offset), fmt(inverse));
    }
    Ok(())
}

fn cmd_multilevel(spokes: usize, time: f64, m: usize) -> Result<()> {
    if !(time.is_finite() && time > 0.0) {
        return Err(RabiError::InvalidArgument {
            name: "time",
            message: "evolution time must be positive and finite".into(),
        });
    }
    let bounds = multilevel_bounds(spokes, m, time)?;
    println!("# m = {m}");
    println!("# budget = separate runs m experiments per parameter; joint runs l*m in total");
    println!("spokes,joint_bound,separate_bound,ratio");
    println!(
        "{spokes},{},{},{}",
        fmt(bounds.joint),
        fmt(bounds.separate),
        fmt(bounds.ratio)
    );
    Ok(())
}

fn cmd_adapt(config_path: &PathBuf, seed_flag: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        RabiError::InvalidConfig(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let file = parse_config(&text)?;
    let seed = resolve_seed(seed_flag, file.seed);
    let mut cfg = AdaptiveConfig::new(
        RabiModel::ThreeLevel,
        RabiParameters::pair(file.omega1_true, file.omega2_true)?,
        file.time,
        file.rounds,
        RabiParameters::pair(file.initial_guess_1, file.initial_guess_2)?,
    );
    cfg.shots_per_round = file.shots_per_round;
    cfg.search_box = vec![(file.box_lo, file.box_hi); 2];
    cfg.grid_points = file.grid_points;
    cfg.segments = file.segments;
    cfg.seed = seed;
    cfg.validate()?;

    let trace = adaptive_run(&cfg)?;
    println!(
        "# omega_true = ({}, {})",
        fmt(file.omega1_true),
        fmt(file.omega2_true)
    );
    println!(
        "# initial_guess = ({}, {})",
        fmt(file.initial_guess_1),
        fmt(file.initial_guess_2)
    );
    println!("# time = {}", fmt(file.time));
    println!(
        "# rounds = {}, shots_per_round = {}, segments = {}, grid_points = {}",
        file.rounds, file.shots_per_round, file.segments, file.grid_points
    );
    println!("# box = [{}, {}]", fmt(file.box_lo), fmt(file.box_hi));
    println!("# seed = {seed}");
    println!(
        "# norm_inv_variance = 1 / (shots_so_far * |estimate - truth|^2); inf when the estimate is exact"
    );
    println!(
        "# note: with a zero control the outcome distribution is invariant under a global sign flip of the frequencies; the search box and the first-maximum tie-break pick one representative and later controlled rounds disambiguate"
    );
    println!("step,omega1_hat,omega2_hat,norm_inv_variance,seed");
    for (r, (est, niv)) in trace
        .estimates
        .iter()
        .zip(&trace.norm_inv_variance)
        .enumerate()
    {
        println!(
            "{},{},{},{},{}",
            r + 1,
            fmt(est.omega(0)),
            fmt(est.omega(1)),
            fmt(*niv),
            trace.seed
        );
    }
    Ok(())
}

fn cmd_verify(quick: bool) -> Result<i32> {
    let outcomes = run_all(quick);
    let mut failed = 0usize;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} ({})", o.name, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!(
        "verification: {}/{} suites passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    Ok(if failed == 0 { 0 } else { 3 })
}

/// Seed precedence: command-line flag, then config file, then the
/// RABIEST_SEED environment variable, then 7.
fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> u64 {
    flag.or(from_config)
        .or_else(|| {
            std::env::var("RABIEST_SEED")
                .ok()
                .and_then(|s| s.trim().parse().ok())
        })
        .unwrap_or(7)
}

#[derive(Debug)]
struct ConfigFile {
    omega1_true: f64,
    omega2_true: f64,
    time: f64,
    rounds: usize,
    initial_guess_1: f64,
    initial_guess_2: f64,
    shots_per_round: usize,
    box_lo: f64,
    box_hi: f64,
    grid_points: usize,
    segments: usize,
    seed: Option<u64>,
}

/// Flat `key = value` file: one pair per line, `#` comments and blank lines
/// allowed. Unknown keys and duplicate keys are rejected.
fn parse_config(text: &str) -> Result<ConfigFile> {
    const KNOWN: &[&str] = &[
        "omega1_true",
        "omega2_true",
        "time",
        "rounds",
        "initial_guess_1",
        "initial_guess_2",
        "shots_per_round",
        "box_lo",
        "box_hi",
        "grid_points",
        "segments",
        "seed",
    ];
    let mut entries: HashMap<&str, &str> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            RabiError::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let known = *KNOWN.iter().find(|k| **k == key).ok_or_else(|| {
            RabiError::InvalidConfig(format!("line {}: unknown key '{key}'", lineno + 1))
        })?;
        if entries.insert(known, value).is_some() {
            return Err(RabiError::InvalidConfig(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }

    fn required<'a>(entries: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str> {
        entries
            .get(key)
            .copied()
            .ok_or_else(|| RabiError::InvalidConfig(format!("missing required key '{key}'")))
    }
    fn parse_f64(key: &str, value: &str) -> Result<f64> {
        value
            .parse::<f64>()
            .map_err(|_| RabiError::InvalidConfig(format!("key '{key}': invalid number '{value}'")))
    }
    fn parse_usize(key: &str, value: &str) -> Result<usize> {
        value
            .parse::<usize>()
            .map_err(|_| RabiError::InvalidConfig(format!("key '{key}': invalid count '{value}'")))
    }

    let omega1_true = parse_f64("omega1_true", required(&entries, "omega1_true")?)?;
    let omega2_true = parse_f64("omega2_true", required(&entries, "omega2_true")?)?;
    let time = parse_f64("time", required(&entries, "time")?)?;
    let rounds = parse_usize("rounds", required(&entries, "rounds")?)?;
    let initial_guess_1 = parse_f64("initial_guess_1", required(&entries, "initial_guess_1")?)?;
    let initial_guess_2 = parse_f64("initial_guess_2", required(&entries, "initial_guess_2")?)?;
    let shots_per_round = match entries.get("shots_per_round") {
        Some(v) => parse_usize("shots_per_round", v)?,
        None => 30,
    };
    let box_lo = match entries.get("box_lo") {
        Some(v) => parse_f64("box_lo", v)?,
        None => -2.0,
    };
    let box_hi = match entries.get("box_hi") {
        Some(v) => parse_f64("box_hi", v)?,
        None => 2.0,
    };
    let grid_points = match entries.get("grid_points") {
        Some(v) => parse_usize("grid_points", v)?,
        None => 81,
    };
    let segments = match entries.get("segments") {
        Some(v) => parse_usize("segments", v)?,
        None => 1000,
    };
    let seed = match entries.get("seed") {
        Some(v) => Some(
            v.parse::<u64>()
                .map_err(|_| RabiError::InvalidConfig(format!("key 'seed': invalid seed '{v}'")))?,
        ),
        None => None,
    };

    Ok(ConfigFile {
        omega1_true,
        omega2_true,
        time,
        rounds,
        initial_guess_1,
        initial_guess_2,
        shots_per_round,
        box_lo,
        box_hi,
        grid_points,
        segments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // ------------------------------------------------------------------
    // config parsing
    // ------------------------------------------------------------------

    const MINIMAL: &str = "omega1_true = 0.3\n\
                           omega2_true = 0.7\n\
                           time = 5\n\
                           rounds = 4\n\
                           initial_guess_1 = 0.2\n\
                           initial_guess_2 = 0.6\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.shots_per_round, 30);
        assert_eq!(cfg.grid_points, 81);
        assert_eq!(cfg.segments, 1000);
        assert_eq!(cfg.box_lo, -2.0);
        assert_eq!(cfg.box_hi, 2.0);
        assert!(cfg.seed.is_none());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header comment\n\n{MINIMAL}\n# trailing\nseed = 11\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.seed, Some(11));
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let unknown = format!("{MINIMAL}mystery = 1\n");
        assert!(matches!(
            parse_config(&unknown),
            Err(RabiError::InvalidConfig(_))
        ));
        let duplicate = format!("{MINIMAL}time = 6\n");
        assert!(matches!(
            parse_config(&duplicate),
            Err(RabiError::InvalidConfig(_))
        ));
    }

    #[test]
    fn missing_required_key_is_rejected() {
        let text = "omega1_true = 0.3\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("omega2_true"));
    }

    // ------------------------------------------------------------------
    // seed precedence
    // ------------------------------------------------------------------

    #[test]
    fn seed_flag_beats_config() {
        assert_eq!(resolve_seed(Some(3), Some(5)), 3);
        assert_eq!(resolve_seed(None, Some(5)), 5);
    }

    // ------------------------------------------------------------------
    // formatting
    // ------------------------------------------------------------------

    #[test]
    fn float_fields_round_trip() {
        for &x in &[0.3, -1.0 / 3.0, 2.5132741228718345, 1e-300] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt(f64::INFINITY), "inf");
    }
}
