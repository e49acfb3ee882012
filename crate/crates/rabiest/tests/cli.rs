//! End-to-end tests of the command-line interface: exit codes, output
//! shape, determinism, and configuration handling.

use std::path::Path;
use std::process::{Command, Output};

fn rabiest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabiest"))
        .args(args)
        .env_remove("RABIEST_SEED")
        .output()
        .expect("binary should spawn")
}

fn rabiest_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabiest"))
        .args(args)
        .env_remove("RABIEST_SEED")
        .env(key, value)
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr should be UTF-8")
}

/// Last non-comment, non-header line split into f64 columns; non-numeric
/// fields (like the trailing singular flag) are returned as NaN.
fn last_row(output: &Output) -> Vec<f64> {
    stdout(output)
        .lines()
        .rfind(|l| !l.starts_with('#') && !l.is_empty())
        .expect("at least one data row")
        .split(',')
        .map(|field| field.parse::<f64>().unwrap_or(f64::NAN))
        .collect()
}

fn write_config(dir: &Path, name: &str, extra: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let base = "omega1_true = 0.3\n\
                omega2_true = 0.7\n\
                time = 5\n\
                rounds = 3\n\
                initial_guess_1 = 0.5\n\
                initial_guess_2 = 0.5\n\
                shots_per_round = 10\n\
                box_lo = 0\n\
                box_hi = 2\n\
                grid_points = 41\n\
                segments = 200\n";
    std::fs::write(&path, format!("{base}{extra}")).expect("config should write");
    path
}

// ---------------------------------------------------------------------------
// qfim
// ---------------------------------------------------------------------------

#[test]
fn qfim_succeeds_at_a_regular_setting() {
    let out = rabiest(&["qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("j_00,j_01,j_10,j_11,trace_inverse,commutation_residual,singular"));
    let row = last_row(&out);
    assert!(
        row[4].is_finite() && row[4] > 0.0,
        "trace inverse {}",
        row[4]
    );
    assert!(row[5].abs() < 1e-10, "commutation residual {}", row[5]);
}

#[test]
fn qfim_reports_the_basis_probe_cost() {
    let out = rabiest(&[
        "qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5", "--probe", "basis:1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let row = last_row(&out);
    assert!(
        (row[4] - 0.202_363_318_884_337_34).abs() < 1e-12,
        "middle-level probe cost {}",
        row[4]
    );
}

#[test]
fn qfim_exits_two_at_a_revival_and_prints_the_rank_one_matrix() {
    // omega_plus = 2.5, revival at t = 2 pi / 2.5.
    let out = rabiest(&[
        "qfim",
        "--omega1",
        "3",
        "--omega2",
        "4",
        "--time",
        "2.5132741228718345",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("# note ="),
        "should explain the degenerate probe:\n{text}"
    );
    let data_line = text
        .lines()
        .rfind(|l| !l.starts_with('#') && !l.is_empty())
        .unwrap();
    assert!(data_line.contains(",inf,"), "row: {data_line}");
    assert!(data_line.ends_with("true"), "row: {data_line}");
}

#[test]
fn qfim_rejects_a_malformed_probe_spec() {
    let out = rabiest(&[
        "qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5", "--probe", "bogus",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn qfim_rejects_an_out_of_range_basis_level() {
    let out = rabiest(&[
        "qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5", "--probe", "basis:3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("out of range"));
}

#[test]
fn qfim_rejects_a_nonpositive_time() {
    let out = rabiest(&["qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn qfim_accepts_a_probe_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.txt");
    std::fs::write(&path, "0.1 0\n0.70710678, 0\n0 0.7\n").unwrap();
    let spec = format!("file:{}", path.display());
    let out = rabiest(&[
        "qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5", "--probe", &spec,
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(last_row(&out)[4].is_finite());
}

#[test]
fn qfim_rejects_a_probe_file_with_the_wrong_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.txt");
    std::fs::write(&path, "1 0 0 0\n").unwrap();
    let spec = format!("file:{}", path.display());
    let out = rabiest(&[
        "qfim", "--omega1", "0.3", "--omega2", "0.7", "--time", "5", "--probe", &spec,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("6 reals"), "stderr: {}", stderr(&out));
}

#[test]
fn qfim_rejects_a_missing_probe_file() {
    let out = rabiest(&[
        "qfim",
        "--omega1",
        "0.3",
        "--omega2",
        "0.7",
        "--time",
        "5",
        "--probe",
        "file:/nonexistent/probe.txt",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

// ---------------------------------------------------------------------------
// compare / robustness / multilevel
// ---------------------------------------------------------------------------

#[test]
fn compare_emits_the_sweep_with_crossover_metadata() {
    let out = rabiest(&["compare"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# crossover_phase = 3.4285151498485580e0"));
    assert!(text.contains("omega_plus_t,joint_bound,separate_bound"));
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.contains("omega_plus_t"))
        .count();
    assert_eq!(rows, 100, "default step count");
}

#[test]
fn robustness_starts_at_the_exact_uncontrolled_free_limit() {
    let out = rabiest(&["robustness"]);
    assert_eq!(out.status.code(), Some(0));
    let first = stdout(&out)
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("delta"))
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .unwrap();
    assert_eq!(first[0], 0.0);
    assert!(
        (first[1] - 25.0).abs() < 1e-9,
        "zero-offset value {}",
        first[1]
    );
}

#[test]
fn multilevel_reports_the_spoke_count_as_the_ratio() {
    let out = rabiest(&["multilevel", "--spokes", "3", "--time", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let row = last_row(&out);
    assert_eq!(row[0], 3.0);
    assert!((row[3] - 3.0).abs() < 1e-12, "ratio {}", row[3]);
}

// ---------------------------------------------------------------------------
// adapt
// ---------------------------------------------------------------------------

#[test]
fn adapt_runs_and_emits_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.cfg", "seed = 3\n");
    let out = rabiest(&["adapt", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("step,omega1_hat,omega2_hat,norm_inv_variance,seed"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("step,"))
        .collect();
    assert_eq!(rows.len(), 3, "one row per round:\n{text}");
    assert!(rows.iter().all(|r| r.ends_with(",3")));
}

#[test]
fn adapt_output_is_byte_identical_for_equal_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.cfg", "seed = 123\n");
    let first = rabiest(&["adapt", "--config", config.to_str().unwrap()]);
    let second = rabiest(&["adapt", "--config", config.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    let other = rabiest(&[
        "adapt",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "124",
    ]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(
        first.stdout, other.stdout,
        "different seeds must draw different data"
    );
}

#[test]
fn adapt_seed_precedence_is_flag_then_config_then_environment() {
    let dir = tempfile::tempdir().unwrap();

    let with_seed = write_config(dir.path(), "seeded.cfg", "seed = 11\n");
    let out = rabiest_with_env(
        &["adapt", "--config", with_seed.to_str().unwrap()],
        "RABIEST_SEED",
        "5",
    );
    assert!(
        stdout(&out).contains("# seed = 11"),
        "config beats environment"
    );

    let unseeded = write_config(dir.path(), "unseeded.cfg", "");
    let out = rabiest_with_env(
        &["adapt", "--config", unseeded.to_str().unwrap()],
        "RABIEST_SEED",
        "5",
    );
    assert!(
        stdout(&out).contains("# seed = 5"),
        "environment fills the gap"
    );

    let out = rabiest_with_env(
        &[
            "adapt",
            "--config",
            with_seed.to_str().unwrap(),
            "--seed",
            "9",
        ],
        "RABIEST_SEED",
        "5",
    );
    assert!(stdout(&out).contains("# seed = 9"), "flag beats both");

    let out = rabiest(&["adapt", "--config", unseeded.to_str().unwrap()]);
    assert!(stdout(&out).contains("# seed = 7"), "default seed");
}

#[test]
fn adapt_rejects_an_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.cfg", "bogus = 3\n");
    let out = rabiest(&["adapt", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("unknown key"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn adapt_rejects_a_duplicate_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "dup.cfg", "time = 4\n");
    let out = rabiest(&["adapt", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("duplicate key"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn adapt_rejects_a_config_missing_a_required_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.cfg");
    std::fs::write(&path, "omega1_true = 0.3\n").unwrap();
    let out = rabiest(&["adapt", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("missing required key"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn adapt_rejects_a_missing_config_file() {
    let out = rabiest(&["adapt", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

// ---------------------------------------------------------------------------
// verify and argument handling
// ---------------------------------------------------------------------------

#[test]
fn verify_quick_exits_zero_with_a_summary() {
    let out = rabiest(&["verify", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("suites passed"));
}

#[test]
fn help_exits_zero() {
    let out = rabiest(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Usage"));
}

#[test]
fn unknown_subcommands_exit_one() {
    let out = rabiest(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_rejects_a_nonpositive_splitting() {
    let out = rabiest(&["compare", "--omega-plus", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
