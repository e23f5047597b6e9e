//! End-to-end checks of the command-line interface: flag handling, config
//! files, artifact layout, exit codes, and bytewise reproducibility.

use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn evograph(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evograph"))
        .args(args)
        .current_dir(dir)
        .env_remove("EVOGRAPH_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn thresholds_prints_the_affine_forms() {
    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "thresholds",
            "--game",
            "peer",
            "--k",
            "4",
            "--c",
            "1",
            "--r",
            "2",
        ],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(
        text.contains("beta0     = 0.1764705882 + 0.1764705882 alpha"),
        "{text}"
    );
    assert!(
        text.contains("beta_star = 1.0000000000 + 5.6666666667 alpha"),
        "{text}"
    );
    assert!(dir.path().join("thresholds.json").exists());
    assert!(dir.path().join("thresholds_manifest.json").exists());
}

#[test]
fn rhs_is_neutral_at_the_critical_pot_factor() {
    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "rhs", "--game", "pgg", "--rule", "pc", "--k", "4", "--r", "5", "--c", "1", "--x",
            "0.5,0.5",
        ],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(text.contains("dx_C/dt = 0.0000000000e0"), "{text}");
    assert!(text.contains("dx_D/dt = 0.0000000000e0"), "{text}");
    assert!(text.contains("path: linear"), "{text}");
}

#[test]
fn rhs_json_matches_the_library_bytes() {
    use evograph::payoff::{pool_punishment, GameParams};
    use evograph::replicator::{ReplicatorSystem, UpdateRule};
    use std::sync::Arc;

    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "rhs",
            "--game",
            "pool",
            "--rule",
            "db",
            "--k",
            "4",
            "--r",
            "3",
            "--c",
            "1",
            "--alpha",
            "0.7",
            "--beta",
            "5",
            "--x",
            "0.3,0.3,0.4",
            "--format",
            "json",
        ],
        dir.path(),
    );
    let printed = stdout(&out);

    let params = GameParams::new(3.0, 1.0, 0.7, 5.0).unwrap();
    let system = ReplicatorSystem::new(
        Arc::new(pool_punishment(&params, 4)),
        UpdateRule::DeathBirth,
        1.0,
    )
    .unwrap();
    let x = vec![0.3, 0.3, 0.4];
    let expected = serde_json::json!({
        "rule": "db",
        "delta": 1.0,
        "path": if system.uses_linear_path() { "linear" } else { "general" },
        "names": system.model().strategy_names(),
        "x": x,
        "rhs": system.rhs(&x).unwrap(),
    });
    let expected_text = format!("{}\n", serde_json::to_string_pretty(&expected).unwrap());
    assert_eq!(printed, expected_text);
}

#[test]
fn integrate_writes_trajectory_and_plots() {
    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "integrate",
            "--game",
            "peer",
            "--k",
            "4",
            "--r",
            "3",
            "--c",
            "1",
            "--alpha",
            "0.7",
            "--beta",
            "5",
            "--x",
            "0.3,0.4,0.3",
            "--t-max",
            "100",
        ],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(text.contains("terminal:"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,C,D,E\n"), "{}", &csv[..40]);
    assert!(dir.path().join("trajectory_ternary.svg").exists());
    assert!(dir.path().join("trajectory_frequencies.svg").exists());
    let manifest = std::fs::read_to_string(dir.path().join("integrate_manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(manifest["parameters"]["beta"], 5.0);
    assert_eq!(manifest["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn equilibria_lists_the_bistable_layout() {
    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "equilibria",
            "--game",
            "peer",
            "--k",
            "4",
            "--r",
            "3",
            "--c",
            "1",
            "--alpha",
            "0.7",
            "--beta",
            "0.7",
        ],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(text.contains("found 5 equilibria"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("equilibria.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("kind,stability,"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn phase_heatmap_carries_both_boundary_curves() {
    let dir = TempDir::new().unwrap();
    evograph(
        &[
            "phase",
            "--game",
            "pool",
            "--k",
            "4",
            "--c",
            "1",
            "--r",
            "2",
            "--alpha",
            "0:1:0.25",
            "--beta",
            "0.1:4:0.5",
        ],
        dir.path(),
    );
    let svg = std::fs::read_to_string(dir.path().join("phase.svg")).unwrap();
    assert_eq!(svg.matches("class=\"boundary-entry\"").count(), 1);
    assert_eq!(svg.matches("class=\"boundary-exit\"").count(), 1);
    assert_eq!(svg.matches("class=\"cell\"").count(), 5 * 8);
    let csv = std::fs::read_to_string(dir.path().join("phase.csv")).unwrap();
    assert!(csv.starts_with("alpha,beta,phase,label\n"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = [
        "simulate",
        "--game",
        "peer",
        "--k",
        "4",
        "--r",
        "3",
        "--c",
        "1",
        "--alpha",
        "0.7",
        "--beta",
        "5",
        "--N",
        "200",
        "--delta",
        "0.02",
        "--x",
        "0.3,0.3,0.4",
        "--sweeps",
        "10",
        "--replicas",
        "2",
        "--seed",
        "7",
    ];
    let mut first = args.to_vec();
    first.extend(["--output-dir", "a"]);
    evograph(&first, dir.path());
    let mut second = args.to_vec();
    second.extend(["--output-dir", "b"]);
    evograph(&second, dir.path());
    for name in ["simulation.csv", "simulation_summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn validate_reports_small_closure_deviation() {
    let dir = TempDir::new().unwrap();
    let out = evograph(
        &[
            "validate",
            "--game",
            "peer",
            "--k",
            "4",
            "--r",
            "3",
            "--c",
            "1",
            "--alpha",
            "0.7",
            "--beta",
            "5",
            "--N",
            "500",
            "--sweeps",
            "40",
            "--measure-every",
            "5",
            "--replicas",
            "4",
            "--seed",
            "7",
            "--burn-in",
            "20",
        ],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(text.contains("max |measured - closure|"), "{text}");
    let report = std::fs::read_to_string(dir.path().join("closure_report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(report["max_abs_deviation"].as_f64().unwrap() < 0.1);
    assert_eq!(report["burn_in"], 20);
}

#[test]
fn config_file_fills_flags_and_flags_win() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("sweep.conf"),
        "output_dir = fromconf\n\n[simulate]\ngame = pgg\nk = 4\nr = 3\nc = 1\nN = 100\nsweeps = 5\nreplicas = 2\nseed = 3\ndelta = 0.05\n",
    )
    .unwrap();
    evograph(
        &["simulate", "--config", "sweep.conf", "--N", "120"],
        dir.path(),
    );
    let manifest =
        std::fs::read_to_string(dir.path().join("fromconf").join("simulate_manifest.json"))
            .unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    // The explicit flag beats the config file's N = 100.
    assert_eq!(manifest["parameters"]["N"], 120);
    assert_eq!(manifest["parameters"]["sweeps"], 5);
    assert_eq!(manifest["seeds"]["master"], 3);
}

#[test]
fn games_list_names_every_builtin() {
    let dir = TempDir::new().unwrap();
    let text = stdout(&evograph(&["games", "list"], dir.path()));
    for needle in ["pgg", "peer", "pool", "C, D, E", "C, D, O"] {
        assert!(text.contains(needle), "missing {needle} in {text}");
    }
}

#[test]
fn payoff_export_covers_every_configuration() {
    let dir = TempDir::new().unwrap();
    let text = stdout(&evograph(
        &[
            "payoff", "export", "--game", "pool", "--k", "4", "--r", "2", "--c", "1", "--alpha",
            "0.3", "--beta", "1",
        ],
        dir.path(),
    ));
    assert!(text.contains("3 strategies x 15 configurations"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("payoff_matrix.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("strategy,4+0+0,3+1+0,"));
    assert_eq!(header.split(',').count(), 16);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn exit_codes_separate_validation_from_io() {
    let dir = TempDir::new().unwrap();
    // Frequencies that miss the simplex: validation, exit 2.
    let bad_x = evograph(
        &[
            "rhs", "--game", "pgg", "--k", "4", "--r", "3", "--c", "1", "--x", "0.7,0.2",
        ],
        dir.path(),
    );
    assert_eq!(bad_x.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_x.stderr).contains("error:"));

    // Missing required value: validation, exit 2, names the flag.
    let missing = evograph(
        &[
            "simulate", "--game", "pgg", "--k", "4", "--r", "3", "--c", "1",
        ],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--N"));

    // Unreadable config file: I/O, exit 4.
    let no_file = evograph(&["games", "list", "--config", "nope.conf"], dir.path());
    assert_eq!(no_file.status.code(), Some(4));
}

#[test]
fn output_dir_environment_variable_is_honored() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_evograph"))
        .args([
            "thresholds",
            "--game",
            "pool",
            "--k",
            "4",
            "--c",
            "1",
            "--r",
            "2",
        ])
        .current_dir(dir.path())
        .env("EVOGRAPH_OUTPUT_DIR", "envdir")
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(dir.path().join("envdir").join("thresholds.json").exists());
}
