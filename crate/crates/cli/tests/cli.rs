//! End-to-end checks of the binary: exit codes, artifact formats and
//! seed-stable verification.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_permadde"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn simulate_equilibrium_history_gives_constant_column() {
    let out = run(&[
        "simulate",
        "--preset",
        "bastinec-constant?alpha=1;2&beta=1.5&tau=0.5",
        "--history",
        "2.0",
        "--T",
        "50",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x"));
    for line in lines {
        let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((x - 2.0).abs() < 1e-9, "non-constant value {x}");
    }
}

#[test]
fn simulate_nicholson_autonomous_settles_at_one() {
    let out = run(&[
        "simulate",
        "--preset",
        "nicholson-autonomous?d=1&beta=2.718281828459045&tau=0.5",
        "--history",
        "0.5",
        "--T",
        "100",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let x: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((x - 1.0).abs() < 1e-4, "x(100) = {x}");
}

#[test]
fn malformed_model_file_exits_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"not\": \"a model\"").unwrap();
    let out = run(&["simulate", "--model", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("cannot parse"));
}

#[test]
fn integrator_blowup_exits_three() {
    // x' = 100 x with no mortality overflows before T = 20
    let out = run(&[
        "simulate",
        "--preset",
        "bastinec-constant?alpha=100&beta=0&tau=0",
        "--T",
        "20",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("non-finite"));
}

#[test]
fn bounds_exit_codes_track_certification() {
    let out = run(&[
        "bounds",
        "--preset",
        "bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5",
    ]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["permanent"], true);
    assert_eq!(report["family"], "beverton-holt");
    assert!((report["M0"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((report["m0"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((report["K_l"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let out = run(&[
        "bounds",
        "--preset",
        "bh-logistic?alpha=1&mu=2&kappa=1&tau=0.5",
    ]);
    assert_eq!(exit_code(&out), 2);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["permanent"], false);
    assert_eq!(report["K_l"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_is_seed_stable_and_rejects_corrupt_bounds() {
    let nicholson = "nicholson?d=1&beta=sin(2,0.5,1,0)&tau=0.5";
    let mut codes = Vec::new();
    for seed in ["7", "8"] {
        let out = run(&[
            "verify", "--preset", nicholson, "--N", "10", "--seed", seed, "--T", "150", "--h",
            "0.02",
        ]);
        codes.push(exit_code(&out));
        let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(verdict["mode"], "permanence");
        assert_eq!(verdict["permanence"]["pass"], true);
    }
    assert_eq!(codes, vec![0, 0]);

    // corrupt the certified interval so the lower bound exceeds the tails
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "bounds",
        "--preset",
        nicholson,
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let mut report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    report["certified"] = serde_json::json!([5.0, 8.0]);
    std::fs::write(&report_path, report.to_string()).unwrap();
    let out = run(&[
        "verify",
        "--preset",
        nicholson,
        "--bounds",
        report_path.to_str().unwrap(),
        "--N",
        "3",
        "--T",
        "120",
        "--h",
        "0.02",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn stride_thins_the_recorded_grid() {
    let dense = run(&[
        "simulate",
        "--preset",
        "bastinec-constant?alpha=1&beta=1&tau=0.5",
        "--history",
        "0.5",
        "--T",
        "10",
    ]);
    let thinned = run(&[
        "simulate",
        "--preset",
        "bastinec-constant?alpha=1&beta=1&tau=0.5",
        "--history",
        "0.5",
        "--T",
        "10",
        "--stride",
        "10",
    ]);
    let dense_rows = String::from_utf8(dense.stdout).unwrap().lines().count();
    let thinned_rows = String::from_utf8(thinned.stdout).unwrap().lines().count();
    assert!(thinned_rows < dense_rows / 5);
}

#[test]
fn sweep_with_two_endpoints_gives_two_rows() {
    let out = run(&[
        "sweep",
        "--preset",
        "bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5",
        "--param",
        "mortality.mu",
        "--range",
        "0:1:2",
        "--T",
        "100",
        "--h",
        "0.02",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "value,permanent,m0,M0,K_l,K_u,tail_liminf,tail_limsup"
    );
    assert!(lines[1].starts_with("0,"));
    assert!(lines[2].starts_with("1,"));
}

#[test]
fn sweep_rejects_bad_param_path() {
    let out = run(&[
        "sweep",
        "--preset",
        "bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5",
        "--param",
        "no.such.path",
        "--range",
        "0:1:2",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("bad parameter path"));
}

#[test]
fn model_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    let out = run(&[
        "bounds",
        "--preset",
        "nicholson?d=1&beta=sin(2,0.5,1,0)&tau=0.5",
    ]);
    let from_preset: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    // materialize the same model as a JSON file and re-run
    let model = permadde::preset::preset(
        "nicholson",
        &[
            ("d".to_string(), "1".to_string()),
            ("beta".to_string(), "sin(2,0.5,1,0)".to_string()),
            ("tau".to_string(), "0.5".to_string()),
        ],
    )
    .unwrap();
    std::fs::write(&model_path, serde_json::to_string_pretty(&model).unwrap()).unwrap();
    let out = run(&["bounds", "--model", model_path.to_str().unwrap()]);
    let from_file: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(from_preset, from_file);
}

#[test]
fn check_horizon_env_is_validated() {
    let out = bin()
        .args([
            "bounds",
            "--preset",
            "bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5",
        ])
        .env("PERMADDE_CHECK_HORIZON", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);

    let out = bin()
        .args([
            "bounds",
            "--preset",
            "bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5",
        ])
        .env("PERMADDE_CHECK_HORIZON", "50")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
}
