//! End-to-end tests of the `myopic` binary: command surface, file formats,
//! exit codes, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn myopic() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_myopic"));
    // Isolate tests from the caller's environment-level seed default.
    cmd.env_remove("MYOPIC_SEED");
    cmd
}

fn output_of(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should run")
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = output_of(cmd);
    assert!(
        out.status.success(),
        "expected success\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit, not signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout should be JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn render(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut cmd = myopic();
    cmd.args(["scenario", "render"])
        .args(args)
        .arg("--out")
        .arg(&path);
    run_ok(&mut cmd);
    path
}

#[test]
fn chain_run_gathers_in_population_minus_one_steps() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = render(dir.path(), "chain.json", &["--kind", "chain", "--n", "6", "--D", "1"]);
    let trace = dir.path().join("trace.jsonl");
    let metrics = dir.path().join("metrics.csv");

    let out = run_ok(myopic().args([
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--algo",
        "mm",
        "--tie",
        "order",
        "--steps",
        "100",
        "--trace",
        trace.to_str().unwrap(),
        "--metrics",
        metrics.to_str().unwrap(),
    ]));
    let summary = stdout_json(&out);
    assert_eq!(summary["result"]["stop"], "gathered");
    assert_eq!(summary["result"]["steps"], 5);
    assert_eq!(summary["result"]["gathered"], true);
    assert_eq!(summary["result"]["final"]["distinct"], 1);
    assert_eq!(summary["result"]["final"]["radius"], 0.0);

    // 6 configurations (initial plus 5 steps) plus one closing summary line.
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.lines().count(), 7);
    // CSV: header plus one row per configuration.
    let metrics_text = std::fs::read_to_string(&metrics).unwrap();
    let lines: Vec<&str> = metrics_text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "t,omega,d_min,d_max,R,gathered,L");
    assert!(lines[6].ends_with("true,"), "final row gathered: {}", lines[6]);
}

#[test]
fn triangle_budget_run_halves_the_radius_and_never_gathers() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = render(
        dir.path(),
        "tri.json",
        &["--kind", "equilateral", "--side", "1", "--d", "2"],
    );
    let metrics = dir.path().join("metrics.csv");

    let out = run_ok(myopic().args([
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--steps",
        "45",
        "--check",
        "--metrics",
        metrics.to_str().unwrap(),
    ]));
    let summary = stdout_json(&out);
    assert_eq!(summary["result"]["stop"], "budget");
    assert_eq!(summary["result"]["steps"], 45);
    assert_eq!(summary["result"]["gathered"], false);
    assert_eq!(summary["result"]["final"]["distinct"], 3);

    let r0 = summary["result"]["initial"]["radius"].as_f64().unwrap();
    let rf = summary["result"]["final"]["radius"].as_f64().unwrap();
    let expected = r0 * 0.5_f64.powi(45);
    assert!(
        (rf - expected).abs() <= 1e-9 * expected,
        "final radius {rf}, expected {expected}"
    );

    // Both monotonicity checks ran clean.
    let checks = summary["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    for check in checks {
        assert_eq!(check["violations"], 0, "check {check}");
    }

    // The radius column halves every round.
    let metrics_text = std::fs::read_to_string(&metrics).unwrap();
    let radii: Vec<f64> = metrics_text
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(radii.len(), 46);
    for pair in radii.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((ratio - 0.5).abs() < 1e-9, "radius ratio {ratio}");
    }
}

#[test]
fn fixpoint_stops_the_triangle_at_machine_scale() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = render(
        dir.path(),
        "tri.json",
        &["--kind", "equilateral", "--side", "1", "--d", "2"],
    );
    // With a 50-round budget the halving triangle's next move drops below
    // the 1e-15 fixpoint threshold first, at round 49 — still not gathered.
    let out = run_ok(myopic().args([
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--steps",
        "50",
    ]));
    let summary = stdout_json(&out);
    assert_eq!(summary["result"]["stop"], "fixpoint");
    assert_eq!(summary["result"]["steps"], 49);
    assert_eq!(summary["result"]["gathered"], false);
    assert_eq!(summary["result"]["final"]["distinct"], 3);
}

#[test]
fn manifest_reruns_reproduce_trace_files_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = |suffix: &str| dir.path().join(suffix);

    let out = run_ok(myopic().args([
        "run",
        "--scenario",
        "random-cloud",
        "--seed",
        "7",
        "--tie",
        "random",
        "--steps",
        "25",
        "--trace",
        first("t1.jsonl").to_str().unwrap(),
        "--metrics",
        first("m1.csv").to_str().unwrap(),
    ]));
    let summary = stdout_json(&out);

    // The echoed manifest pins the resolved cloud seed and tie seed.
    let manifest = &summary["manifest"];
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["scenario"]["kind"], "random-cloud");
    assert!(manifest["scenario"]["params"]["seed"].as_u64().unwrap() > 0);
    assert_eq!(manifest["scenario"]["policy"]["tie"]["kind"], "seeded-random");

    let manifest_path = first("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string(manifest).unwrap()).unwrap();

    let rerun = run_ok(myopic().args([
        "run",
        "--manifest",
        manifest_path.to_str().unwrap(),
        "--trace",
        first("t2.jsonl").to_str().unwrap(),
        "--metrics",
        first("m2.csv").to_str().unwrap(),
    ]));
    let rerun_summary = stdout_json(&rerun);

    let bytes = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(
        bytes(&first("t1.jsonl")),
        bytes(&first("t2.jsonl")),
        "traces differ"
    );
    assert_eq!(
        bytes(&first("m1.csv")),
        bytes(&first("m2.csv")),
        "metrics differ"
    );

    // Same run outcome; only timing and output paths may differ.
    let strip = |mut v: Value| {
        v["result"]
            .as_object_mut()
            .unwrap()
            .remove("elapsed_ms");
        v.as_object_mut().unwrap().remove("manifest");
        v
    };
    assert_eq!(strip(summary.clone()), strip(rerun_summary.clone()));
    assert_eq!(
        summary["manifest"]["scenario"],
        rerun_summary["manifest"]["scenario"]
    );
    assert_eq!(
        summary["manifest"]["settings"],
        rerun_summary["manifest"]["settings"]
    );
}

#[test]
fn flags_override_manifest_fields() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("run.toml");
    std::fs::write(
        &manifest_path,
        r#"
seed = 3

[scenario]
kind = "collinear-chain"

[scenario.params]
n = 4
spacing = 1.0
dimension = 1

[settings]
max_steps = 20
eps_tie = 1e-9
eps_gather = 0.0
stop_on_gathered = true
stop_on_fixpoint = true
"#,
    )
    .unwrap();

    // As recorded: the n=4 chain gathers in 3 steps.
    let out = run_ok(myopic().args(["run", "--manifest", manifest_path.to_str().unwrap()]));
    let summary = stdout_json(&out);
    assert_eq!(summary["result"]["stop"], "gathered");
    assert_eq!(summary["result"]["steps"], 3);
    assert_eq!(summary["manifest"]["settings"]["max_steps"], 20);

    // A flag overrides the recorded budget, and the echo shows it.
    let out = run_ok(myopic().args([
        "run",
        "--manifest",
        manifest_path.to_str().unwrap(),
        "--steps",
        "2",
    ]));
    let summary = stdout_json(&out);
    assert_eq!(summary["result"]["stop"], "budget");
    assert_eq!(summary["result"]["steps"], 2);
    assert_eq!(summary["manifest"]["settings"]["max_steps"], 2);
}

#[test]
fn env_seed_acts_as_the_flag_default() {
    let dir = tempfile::tempdir().unwrap();
    let trace_flag = dir.path().join("flag.jsonl");
    let trace_env = dir.path().join("env.jsonl");
    let trace_other = dir.path().join("other.jsonl");

    run_ok(myopic().args([
        "run", "--scenario", "random-cloud", "--seed", "5", "--steps", "5",
        "--trace", trace_flag.to_str().unwrap(),
    ]));
    let mut with_env = myopic();
    with_env.env("MYOPIC_SEED", "5");
    run_ok(with_env.args([
        "run", "--scenario", "random-cloud", "--steps", "5",
        "--trace", trace_env.to_str().unwrap(),
    ]));
    run_ok(myopic().args([
        "run", "--scenario", "random-cloud", "--seed", "6", "--steps", "5",
        "--trace", trace_other.to_str().unwrap(),
    ]));

    let bytes = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(bytes(&trace_flag), bytes(&trace_env));
    assert_ne!(bytes(&trace_flag), bytes(&trace_other));
}

#[test]
fn certificate_violations_exit_one() {
    // A rule with only a sideways component drives a mutual pair apart, so
    // the monotonicity certificates must fail and the exit code must be 1.
    // (The pair lives in the plane so an orthogonal direction exists.)
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("pair.json");
    std::fs::write(
        &scenario,
        r#"{"kind": "explicit", "params": {"positions": [[0.0, 0.0], [1.0, 0.0]]}}"#,
    )
    .unwrap();
    let out = output_of(myopic().args([
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--rule",
        "linear:0.0,1.0",
        "--steps",
        "3",
        "--check",
    ]));
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("radius-monotone"), "stderr: {stderr}");
    assert!(stderr.contains("first counterexample"), "stderr: {stderr}");
    // The summary is still produced, with the violations recorded.
    let summary = stdout_json(&out);
    assert!(summary["checks"][0]["violations"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_two() {
    // Nothing to run.
    let out = output_of(myopic().arg("run"));
    assert_eq!(exit_code(&out), 2);

    // Empty scenario file.
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = output_of(myopic().args(["run", "--scenario", empty.to_str().unwrap()]));
    assert_eq!(exit_code(&out), 2);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    // Unknown suite.
    let out = output_of(myopic().args(["verify", "teleportation"]));
    assert_eq!(exit_code(&out), 2);

    // Unknown check name.
    let out = output_of(myopic().args([
        "run", "--scenario", "chain", "--checks", "perpetual-motion",
    ]));
    assert_eq!(exit_code(&out), 2);

    // Unknown flag (handled by the argument parser).
    let out = output_of(myopic().args(["run", "--warp", "9"]));
    assert_eq!(exit_code(&out), 2);

    // Bad manifest.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "settings = \"yes\"").unwrap();
    let out = output_of(myopic().args(["run", "--manifest", bad.to_str().unwrap()]));
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_reports_pass_lines_per_suite() {
    let out = run_ok(myopic().args(["verify", "order-gathering", "--trials", "24"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("order-gathering: pass (checked 24)"),
        "stdout: {stdout}"
    );
}

#[test]
fn verify_all_covers_every_suite() {
    let out = run_ok(myopic().args(["verify", "all", "--trials", "2", "--jobs", "2"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for suite in [
        "monotonicity",
        "alpha-contraction",
        "midpoint-lemma",
        "order-gathering",
        "pair-structure",
        "fault-f1",
        "fault-f2",
        "impossibility-n6",
        "seb-oracle",
    ] {
        assert!(
            stdout.contains(&format!("{suite}: pass")),
            "missing {suite} in: {stdout}"
        );
    }
}

#[test]
fn scenario_list_names_every_kind() {
    let out = run_ok(myopic().args(["scenario", "list"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for kind in [
        "equilateral-triangle",
        "two-triangles",
        "collinear-chain",
        "random-cloud",
        "explicit",
    ] {
        assert!(stdout.contains(kind), "missing {kind} in: {stdout}");
    }
}

#[test]
fn render_spaces_chain_positions_as_requested() {
    let out = run_ok(myopic().args([
        "scenario", "render", "--kind", "chain", "--n", "8", "--D", "2",
    ]));
    let file = stdout_json(&out);
    assert_eq!(file["kind"], "explicit");
    let positions = file["params"]["positions"].as_array().unwrap();
    assert_eq!(positions.len(), 8);
    for (i, p) in positions.iter().enumerate() {
        assert_eq!(p[0].as_f64().unwrap(), 2.0 * i as f64);
    }
}

#[test]
fn render_binds_the_cyclic_adversary_to_triangles() {
    let out = run_ok(myopic().args([
        "scenario", "render", "--kind", "equilateral", "--side", "1", "--d", "2",
    ]));
    let file = stdout_json(&out);
    assert_eq!(file["kind"], "explicit");
    assert_eq!(file["params"]["positions"].as_array().unwrap().len(), 3);
    assert_eq!(file["policy"]["tie"]["kind"], "equilateral-cyclic");
    assert_eq!(file["policy"]["ortho"]["kind"], "equilateral-cyclic");
}

#[test]
fn render_rejects_inapplicable_parameters() {
    let out = output_of(myopic().args([
        "scenario", "render", "--kind", "chain", "--side", "2",
    ]));
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--side"), "stderr: {stderr}");

    let out = output_of(myopic().args([
        "scenario", "render", "--kind", "chain", "--n", "1",
    ]));
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn rendered_toml_scenarios_run_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = render(
        dir.path(),
        "tri.toml",
        &["--kind", "equilateral", "--side", "2", "--d", "2"],
    );
    let out = run_ok(myopic().args([
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--steps",
        "10",
    ]));
    let summary = stdout_json(&out);
    // The cyclic adversary survives the round trip: still a halving livelock.
    assert_eq!(summary["result"]["stop"], "budget");
    assert_eq!(summary["result"]["final"]["distinct"], 3);
    let r0 = summary["result"]["initial"]["radius"].as_f64().unwrap();
    let rf = summary["result"]["final"]["radius"].as_f64().unwrap();
    assert!((rf - r0 * 0.5_f64.powi(10)).abs() < 1e-12);
}

#[test]
fn oracle_seb_agrees_with_hand_computed_square() {
    let out = run_ok(myopic().args([
        "oracle", "seb", "--points", "[[0,0],[1,0],[0,1],[1,1]]", "--brute",
    ]));
    let result = stdout_json(&out);
    assert_eq!(result["points"], 4);
    assert_eq!(result["dimension"], 2);
    let radius = result["radius"].as_f64().unwrap();
    assert!((radius - 0.5_f64.sqrt()).abs() < 1e-12);
    assert_eq!(result["center"][0].as_f64().unwrap(), 0.5);
    assert_eq!(result["oracle"]["agrees"], true);

    // Scenario files are accepted as point sources.
    let dir = tempfile::tempdir().unwrap();
    let scenario = render(dir.path(), "chain.json", &["--kind", "chain", "--n", "3"]);
    let out = run_ok(myopic().args([
        "oracle", "seb", "--input", scenario.to_str().unwrap(),
    ]));
    let result = stdout_json(&out);
    assert_eq!(result["points"], 3);
    assert_eq!(result["radius"].as_f64().unwrap(), 1.0);

    // Garbage input is a usage error.
    let out = output_of(myopic().args(["oracle", "seb", "--points", "nonsense"]));
    assert_eq!(exit_code(&out), 2);
}
