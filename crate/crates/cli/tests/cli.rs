//! End-to-end checks of the binary: exit codes, pipe composition, and
//! output formats, driven through real child processes.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caching-games"))
}

/// Runs the binary with `args`, feeding `stdin` when given. Output buffers
/// here are small enough that a synchronous write cannot deadlock.
fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary should spawn");
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .expect("stdin requested")
            .write_all(text.as_bytes())
            .expect("stdin write");
    }
    child.wait_with_output().expect("binary should exit")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn scenario_json(name: &str, params: &[&str]) -> String {
    let mut args = vec!["scenario", name];
    for p in params {
        args.push("--param");
        args.push(p);
    }
    let out = run(&args, None);
    assert!(out.status.success(), "scenario failed: {}", stderr_str(&out));
    stdout_str(&out)
}

#[test]
fn scenario_piped_into_analyze_reports_the_chain_ratio() {
    let net = scenario_json("fig4_poa_chain", &["I=10"]);
    let out = run(&["analyze"], Some(&net));
    assert!(out.status.success(), "analyze failed: {}", stderr_str(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let poa = report["poa_exact"].as_f64().expect("poa_exact present");
    // Worst equilibrium keeps only the head item cached; optimum caches the
    // nine tail items at the middle node: ratio 101/992.
    assert!((poa - 101.0 / 992.0).abs() < 1e-9, "poa_exact = {poa}");
    assert_eq!(report["alpha"].as_u64(), Some(2));
}

#[test]
fn psne_exits_2_with_a_loop_witness_when_no_equilibrium_exists() {
    let net = scenario_json("fig2_triangle", &[]);
    let out = run(&["psne"], Some(&net));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(
        err.contains("1 -> 3 -> 2 -> 1"),
        "missing loop witness: {err}"
    );
}

#[test]
fn psne_finds_a_verified_equilibrium_after_the_reroute() {
    let net = scenario_json("fig3_no_loop", &[]);
    let out = run(&["psne", "--seed", "5"], Some(&net));
    assert!(out.status.success(), "psne failed: {}", stderr_str(&out));
    let r: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(r["method"].as_str(), Some("state_graph"));
    assert_eq!(r["verified"].as_bool(), Some(true));
    assert_eq!(r["beta"].as_f64(), Some(1.0));
}

#[test]
fn psne_all_confirms_emptiness_and_existence() {
    let looped = scenario_json("fig2_triangle", &[]);
    let out = run(&["psne-all"], Some(&looped));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["count"].as_u64(), Some(0));
    assert!(v["welfare_worst"].is_null());

    let rerouted = scenario_json("fig3_no_loop", &[]);
    let out = run(&["psne-all"], Some(&rerouted));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let count = v["count"].as_u64().unwrap();
    assert!(count >= 1);
    assert_eq!(v["equilibria"].as_array().unwrap().len(), count as usize);
    assert!(v["welfare_worst"].as_f64().unwrap() <= v["welfare_best"].as_f64().unwrap());
}

#[test]
fn validate_accepts_the_shipped_backbone_description() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/abilene.json");
    let out = run(&["validate", path], None);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).starts_with("ok: 11 nodes"));
}

#[test]
fn validate_rejects_garbage_and_structural_violations() {
    let out = run(&["validate"], Some("not json"));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("error:"));

    // Parses fine but has a negative capacity, so validation must fail.
    let bad = r#"{
        "nodes": ["a", "b"],
        "items": [{ "id": "x" }],
        "edges": [
            { "from": "a", "to": "b", "cost": 1.0 },
            { "from": "b", "to": "a", "cost": 1.0 }
        ],
        "capacities": { "a": -1.0 },
        "servers": { "x": ["b"] }
    }"#;
    let out = run(&["validate"], Some(bad));
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_str(&out);
    assert!(err.contains("capacity"), "stderr: {err}");
}

#[test]
fn unknown_scenario_and_bad_param_exit_1() {
    let out = run(&["scenario", "nosuch"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("unknown scenario"));

    let out = run(&["scenario", "fig1", "--param", "oops"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("key=value"));
}

#[test]
fn opt_exit_code_distinguishes_limit_from_input() {
    let net = scenario_json("abilene", &["seed=0"]);
    // 11 nodes, 10 items, capacity 1: the profile space dwarfs any sane
    // enumeration limit.
    let out = run(&["opt", "--limit", "1000"], Some(&net));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("exceeds the limit"));

    let out = run(&["opt", "--limit", "1000"], Some("not json"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn upper_bounds_the_exact_optimum_on_the_paradox_network() {
    let net = scenario_json("fig5_paradox_pair", &[]);
    let out = run(&["opt"], Some(&net));
    assert!(out.status.success());
    let opt: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let g = opt["welfare_opt_exact"].as_f64().unwrap();
    assert!((g - 5.0).abs() < 1e-9, "optimum = {g}");

    let out = run(&["upper"], Some(&net));
    assert!(out.status.success());
    let up: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let l = up["welfare_opt_upper"].as_f64().unwrap();
    assert!(l >= g - 1e-6, "upper {l} below optimum {g}");
}

#[test]
fn approx_psne_handles_sized_items() {
    let net = scenario_json(
        "random",
        &["n=4", "items=3", "sizes=random", "seed=2", "capacity=3"],
    );
    let out = run(&["approx-psne"], Some(&net));
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let r: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(r["method"].as_str(), Some("approx_sequential"));
    assert_eq!(r["beta"].as_f64(), Some(2.0));
    assert_eq!(r["verified"].as_bool(), Some(true));
}

#[test]
fn props_renders_names_not_indices() {
    let net = scenario_json("fig2_triangle", &[]);
    let out = run(&["props"], Some(&net));
    assert!(out.status.success());
    let p: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(p["has_mixed_request_loop"].as_bool(), Some(true));
    let witness: Vec<&str> = p["loop_witness"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(witness, ["1", "3", "2", "1"]);
}

#[test]
fn scenario_out_writes_a_file_that_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let out = run(
        &[
            "scenario",
            "grid",
            "--param",
            "seed=4",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let out = run(&["validate", path.to_str().unwrap()], None);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).starts_with("ok: 16 nodes"));
}

#[test]
fn experiment_emits_deterministic_csv_and_a_summary() {
    let cfg = r#"{
        "scenario": { "name": "random", "params": { "n": 5, "items": 3 } },
        "sweep": { "capacity": [1.0, 2.0] },
        "trials": 3,
        "base_seed": 11,
        "metrics": ["G_ne", "G_opt_exact", "ratio"]
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg).unwrap();

    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for p in [&csv_a, &csv_b] {
        let out = run(
            &[
                "experiment",
                cfg_path.to_str().unwrap(),
                "--out",
                p.to_str().unwrap(),
            ],
            None,
        );
        assert!(out.status.success(), "stderr: {}", stderr_str(&out));
        // With --out, the per-point summary goes to standard output.
        let summary = stdout_str(&out);
        assert!(summary.contains("ratio_exact"), "summary: {summary}");
    }
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "CSV must be byte-identical across runs");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("sweep,trial,seed,G_ne,G_opt,L_upper,ratio,status")
    );
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn experiment_without_out_prints_csv_to_stdout() {
    let cfg = r#"{
        "scenario": { "name": "random", "params": { "n": 4, "items": 2 } },
        "sweep": { "capacity": [1.0] },
        "trials": 1,
        "metrics": ["G_ne", "L_upper", "ratio"]
    }"#;
    let out = run(&["experiment"], Some(cfg));
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let csv = stdout_str(&out);
    assert!(csv.starts_with("sweep,trial,seed,"));
    assert!(stderr_str(&out).contains("ratio_upper"));
}
