use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TRIANGLE: &str = r#"{"n": 3, "edges": [[0, 1, -1.0], [1, 2, -1.0], [0, 2, -1.0]]}"#;

fn sigdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigdyn"))
        .args(args)
        .env_remove("SIGDYN_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_triangle_summary() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "tri.json", TRIANGLE);
    let o = sigdyn(&["analyze", "--graph", s(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("lambda = (0.5, 0.5, 2)"), "{out}");
    assert!(out.contains("pi1 = 2,"), "{out}");
    assert!(out.contains("balanced = false"), "{out}");
    assert!(out.contains("frustration = 1 (exact)"), "{out}");
}

#[test]
fn exact_frustration_json() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "tri.json", TRIANGLE);
    let o = sigdyn(&["frustration", "--graph", s(&g), "--exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"].as_f64(), Some(1.0));
    assert_eq!(v["exact"].as_bool(), Some(true));
    assert_eq!(v["signature"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_graph_exits_two_with_position() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "bad.json",
        "{\"n\": 3,\n \"edges\": [[0, 1, -1.0],\n",
    );
    let o = sigdyn(&["analyze", "--graph", s(&g)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("graph::build_graph"), "{err}");
    assert!(err.contains("line 3"), "{err}");

    let g = write(dir.path(), "field.json", r#"{"n": 3, "edgez": []}"#);
    let o = sigdyn(&["analyze", "--graph", s(&g)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edgez"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_two() {
    let o = sigdyn(&["analyze"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "c.json", r#"{"schema": 7, "mode": "analyze"}"#);
    let o = sigdyn(&["run", "--config", s(&c)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));
    let o = sigdyn(&["sweep-ct", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "tri.json", TRIANGLE);
    let o = sigdyn(&[
        "simulate-ct",
        "--graph",
        s(&g),
        "--pi",
        "50",
        "--step",
        "40",
        "--horizon",
        "4000",
        "--x0",
        "random",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(
        stderr(&o).contains("dynamics_ct::integrate"),
        "{}",
        stderr(&o)
    );
}

fn run_twice(args: &[&str], dir: &Path, outputs: &[&str]) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut first = Vec::new();
    for round in 0..2 {
        let mut full: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        for name in outputs {
            let ext = name.rsplit('.').next().unwrap();
            full.push(format!("--{ext}"));
            full.push(s(&dir.join(format!("{round}-{name}"))).to_string());
        }
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let o = sigdyn(&refs);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        if round == 0 {
            first = outputs
                .iter()
                .map(|n| std::fs::read(dir.join(format!("0-{n}"))).unwrap())
                .collect();
        }
    }
    outputs
        .iter()
        .zip(first)
        .map(|(n, a)| (a, std::fs::read(dir.join(format!("1-{n}"))).unwrap()))
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "tri.json", TRIANGLE);
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--graph", s(&g), "--eps-step", "0.3"],
        vec!["sweep-ct", "--graph", s(&g), "--grid", "0.5:0.25:4"],
        vec![
            "sweep-dt",
            "--graph",
            s(&g),
            "--grid",
            "0.5:0.1:3",
            "--eps-step",
            "0.45",
        ],
        vec!["simulate-ct", "--graph", s(&g), "--pi", "4", "--seed", "3"],
        vec![
            "ensemble", "--count", "6", "--n", "12", "--p", "0.5", "--betas", "0.2,0.4",
        ],
    ];
    for args in cases {
        let outs: &[&str] = if args[0] == "analyze" {
            &["out.json"]
        } else {
            &["out.json", "out.csv"]
        };
        for (a, b) in run_twice(&args, dir.path(), outs) {
            assert!(!a.is_empty());
            assert_eq!(a, b, "{args:?}");
        }
    }
}

#[test]
fn jobs_do_not_change_results() {
    let dir = TempDir::new().unwrap();
    let args = [
        "ensemble", "--count", "8", "--n", "10", "--p", "0.6", "--betas", "0.3",
    ];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let mut one: Vec<&str> = args.to_vec();
    one.extend(["--jobs", "1", "--csv", s(&a)]);
    let mut two: Vec<&str> = args.to_vec();
    two.extend(["--jobs", "3", "--csv", s(&b)]);
    assert_eq!(sigdyn(&one).status.code(), Some(0));
    assert_eq!(sigdyn(&two).status.code(), Some(0));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn gen_then_analyze_and_config_run() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.json");
    let o = sigdyn(&[
        "gen",
        "--n",
        "10",
        "--p",
        "0.5",
        "--beta",
        "0.3",
        "--seed",
        "4",
        "--out",
        s(&g),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = sigdyn(&[
        "gen", "--n", "10", "--p", "0.5", "--beta", "0.3", "--seed", "4",
    ]);
    assert_eq!(
        stdout(&again).as_bytes(),
        std::fs::read(&g).unwrap().as_slice()
    );

    let json = dir.path().join("a.json");
    let cfg = format!(
        r#"{{"schema": 1, "mode": "analyze", "graph": {{"file": "{}"}}, "outputs": {{"json": "{}"}}}}"#,
        s(&g),
        s(&json)
    );
    let c = write(dir.path(), "c.json", &cfg);
    let o = sigdyn(&["run", "--config", s(&c)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["n"].as_u64(), Some(10));
    assert!(v["bound"]["holds"].as_bool().unwrap());
}

#[test]
fn generated_graph_in_config() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("d.csv");
    let cfg = format!(
        r#"{{"schema": 1, "mode": "simulate-dt",
            "graph": {{"generate": {{"n": 8, "edge_prob": 0.6, "negative_prob": 0.5, "seed": 2}}}},
            "profile": {{"kind": "rational", "k": 2.0}},
            "pi": 1.5, "eps_step": 0.1, "x0": "random", "iters": 500,
            "outputs": {{"csv": "{}"}}}}"#,
        s(&csv)
    );
    let c = write(dir.path(), "c.json", &cfg);
    let o = sigdyn(&["simulate-dt", "--config", s(&c), "--pi", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("pi = 0.5"), "{}", stdout(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x1,"));
}

#[test]
fn edge_csv_graph_input() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "tri.csv", "i,j,w\n0,1,-1\n1,2,-1\n0,2,-1\n");
    let o = sigdyn(&["analyze", "--graph", s(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lambda = (0.5, 0.5, 2)"));
}
