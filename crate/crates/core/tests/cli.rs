mod common;

use std::process::{Command, Output};

use common::fixture;

fn procmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procmine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn textile() -> String {
    fixture("textile_log.csv").to_str().unwrap().to_string()
}

#[test]
fn stats_text() {
    let out = procmine(&["stats", &textile()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Events  443"), "{text}");
    assert!(text.contains("Cases  33"), "{text}");
}

#[test]
fn frequency_json() {
    let out = procmine(&["frequency", &textile(), "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[0]["activity"], "Weaving");
    assert!((rows[0]["relative_frequency"].as_f64().unwrap() - 36.57).abs() < 0.005);
    assert_eq!(rows.as_array().unwrap().len(), 14);
}

#[test]
fn variants_csv_has_header() {
    let out = procmine(&["variants", &textile(), "-o", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().count() > 1);
}

#[test]
fn cluster_json_is_reproducible() {
    let args = [
        "cluster",
        &textile(),
        "-k",
        "2",
        "--seed",
        "7",
        "--output",
        "json",
    ];
    let a = procmine(&args);
    let b = procmine(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["assignments"].as_array().unwrap().len(), 33);
}

#[test]
fn map_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.dot");
    let out = procmine(&[
        "map",
        &textile(),
        "--mode",
        "total",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(
        stdout(&procmine(&["map", &textile(), "--mode", "total"])),
        dot
    );
}

#[test]
fn bottlenecks_respect_top_n() {
    let out = procmine(&[
        "bottlenecks",
        &textile(),
        "--mode",
        "mean",
        "--top-n",
        "3",
        "-o",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn split_writes_one_file_per_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let out = procmine(&[
        "split",
        &textile(),
        "-k",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut events = 0;
    for i in 0..3 {
        let text = std::fs::read_to_string(dir.path().join(format!("cluster_{i}.csv"))).unwrap();
        events += text.lines().count() - 1;
    }
    assert_eq!(events, 443);
}

#[test]
fn gen_then_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("gen.csv");
    let truth = dir.path().join("truth.csv");
    let spec = fixture("two_chains.toml");
    let out = procmine(&[
        "gen",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        log.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::read_to_string(&truth).unwrap().lines().count(), 41);
    let out = procmine(&["cluster", log.to_str().unwrap(), "-k", "2", "-o", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 41);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# run settings\noutput = json\nk = 3\nseed = 7\n").unwrap();
    let out = procmine(&[
        "cluster",
        &textile(),
        "--config",
        cfg.to_str().unwrap(),
        "-k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["seed"], 7);
}

#[test]
fn mxml_input() {
    let out = procmine(&[
        "stats",
        fixture("minimal.mxml").to_str().unwrap(),
        "-o",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["events"], 3);
}

#[test]
fn exit_codes() {
    assert_eq!(procmine(&["stats"]).status.code(), Some(1));
    assert_eq!(procmine(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        procmine(&["stats", "/nonexistent/log.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        procmine(&["cluster", &textile(), "--tau", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(procmine(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "case_id,activity,timestamp\nc1,A,yesterday\n").unwrap();
    let out = procmine(&["stats", bad.to_str().unwrap(), "--strict"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = procmine(&["stats", bad.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "all rows rejected leaves an empty log"
    );

    let xml = dir.path().join("broken.mxml");
    std::fs::write(&xml, "<WorkflowLog><Process>").unwrap();
    assert_eq!(
        procmine(&["stats", xml.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
