use std::path::Path;
use std::process::{Command, Output};

fn saw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulled-saw"))
        .args(args)
        .env_remove("SAW_WORKERS")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn last_json(bytes: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(bytes);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("a JSON record");
    serde_json::from_str(line).unwrap()
}

#[test]
fn enumerate_writes_hand_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("positive.csv");
    let o = saw(&["enumerate", "--dim", "2", "--nmax", "2", "--class", "positive", "--out", s(&out), "--no-cache"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("positive,2,2,")).collect();
    assert_eq!(rows, ["positive,2,2,0,1,2", "positive,2,2,0,2,1", "positive,2,2,1,1,2", "positive,2,2,2,0,2"]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("positive.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["provenance"], "exact");
    assert_eq!(manifest["n_max"], 2);
}

#[test]
fn pipeline_from_tables_to_force() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    for class in ["positive", "positive-unfolded", "full-lattice", "plane"] {
        let out = dir.path().join(format!("{class}.csv"));
        let o = saw(&[
            "enumerate", "--dim", "2", "--nmax", "12", "--class", class, "--out", s(&out), "--cache-dir", s(&cache),
        ]);
        assert!(o.status.success(), "{class}: {}", String::from_utf8_lossy(&o.stderr));
    }

    let o = saw(&["check", "--tables", s(dir.path()), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let analysis = dir.path().join("analysis.json");
    let o = saw(&["analyze", "--tables", s(dir.path()), "--out", s(&analysis)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&analysis).unwrap()).unwrap();
    assert!(v.is_object());

    let phase = dir.path().join("phase.tsv");
    let o = saw(&["phase", "--tables", s(dir.path()), "--a-grid", "4,8,16", "--out", s(&phase)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&phase).unwrap();
    let mut rows = text.lines().filter(|l| !l.starts_with('#')).skip(1);
    let ys: Vec<f64> = rows.by_ref().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(ys.len(), 3);
    assert!(ys.windows(2).all(|w| w[1] > w[0]), "{ys:?}");

    let force = dir.path().join("force.tsv");
    let o = saw(&["force", "--tables", s(dir.path()), "--epsilon", "-1", "--out", s(&force)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&force).unwrap().contains("T\ta\tf_c\thalf_width"));

    let thermo = dir.path().join("thermo.csv");
    let o = saw(&[
        "thermo", "--table", s(&dir.path().join("positive.csv")), "--a-grid", "-1:0.5:1", "--y-grid", "1,2",
        "--out", s(&thermo),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two_with_json() {
    let o = saw(&["enumerate", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(last_json(&o.stderr)["error"], "usage");
}

#[test]
fn runtime_errors_exit_one_with_kind() {
    let dir = tempfile::tempdir().unwrap();
    let o = saw(&["phase", "--tables", s(&dir.path().join("missing")), "--out", s(&dir.path().join("p.tsv"))]);
    assert_eq!(o.status.code(), Some(1));
    let rec = last_json(&o.stderr);
    assert!(rec["error"].is_string() && rec["message"].is_string(), "{rec}");

    let bad = dir.path().join("bad.csv");
    let o = saw(&["enumerate", "--dim", "2", "--nmax", "3", "--class", "plane", "--out", s(&bad), "--no-cache"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&bad).unwrap().replace("plane,2,3,3,0,2", "plane,2,3,3,0,3");
    std::fs::write(&bad, text).unwrap();
    let o = saw(&["thermo", "--table", s(&bad), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(last_json(&o.stderr)["error"], "checksum");
}

#[test]
fn mc_is_reproducible_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = saw(&[
            "mc", "--dim", "2", "--nmax", "6", "--tours", "3000", "--seed", "9", "--batch-size", "500", "--workers",
            workers, "--out", s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "4"));
}

#[test]
fn zero_workers_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = saw(&["enumerate", "--dim", "2", "--nmax", "3", "--class", "plane", "--out", s(&out), "--workers", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(last_json(&o.stderr)["error"], "invalid-argument");
}
