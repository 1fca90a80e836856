use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const P3: &str = r#"{
  "schema": 1,
  "players": 3,
  "links": [["1", "2"], ["2", "3"]],
  "weights": [1, 2, 1],
  "value": {"kind": "table", "entries": [
    {"network": [["1", "2"]], "value": 1},
    {"network": [["2", "3"]], "value": 1},
    {"network": [["1", "2"], ["2", "3"]], "value": 3}
  ]}
}"#;

fn wpv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpv"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p3(dir: &TempDir) -> String {
    write(dir.path(), "p3.json", P3)
        .to_str()
        .unwrap()
        .to_owned()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn value_routes_agree_on_p3() {
    let dir = TempDir::new().unwrap();
    let doc = json_of(&wpv(&["value", &p3(&dir), "--rational"]));
    assert_eq!(doc["agree"], json!(true));
    for route in ["dividends", "link-shapley", "recursive"] {
        assert_eq!(doc["allocations"][route], json!(["1/2", "2", "1/2"]));
    }
    let doc = json_of(&wpv(&["value", &p3(&dir), "--method", "recursive"]));
    let got = doc["allocations"]["recursive"].as_array().unwrap();
    for (x, want) in got.iter().zip([0.5, 2.0, 0.5]) {
        assert!((x.as_f64().unwrap() - want).abs() <= 1e-9, "{got:?}");
    }
}

#[test]
fn classical_value_as_csv() {
    let dir = TempDir::new().unwrap();
    let out = wpv(&[
        "value",
        &p3(&dir),
        "--classical",
        "--method",
        "dividends",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with(",0.75"), "{text}");
    assert!(rows[1].ends_with(",1.5"), "{text}");
}

#[test]
fn classical_rule_fails_weighted_balanced_contributions() {
    let dir = TempDir::new().unwrap();
    let doc = json_of(&wpv(&[
        "axioms",
        &p3(&dir),
        "--rule",
        "classical",
        "--check",
        "wbl-contributions",
        "--rational",
    ]));
    let report = &doc["reports"][0];
    assert_eq!(report["verdict"], json!("fails"));
    assert_eq!(report["witness"]["players"], json!(["1", "2"]));
    assert_eq!(report["witness"]["lhs"], json!("2/3"));
    assert_eq!(report["witness"]["rhs"], json!("1/3"));

    let doc = json_of(&wpv(&["axioms", &p3(&dir), "--rational"]));
    for report in doc["reports"].as_array().unwrap() {
        assert_ne!(report["verdict"], json!("fails"), "{report}");
    }
}

#[test]
fn mechanism_sweep_reaches_target() {
    let dir = TempDir::new().unwrap();
    let doc = json_of(&wpv(&[
        "mechanism",
        &p3(&dir),
        "--rational",
        "--deviations",
    ]));
    assert_eq!(doc["payoffs_match"], json!(true));
    assert_eq!(doc["expected_payoffs"], json!([0.5, 2.0, 0.5]));
    assert_eq!(doc["deviations"]["profitable"], json!([]));
    assert!(doc["claims"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["holds"] == json!(true)));
}

#[test]
fn literal_mode_reports_discrepancy_and_writes_trace() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let doc = json_of(&wpv(&[
        "mechanism",
        &p3(&dir),
        "--rational",
        "--mode",
        "literal",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    let note = &doc["literal_discrepancies"][0];
    assert_eq!(note["net_bids"][0], json!(["1", "-4/9"]));
    assert!(note["note"].as_str().unwrap().contains("do not cancel"));
    let lines: Vec<Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["event"], json!("start"));
    assert_eq!(lines.last().unwrap()["event"], json!("final"));
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{");
    assert_eq!(
        wpv(&["value", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let looped = P3.replace(r#"["2", "3"]], "value": 1"#, r#"["2", "2"]], "value": 1"#);
    let looped = write(dir.path(), "loop.json", &looped);
    assert_eq!(
        wpv(&["value", looped.to_str().unwrap()]).status.code(),
        Some(3)
    );

    let missing = P3.replace(r#"{"network": [["2", "3"]], "value": 1},"#, "");
    let missing = write(dir.path(), "missing.json", &missing);
    let out = wpv(&["value", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("{2-3}"));

    assert_eq!(wpv(&["value", "--bogus"]).status.code(), Some(5));
    assert_eq!(wpv(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_network_gives_zero_vector() {
    let dir = TempDir::new().unwrap();
    let empty =
        r#"{"schema": 1, "players": 3, "links": [], "value": {"kind": "table", "entries": []}}"#;
    let path = write(dir.path(), "empty.json", empty);
    let doc = json_of(&wpv(&["value", path.to_str().unwrap(), "--rational"]));
    assert_eq!(doc["allocations"]["dividends"], json!(["0", "0", "0"]));
}

#[test]
fn generate_is_deterministic_and_loadable() {
    let dir = TempDir::new().unwrap();
    let a = wpv(&["generate", "random-table", "--players", "5", "--seed", "4"]);
    let b = wpv(&["generate", "random-table", "--players", "5", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let path = write(
        dir.path(),
        "gen.json",
        std::str::from_utf8(&a.stdout).unwrap(),
    );
    let doc = json_of(&wpv(&["compare", path.to_str().unwrap()]));
    assert_eq!(doc["command"], json!("compare"));

    let out = wpv(&[
        "generate",
        "coauthor",
        "--players",
        "3",
        "--links",
        "1-2,2-3",
        "--projects",
        "1,2,1",
    ]);
    let path = write(
        dir.path(),
        "co.json",
        std::str::from_utf8(&out.stdout).unwrap(),
    );
    let doc = json_of(&wpv(&["value", path.to_str().unwrap(), "--rational"]));
    assert_eq!(doc["agree"], json!(true));

    assert_eq!(
        wpv(&["generate", "coauthor", "--format", "csv"])
            .status
            .code(),
        Some(5)
    );
}

#[test]
fn out_file_is_written_atomically_and_reproducibly() {
    let dir = TempDir::new().unwrap();
    let input = p3(&dir);
    let out = dir.path().join("result.json");
    let run = || {
        let o = wpv(&[
            "mechanism",
            &input,
            "--rational",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
        std::fs::read(&out).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn batches_produce_arrays_and_keep_going_after_errors() {
    let dir = TempDir::new().unwrap();
    let good = p3(&dir);
    let bad = write(dir.path(), "bad.json", "[")
        .to_str()
        .unwrap()
        .to_owned();
    let out = wpv(&["dividends", &good, &bad]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 1);
}
