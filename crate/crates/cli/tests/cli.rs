use std::path::Path;
use std::process::{Command, Output};

use ebitnet::protocols::ProtocolTrace;

const BIN: &str = env!("CARGO_BIN_EXE_ebitnet");

fn ebitnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env_remove("EBITNET_MAX_QUBITS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn every_protocol_passes_its_own_audit() {
    let dir = tempfile::tempdir().unwrap();
    for (protocol, n) in [
        ("teleport", "2"),
        ("two-qubit-op", "2"),
        ("star-op", "4"),
        ("swap-comm", "2"),
        ("swap-entangle", "2"),
        ("perm-entangle", "5"),
        ("perm-comm", "4"),
        ("ps", "6"),
        ("ps-cp", "5"),
    ] {
        let o = ebitnet(dir.path(), &["simulate", protocol, "--n", n, "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0), "{protocol}: {}", stdout(&o));
        let trace = format!("{protocol}.trace.jsonl");
        let graphs = format!("{protocol}.graphs.json");
        let o = ebitnet(dir.path(), &["audit", "--trace", &trace, "--graphs", &graphs, "--replay"]);
        assert_eq!(o.status.code(), Some(0), "{protocol}: {}", stdout(&o));
        assert!(stdout(&o).contains("events match the trace"));
    }
}

#[test]
fn simulate_reports_the_documented_resources() {
    let dir = tempfile::tempdir().unwrap();
    let o = ebitnet(dir.path(), &["simulate", "star-op", "--n", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ebits consumed 6, created 0; bits sent 12"));
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("star-op.ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["ledger"]["total_ebits_consumed"], "6");
    assert_eq!(ledger["ledger"]["total_bits_sent"], "12");

    let o = ebitnet(dir.path(), &["simulate", "swap-entangle"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("created 2"));
    assert!(out.contains("entropy across the cut: 2.000000000000"));

    let o = ebitnet(dir.path(), &["simulate", "swap-comm"]);
    let text = std::fs::read_to_string(dir.path().join("swap-comm.trace.jsonl")).unwrap();
    let trace = ProtocolTrace::parse_jsonl(&text).unwrap();
    assert!(o.status.success());
    assert_eq!(trace.header.protocol, "swap-comm");
    let audit = ebitnet(
        dir.path(),
        &["audit", "--trace", "swap-comm.trace.jsonl", "--graphs", "swap-comm.graphs.json"],
    );
    assert!(stdout(&audit).contains("ebits consumed 2, created 0; bits sent 0, decoded 4"));
}

#[test]
fn invalid_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "ps", "--n", "3"][..],
        &["simulate", "ps-cp", "--n", "4"],
        &["simulate", "teleport", "--n", "3"],
        &["simulate", "star-op", "--n", "3", "--hub", "5"],
        &["simulate", "no-such-protocol"],
        &["bounds", "--n-max", "65"],
        &["bounds", "--n-max", "1"],
        &["bounds", "--format", "dot"],
        &["audit", "--trace", "missing.jsonl", "--graphs", "missing.json"],
    ] {
        assert_eq!(ebitnet(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(BIN)
        .current_dir(dir.path())
        .env("EBITNET_MAX_QUBITS", "lots")
        .args(["simulate", "teleport"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn a_small_registry_cap_is_a_postcondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .current_dir(dir.path())
        .env("EBITNET_MAX_QUBITS", "5")
        .args(["simulate", "star-op", "--n", "5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bounds_rows_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = ebitnet(dir.path(), &["bounds", "--n-max", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.contains(&"4,entanglement,6,6,,4,6"));

    let o = ebitnet(dir.path(), &["bounds", "--n-max", "2"]);
    assert_eq!(stdout(&o).lines().skip(1).collect::<Vec<_>>(), ["2,entanglement,2,2,,2,2", "2,communication,4,4,,4,4"]);

    let o = ebitnet(dir.path(), &["bounds", "--n-max", "15", "--format", "json", "--output", "b.json"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd n >= 11"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert!(v.is_array() || v.is_object());
}

#[test]
fn symmetrise_small_and_large_inputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("edge.json"),
        r#"{"n": 2, "entanglement": [["0","5/2"],["5/2","0"]], "communication": [["0","1"],["0","0"]]}"#,
    )
    .unwrap();
    let o = ebitnet(dir.path(), &["symmetrise", "--input", "edge.json", "--output", "sym.dot", "--format", "dot"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "e = 5"));
    assert!(out.contains("agrees"));
    assert!(std::fs::read_to_string(dir.path().join("sym.dot")).unwrap().contains("graph"));

    let n = 9;
    let row = |i: usize| -> Vec<String> { (0..n).map(|j| if i == j { "0".into() } else { "1".into() }).collect() };
    let m: Vec<Vec<String>> = (0..n).map(row).collect();
    let big = serde_json::json!({"n": n, "entanglement": m, "communication": m});
    std::fs::write(dir.path().join("big.json"), big.to_string()).unwrap();
    let o = ebitnet(dir.path(), &["symmetrise", "--input", "big.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("skipped"));

    std::fs::write(dir.path().join("bad.json"), "{\"n\": 2, \"entanglement\": [[\"0\"]]").unwrap();
    assert_eq!(ebitnet(dir.path(), &["symmetrise", "--input", "bad.json"]).status.code(), Some(2));
}

#[test]
fn audit_flags_a_forged_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = vec![r#"{"kind":"header","parties":[1,2],"payload":{"protocol":"forged","n":2,"seed":0,"hub":null}}"#.to_string()];
    for _ in 0..2 {
        lines.push(r#"{"kind":"ebit_consume","parties":[1,2],"payload":{"pair":[1,2]}}"#.into());
    }
    for _ in 0..3 {
        lines.push(r#"{"kind":"ebit_create","parties":[1,2],"payload":{"pair":[1,2]}}"#.into());
    }
    std::fs::write(dir.path().join("forged.jsonl"), lines.join("\n")).unwrap();
    std::fs::write(
        dir.path().join("g.json"),
        r#"{"n": 2, "entanglement": [["0","2"],["2","0"]], "communication": [["0","0"],["0","0"]]}"#,
    )
    .unwrap();
    let o = ebitnet(dir.path(), &["audit", "--trace", "forged.jsonl", "--graphs", "g.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation [entanglement across cut]"));
    let o = ebitnet(dir.path(), &["audit", "--trace", "forged.jsonl", "--graphs", "g.json", "--replay"]);
    assert_eq!(o.status.code(), Some(2));
}
