use std::path::Path;
use std::process::{Command, Output};

use mgm_core::fixtures::{toy_target, CLIQUE_TRIANGLE_QUERY, TOY_QUERY};
use mgm_core::io::save_graph;
use serde_json::Value;

fn mgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgm")).args(args).output().unwrap()
}

fn toy_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_graph(&toy_target(), &dir.path().join("nodes.csv"), &dir.path().join("edges.csv")).unwrap();
    dir
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

#[test]
fn json_report_has_all_phase_timings() {
    let dir = toy_dir();
    let out = mgm(&["query", "--target", path(dir.path()), "--query", TOY_QUERY, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["status"], "completed");
    assert_eq!(r["schema_version"], 1);
    for phase in ["read", "index", "symmetry", "domains", "ordering", "matching", "total"] {
        assert!(r["timings_secs"][phase].as_f64().unwrap() >= 0.0, "{phase}");
    }
}

#[test]
fn count_only_prints_a_number() {
    let dir = toy_dir();
    let rows = mgm(&["query", "--target", path(dir.path()), "--query", "MATCH (a)-->(b) RETURN a, b"]);
    let table = String::from_utf8(rows.stdout).unwrap();
    let counted = mgm(&[
        "query",
        "--target",
        path(dir.path()),
        "--query",
        "MATCH (a)-->(b) RETURN a, b",
        "--count-only",
    ]);
    let n: usize = String::from_utf8(counted.stdout).unwrap().trim().parse().unwrap();
    // header plus one line per row
    assert_eq!(table.lines().count(), n + 1);
}

#[test]
fn query_agrees_with_oracle_command() {
    let dir = toy_dir();
    for q in [TOY_QUERY, "MATCH (a)-[x]->(b), (a)-[y]->(b) RETURN count(*)"] {
        let engine = json(&mgm(&["query", "--target", path(dir.path()), "--query", q, "--no-symmetry", "--format", "json"]));
        let oracle = json(&mgm(&["oracle", "--target", path(dir.path()), "--query", q, "--format", "json"]));
        assert_eq!(engine["count"], oracle["mappings"], "{q}");
    }
}

#[test]
fn exit_codes() {
    let dir = toy_dir();
    let t = path(dir.path());
    assert_eq!(mgm(&["query", "--target", t, "--query", "MATCH (a RETURN a"]).status.code(), Some(3));
    assert_eq!(mgm(&["query", "--target", "/no/such/dir", "--query", TOY_QUERY]).status.code(), Some(4));
    assert_eq!(
        mgm(&["query", "--target", t, "--query", TOY_QUERY, "--ordering", "sideways"]).status.code(),
        Some(6)
    );
    assert_eq!(mgm(&["query", "--target", t]).status.code(), Some(2));
    assert_eq!(mgm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn snapshot_round_trip() {
    let dir = toy_dir();
    let snap = dir.path().join("toy.idx");
    assert_eq!(mgm(&["load", "--target", path(dir.path()), "--out", path(&snap)]).status.code(), Some(0));
    let from_csv = json(&mgm(&["query", "--target", path(dir.path()), "--query", CLIQUE_TRIANGLE_QUERY, "--format", "json"]));
    let from_snap = json(&mgm(&["query", "--target", path(&snap), "--query", CLIQUE_TRIANGLE_QUERY, "--format", "json"]));
    assert_eq!(from_csv["count"], from_snap["count"]);
    assert_eq!(from_snap["timings_secs"]["index"], 0.0);
}

#[test]
fn generate_extract_bench_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t");
    let queries = dir.path().join("q");
    let out = mgm(&[
        "generate", "--nodes", "300", "--edges", "900", "--labels", "2", "--types", "2", "--seed", "4", "--out",
        path(&target),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = mgm(&[
        "extract-query", "--target", path(&target), "--k", "4", "--density", "0.5", "--count", "3", "--out-dir",
        path(&queries),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..3 {
        assert!(queries.join(format!("q{i}.cypher")).is_file());
        assert!(queries.join(format!("q{i}")).join("edges.csv").is_file());
    }
    let csv_out = dir.path().join("bench.csv");
    let out = mgm(&[
        "bench", "--target", path(&target), "--queries", path(&queries), "--variants", "full,degree,nobm", "--jobs",
        "2", "--out", path(&csv_out),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_out).unwrap();
    let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3 * 3 + 3);
    // every extracted query has its witness, and all variants agree
    for r in &records[..9] {
        assert_eq!(&r[3], "completed");
        assert!(r[4].parse::<u64>().unwrap() >= 1);
        assert_eq!(&r[11], "ok");
    }
}

#[test]
fn occurrence_count_matches_oracle_classes() {
    let dir = toy_dir();
    // an undirected edge maps both ways onto each target edge: 2 mappings, 1 occurrence
    let q = "MATCH (a)-[r]-(b) WHERE a._orig_id >= 0 OR b._orig_id >= 0 RETURN count(*)";
    let r = json(&mgm(&[
        "query", "--target", path(dir.path()), "--query", q, "--no-symmetry", "--count-occurrences", "--format",
        "json",
    ]));
    let oracle = json(&mgm(&["oracle", "--target", path(dir.path()), "--query", q, "--format", "json"]));
    assert_eq!(r["branches"], 2);
    assert_eq!(r["count"], oracle["mappings"]);
    assert_eq!(r["occurrences"], oracle["occurrence_classes"]);
    assert!(r["occurrences"].as_u64() < r["count"].as_u64());
    let plain = json(&mgm(&["query", "--target", path(dir.path()), "--query", q, "--format", "json"]));
    assert!(plain.get("occurrences").is_none());
}
