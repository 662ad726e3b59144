use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graphdp::apsp::{floyd_warshall_dense, read_matrix_binary, DistanceBlock};
use graphdp::graph::io::load_edge_list;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphdp")).current_dir(dir).args(args).output().expect("spawn graphdp")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn pipeline(dir: &Path) {
    ok(dir, &["--seed", "7", "gen", "nws", "--n", "400", "--k", "4", "--p", "0.05"]);
    ok(dir, &["--seed", "7", "apsp", "--graph", "nws.tsv", "--max-tile", "64", "--verify", "--model"]);
    ok(dir, &["--seed", "7", "gen", "genome", "--bases", "2000"]);
    ok(dir, &["--seed", "7", "gen", "reads", "--graph", "genome.gfa", "--count", "40", "--len", "350", "--sub-rate", "0.01"]);
    ok(dir, &["--seed", "7", "s2g", "--graph", "genome.gfa", "--reads", "reads.fa", "--width", "32,128", "--verify", "--model", "--traceback"]);
    ok(dir, &["sweep", "roofline"]);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for f in ["distances.tsv", "scores.tsv", "cost.csv", "cost.json", "plan.json", "roofline.csv", "run_config.json"] {
        assert!(names.iter().any(|n| n == f), "missing {f}");
    }
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs between runs");
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    ok(a.path(), &["gen", "er", "--n", "300", "--p", "0.01"]);
    ok(a.path(), &["--threads", "1", "apsp", "--graph", "er.tsv", "--max-tile", "32"]);
    let one = fs::read(a.path().join("distances.tsv")).unwrap();
    ok(a.path(), &["--threads", "3", "apsp", "--graph", "er.tsv", "--max-tile", "32"]);
    assert_eq!(one, fs::read(a.path().join("distances.tsv")).unwrap());
}

#[test]
fn large_results_go_to_binary() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "er", "--n", "600", "--p", "0.004"]);
    ok(d.path(), &["apsp", "--graph", "er.tsv", "--max-tile", "128"]);
    assert!(!d.path().join("distances.tsv").exists());
    let got = read_matrix_binary(fs::File::open(d.path().join("distances.bin")).unwrap()).unwrap();
    let g = load_edge_list(d.path().join("er.tsv")).unwrap();
    let want = floyd_warshall_dense(&DistanceBlock::from_graph(&g)).unwrap();
    assert_eq!(got.data(), want.data());
}

#[test]
fn tsv_marks_unreachable_as_inf() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("g.tsv"), "0 1 5\n1 2 7\n").unwrap();
    ok(d.path(), &["apsp", "--graph", "g.tsv", "--max-tile", "2", "--verify"]);
    let t = fs::read_to_string(d.path().join("distances.tsv")).unwrap();
    assert_eq!(t, "0\t5\t12\ninf\t0\t7\ninf\tinf\t0\n");
}

#[test]
fn device_config_changes_the_model() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "er", "--n", "200", "--p", "0.02"]);
    ok(d.path(), &["apsp", "--graph", "er.tsv", "--max-tile", "64", "--model"]);
    let base = fs::read_to_string(d.path().join("cost.json")).unwrap();
    fs::write(d.path().join("dev.json"), r#"{"pcm":{"clock_mhz":250}}"#).unwrap();
    ok(d.path(), &["--config", "dev.json", "apsp", "--graph", "er.tsv", "--max-tile", "64", "--model"]);
    let slow = fs::read_to_string(d.path().join("cost.json")).unwrap();
    let t = |s: &str| serde_json::from_str::<serde_json::Value>(s).unwrap()["wall_time"].as_f64().unwrap();
    assert!((t(&slow) / t(&base) - 2.0).abs() < 1e-9);
    let cfg = fs::read_to_string(d.path().join("run_config.json")).unwrap();
    assert!(cfg.contains("\"clock_mhz\": 250.0"));
}

#[test]
fn verify_suites_pass() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["verify", "--cases", "6"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{out}");
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["apsp", "--graph", "missing.tsv", "--max-tile", "8"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["bogus"]).status.code(), Some(2));
    fs::write(d.path().join("w.json"), r#"{"kind":"poa","graph":"g"}"#).unwrap();
    let o = run(d.path(), &["plan", "--descriptor", "w.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("poa"));
}

#[test]
fn plan_descriptor_for_reads() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "genome", "--bases", "1500"]);
    ok(d.path(), &["gen", "reads", "--graph", "genome.gfa", "--count", "5", "--len", "500"]);
    fs::write(d.path().join("w.json"), r#"{"kind":"s2g","graph":"genome.gfa","reads":"reads.fa"}"#).unwrap();
    ok(d.path(), &["plan", "--descriptor", "w.json"]);
    let plan: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("plan.json")).unwrap()).unwrap();
    let stages = plan["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    assert_eq!(stages[1]["mapping"], "LongPipeline");
    assert_eq!(stages[1]["tile"], "Traversal");
}

#[test]
fn sweeps_write_commented_csv() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["sweep", "sram", "--caps", "64K,128K"]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "bytes,regular_bytes,irregular_bytes,reads_per_second");
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("131072,") && rows[2].split(',').nth(2) == Some("0"));
    assert_eq!(fs::read_to_string(d.path().join("sram.csv")).unwrap(), out);
}
