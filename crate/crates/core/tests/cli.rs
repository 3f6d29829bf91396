use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tree_forcing::ptree::{cross_trees, PartitionTree};
use tree_forcing::trace::read_trace;
use tree_forcing::BitString;

fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn treeforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeforce"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn run_then_check_complete() {
    let trace = tmp("hitting.jsonl");
    let reg = data("hitting64.reg");
    let out = treeforce(&[
        "run", "--registry", &reg, "--pairs", "0,1;2,3;4,5", "--domain-bound", "3", "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("outcome: Complete"));
    assert!(!stdout.contains("FAIL"));
    let out = treeforce(&["check", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let t = read_trace(std::io::BufReader::new(std::fs::File::open(&trace).unwrap())).unwrap();
    assert_eq!(t.stages.len(), 7);
}

#[test]
fn config_file_matches_flags() {
    let out = treeforce(&["run", "--config", &data("run.toml")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // a flag overrides the file
    let out = treeforce(&["run", "--config", &data("run.toml"), "--registry", &data("missing.reg")]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unresolved_exits_two() {
    let trace = tmp("reader.jsonl");
    let out = treeforce(&[
        "run",
        "--universe",
        "16",
        "--a",
        "1010101010101010",
        "--c",
        "0000000000000000",
        "--registry",
        &data("reader.reg"),
        "--pairs",
        "0,1",
        "--domain-bound",
        "0",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&treeforce(&["check", "--trace", trace.to_str().unwrap()])), 2);
}

#[test]
fn hypothesis_violation_exits_three() {
    let trace = tmp("pa_like.jsonl");
    let out = treeforce(&[
        "run", "--universe", "16", "--registry", &data("pa_like.reg"), "--pairs", "0,1", "--domain-bound", "3", "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&treeforce(&["check", "--trace", trace.to_str().unwrap()])), 3);
}

#[test]
fn errors_exit_one() {
    assert_eq!(code(&treeforce(&["check", "--trace", "/nonexistent/trace.jsonl"])), 1);
    let out = treeforce(&["run", "--universe", "16", "--a", "0101", "--registry", &data("pa_like.reg")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 16 bits"));
}

#[test]
fn tampered_trace_is_rejected() {
    let trace = tmp("tampered.jsonl");
    let reg = data("hitting64.reg");
    let out = treeforce(&[
        "run", "--registry", &reg, "--pairs", "0,1;2,3;4,5", "--domain-bound", "3", "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    // drop the last stage record
    let mut lines: Vec<&str> = text.lines().collect();
    let last_stage = lines.iter().rposition(|l| l.contains("\"kind\":\"stage\"")).unwrap();
    lines.remove(last_stage);
    std::fs::write(&trace, lines.join("\n")).unwrap();
    assert_eq!(code(&treeforce(&["check", "--trace", trace.to_str().unwrap()])), 1);
}

#[test]
fn cross_prints_the_crossed_tree() {
    let a = PartitionTree::full(2, 2);
    let b = PartitionTree::from_paths(2, 2, ["1001".parse::<BitString>().unwrap()]).unwrap();
    let (pa, pb) = (tmp("a.tree"), tmp("b.tree"));
    std::fs::write(&pa, a.to_text()).unwrap();
    std::fs::write(&pb, b.to_text()).unwrap();
    let out = treeforce(&["cross", "--trees", pa.to_str().unwrap(), pb.to_str().unwrap(), pb.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let printed = PartitionTree::from_text(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(printed, cross_trees(&[a, b.clone(), b]).unwrap());
    assert_eq!(printed.k(), 6);
    assert_eq!(code(&treeforce(&["cross", "--trees", pa.to_str().unwrap()])), 1, "a single tree is a usage error");
    assert_eq!(code(&treeforce(&["--help"])), 0);
}

#[test]
fn cohesive_subcommand() {
    let out = treeforce(&["cohesive", "--sets", &data("sets256.txt"), "--registry", &data("cohesive256.reg")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("stage")).count(), 6);
    assert!(stdout.contains("G = "));
}
