use std::io::Write;
use std::process::{Command, Output, Stdio};

const PHI1: &str = "ex x. all y. (ex z w v. y = f(z) & y = f(x) & w = g(z, v)) | (x = f(y) & x = f(x))";
const PHI2: &str = "ex x. all y. (ex z. y = f(z) & z = x) | (x = f(y) & y = x) | ~(x = f(y))";

fn decomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decomp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("decomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verdicts_of_the_two_sentences() {
    let o = decomp(&["solve", "--theory", "trees", "--mode", "verdict", "--formula", PHI1]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "false\n"));
    let o = decomp(&["solve", "--theory", "trees", "--mode", "verdict", "--formula", PHI2]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "true\n"));
}

#[test]
fn game_one_disjunct_lists_one_and_two() {
    let o = decomp(&["solve", "--game", "1", "--k", "1", "--mode", "disjunct"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].contains("x = s(y_1) & y_1 = 0"), "{text}");
    assert!(lines[1].starts_with("| ") && lines[1].contains("t_4 = s(y_2)"), "{text}");
}

#[test]
fn solve_output_is_deterministic() {
    let args = ["solve", "--game", "2", "--k", "1", "--mode", "solved"];
    let a = decomp(&args);
    let b = decomp(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn false_has_an_empty_disjunction() {
    let o = decomp(&["solve", "--theory", "eq", "--mode", "disjunct", "--formula", "false"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "false\n"));
}

#[test]
fn reads_formula_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_decomp"))
        .args(["solve", "--theory", "ra", "--mode", "verdict", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"all x. ex y. x = y + y\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "true\n"));
}

#[test]
fn signature_file_fixes_the_symbols() {
    let sig = tmp("pair.sig");
    std::fs::write(&sig, "theory trees\nfun a/0\nfun f/1 # unary\n").unwrap();
    let path = sig.to_str().unwrap();
    let o = decomp(&["solve", "--sig", path, "--mode", "verdict", "--formula", "all x. ex y. y = f(x) & ~(y = a)"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "true\n"));
    // Trees are read over infinitely many symbols, so a and f do not cover the universe.
    let o = decomp(&["solve", "--sig", path, "--mode", "verdict", "--formula", "all x. x = a | ex y. x = f(y)"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "false\n"));
    let o = decomp(&["solve", "--sig", path, "--formula", "x = g(x)"]);
    assert_eq!(code(&o), 1);
    let o = decomp(&["solve", "--sig", path, "--theory", "eq", "--formula", "x = x"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn error_exit_codes() {
    let parse = decomp(&["solve", "--theory", "trees", "--formula", "x = f("]);
    assert_eq!(code(&parse), 1);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("at 6..6"));
    assert!(parse.stdout.is_empty());
    assert_eq!(code(&decomp(&["solve", "--theory", "eq", "--mode", "verdict", "--formula", "x = y"])), 1);
    assert_eq!(code(&decomp(&["solve", "--formula", "x = y"])), 1);
    assert_eq!(code(&decomp(&["solve", "--theory", "eq"])), 1);
    assert_eq!(code(&decomp(&["solve", "--theory", "eq", "--formula", "x = y", "--max-steps", "0"])), 1);
    assert_eq!(code(&decomp(&["frobnicate"])), 1);
    assert_eq!(code(&decomp(&["solve", "--game", "1", "--k", "4", "--max-steps", "10"])), 2);
    assert_eq!(code(&decomp(&["solve", "--game", "1", "--k", "4", "--max-depth", "3"])), 2);
}

#[test]
fn oracle_check_agrees() {
    for theory in ["eq", "ra"] {
        let o = decomp(&["check", "--theory", theory, "--count", "500", "--seed", "42"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert_eq!(stdout(&o), format!("agreed 500/500 theory={theory} seed=42\n"));
    }
}

#[test]
fn oracle_check_catches_a_broken_rule() {
    for theory in ["eq", "ra"] {
        let o = decomp(&["check", "--theory", theory, "--count", "500", "--seed", "42", "--fault", "rule4-drops-all-children"]);
        assert_eq!(code(&o), 4);
        assert!(stdout(&o).starts_with("disagreement on sentence"));
    }
    let o = decomp(&["check", "--theory", "eq", "--count", "500", "--seed", "42", "--fault", "rule3-shares-names"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn check_rejects_trees() {
    assert_eq!(code(&decomp(&["check", "--theory", "trees"])), 1);
}

fn bench_rows(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| l.starts_with("k=")).map(str::to_string).collect()
}

#[test]
fn bench_game_one_to_four() {
    let csv = tmp("g1.csv");
    let report = tmp("g1.json");
    let o = decomp(&["bench", "--game", "1", "--k", "4", "--csv", csv.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = bench_rows(&o);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.contains("status=validated")));
    assert!(rows[2].ends_with("winning=[1 2 4 5]"));
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "game,measure,k=0,k=1,k=2,k=3,k=4");
    assert!(lines.contains(&"1,status,validated,validated,validated,validated,validated"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert_eq!(doc["rows"][1]["winning"], serde_json::json!(["1", "2"]));
}

#[test]
fn bench_game_two_to_two() {
    let o = decomp(&["bench", "--game", "2", "--k", "2"]);
    assert_eq!(code(&o), 0);
    let rows = bench_rows(&o);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with("winning=[(0,1) (1,0)]"));
}

#[test]
fn bench_k_zero_is_one_empty_row() {
    let o = decomp(&["bench", "--game", "1", "--k", "0"]);
    assert_eq!(code(&o), 0);
    let rows = bench_rows(&o);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with("winning=[]"));
}

#[test]
fn bench_budget_exhaustion_keeps_partial_table() {
    let csv = tmp("budget.csv");
    let o = decomp(&["bench", "--game", "1", "--k", "5", "--max-steps", "100", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let rows = bench_rows(&o);
    assert_eq!(rows.len(), 4);
    assert!(rows[3].contains("status=-"));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.lines().any(|l| l == "1,steps,1,15,73,-"), "{table}");
}

#[test]
fn trace_replays_and_matches_file() {
    let file = tmp("trace.jsonl");
    let o = decomp(&["trace", "--game", "1", "--k", "1", "--trace", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(std::fs::read_to_string(&file).unwrap(), text);
    let steps: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!steps.is_empty());
    for (i, s) in steps.iter().enumerate() {
        assert_eq!(s["step"], serde_json::json!(i + 1));
        assert!(s["rule"].as_u64().unwrap() <= 6);
        assert!(s["path"].is_array() && s["before"].is_string() && s["after"].is_string());
    }
}

#[test]
fn solve_writes_a_report() {
    let report = tmp("solve.json");
    let o = decomp(&["solve", "--theory", "trees", "--mode", "verdict", "--formula", PHI1, "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["result"], "false");
    assert_eq!(doc["theory"], "trees");
    assert!(doc["stats"]["steps"].as_u64().unwrap() > 0);
}

#[test]
fn pure_rules_give_the_same_verdicts() {
    for (f, want) in [(PHI1, "false\n"), (PHI2, "true\n")] {
        let o = decomp(&["solve", "--theory", "trees", "--mode", "verdict", "--no-prune", "--formula", f]);
        assert_eq!((code(&o), stdout(&o).as_str()), (0, want));
    }
}
