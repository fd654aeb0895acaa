use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultsat"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_reports_counterexample() {
    let o = run(&["check", "-k", "1", "index_guard.mc"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("Counterexample: index=1\n"), "{s}");
    assert!(s.contains("violates array-bounds at index_guard.mc:5:"), "{s}");
}

#[test]
fn check_safe_program_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "safe.mc", "input int x;\nint y;\ny = x % 4;\nassert(y < 4 && y > -4);\n");
    let o = run(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "No counterexample to p found\n");
}

#[test]
fn syntax_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "bad.mc", "int x\nx = 1;\n");
    let o = run(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.mc: 2:1"));
    assert_eq!(run(&["check", "--width", "7", "index_guard.mc"]).status.code(), Some(2));
    assert_eq!(run(&["check", "-k", "0", "index_guard.mc"]).status.code(), Some(2));
}

#[test]
fn localize_text() {
    let o = run(&["localize", "-k", "1", "--test", "index=1", "index_guard.mc"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Potential bug locations in index_guard.mc for test index=1:\n  \
         CoMSS 1: index_guard.mc:4  (cost 1)\n  \
         CoMSS 2: index_guard.mc:1  (cost 1)\n\
         No more suspects.\n"
    );
}

#[test]
fn localize_rejects_passing_test() {
    let o = run(&["localize", "-k", "1", "--test", "index=0", "index_guard.mc"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "No failing test among those given\n");
}

#[test]
fn localize_json_shape() {
    let o = run(&["localize", "-k", "1", "--json", "index_guard.mc"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["file"], "index_guard.mc");
    assert_eq!(v["test"]["index"], 1);
    assert_eq!(v["iterations"][0][0]["line"], 4);
    assert_eq!(v["iterations"][1][0]["line"], 1);
    assert_eq!(v["costs"], serde_json::json!([1, 1]));
    assert_eq!(v["exhausted"], true);
    assert_eq!(v["meta"]["bound"], 1);
    assert!(v["meta"].get("times_ms").is_none());
    let t = run(&["localize", "-k", "1", "--json", "--timings", "index_guard.mc"]);
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(v["meta"]["times_ms"].as_array().unwrap().len(), 3);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["localize", "-k", "1", "--json", "-o", out.to_str().unwrap(), "index_guard.mc"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let direct = run(&["localize", "-k", "1", "--json", "index_guard.mc"]);
    assert_eq!(std::fs::read(&out).unwrap(), direct.stdout);
}

#[test]
fn iteration_granularity_text() {
    let o = run(&["localize", "-k", "50", "--iter-granularity", "--max-iters", "1", "squareroot.mc"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("CoMSS 1: squareroot.mc:10 (iteration 7)"), "{s}");
    assert!(s.ends_with("Stopped after 1 iterations.\n"), "{s}");
}

#[test]
fn repair_off_by_one() {
    let o = run(&[
        "repair", "--off-by-one", "-k", "20", "--trusted", "memset", "--trusted", "strncat", "strncat.mc",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("Primary repair at strncat.mc:6: SIZE -> SIZE - 1\n"), "{s}");
    assert!(s.contains("--- a/strncat.mc\n+++ b/strncat.mc\n"), "{s}");
}

#[test]
fn repair_without_candidates_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(
        &dir,
        "p.mc",
        "input int x;\ninput int z;\nint y;\nassume(x >= 0 && x < 10 && z >= 0 && z < 10);\ny = x + z;\nassert(y < x || z == 0);\n",
    );
    let o = run(&["repair", "--off-by-one", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("No repair found"));
}

#[test]
fn rank_given_tests() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "p.mc", "input int x;\nint y;\ny = x + 1;\nassert(y != 3);\n");
    let tests = write_tmp(&dir, "t.json", r#"[{"x": 2}, {"x": 5}]"#);
    let o = run(&["rank", "--json", "--test", "x=2", "--tests-file", &tests, &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    assert_eq!(v["ranking"][0]["line"], 3);
    assert_eq!(v["ranking"][0]["count"], 2);
}

#[test]
fn export_and_solve_wcnf() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("i.wcnf");
    let o = run(&["export-wcnf", "-k", "1", "-o", w.to_str().unwrap(), "index_guard.mc"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["maxsat", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("o 1\ns OPTIMUM FOUND\n"), "{s}");
}

#[test]
fn sat_command() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "u.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let o = run(&["sat", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "s UNSATISFIABLE\n");
    let f = write_tmp(&dir, "s.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
    let o = run(&["sat", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "s SATISFIABLE\nv -1 2 0\n");
}

#[test]
fn run_reports_state() {
    let o = run(&["run", "-k", "1", "--test", "index=0", "--test", "index=1", "index_guard.mc"]);
    let s = stdout(&o);
    assert!(s.contains("index=0: pass\n"), "{s}");
    assert!(s.contains("index=1: fail at line 5\n"), "{s}");
}
