//! End-to-end behaviour on the bundled fixture programs.

use std::path::PathBuf;

use faultsat_core::bmc::{generate_counterexample, Target};
use faultsat_core::encode::Granularity;
use faultsat_core::exec::{execute, TestInput, Verdict};
use faultsat_core::lang::{compile, LowerOptions, Program};
use faultsat_core::localize::{failing_assertion, localize, LocalizeOptions};
use faultsat_core::repair::{repair, repair_off_by_one, verify_fix, Families, RepairKind};

fn source(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn lower(name: &str, bound: u32, trusted: &[&str]) -> LowerOptions {
    LowerOptions {
        bound,
        trusted: trusted.iter().map(|s| s.to_string()).collect(),
        file: name.to_string(),
        ..LowerOptions::default()
    }
}

fn fixture(name: &str, bound: u32, trusted: &[&str]) -> Program {
    compile(&source(name), &lower(name, bound, trusted)).unwrap()
}

fn lines_of(r: &faultsat_core::localize::LocalizationReport) -> Vec<Vec<u32>> {
    r.iterations
        .iter()
        .map(|c| c.statements.iter().map(|s| s.line).collect())
        .collect()
}

#[test]
fn index_guard_only_one_fails() {
    let p = fixture("index_guard.mc", 1, &[]);
    for x in -128..=127 {
        let r = execute(&p, &TestInput::new().with("index", x));
        assert_eq!(matches!(r.verdict, Verdict::Fail { .. }), x == 1, "index={x}");
    }
    let cx = generate_counterexample(&p, Target::Any, 0).unwrap().unwrap();
    assert_eq!(cx.test.describe(), "index=1");
}

#[test]
fn index_guard_localizes_line_4_then_line_1() {
    let p = fixture("index_guard.mc", 1, &[]);
    let t = TestInput::new().with("index", 1);
    let a = failing_assertion(&p, &t).unwrap();
    let r = localize(&p, a, &t, &LocalizeOptions::default()).unwrap();
    assert_eq!(lines_of(&r), vec![vec![4], vec![1]]);
    assert!(r.exhausted);
}

#[test]
fn squareroot_loop_runs_seven_times() {
    let p = fixture("squareroot.mc", 50, &[]);
    let r = execute(&p, &TestInput::new());
    assert!(matches!(r.verdict, Verdict::Fail { line: 14, .. }));
    let st = format!("{:?}", r.named_state(&p));
    assert!(st.contains("squareroot#1.i\": Scalar(8)"), "{st}");
    assert!(st.contains("squareroot#1.v\": Scalar(63)"), "{st}");
}

#[test]
fn squareroot_statement_report() {
    let p = fixture("squareroot.mc", 50, &[]);
    let t = TestInput::new();
    let a = failing_assertion(&p, &t).unwrap();
    let r = localize(&p, a, &t, &LocalizeOptions::default()).unwrap();
    let lines = r.lines();
    for l in [9, 10, 12] {
        assert!(lines.contains(&l), "line {l} missing from {lines:?}");
    }
    assert!(r.exhausted);
}

#[test]
fn squareroot_weighted_iterations_blame_the_last_pass() {
    let p = fixture("squareroot.mc", 50, &[]);
    let t = TestInput::new();
    let a = failing_assertion(&p, &t).unwrap();
    let opts = LocalizeOptions {
        granularity: Granularity::Iteration,
        max_iterations: 3,
        ..LocalizeOptions::default()
    };
    let r = localize(&p, a, &t, &opts).unwrap();
    let first = &r.iterations[0].statements;
    assert_eq!(first.len(), 1);
    assert!(matches!(first[0].iter, Some(7) | Some(8)), "{first:?}");
    // weights grow toward earlier iterations
    let costs: Vec<u64> = r.iterations.iter().map(|c| c.cost).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]), "{costs:?}");
}

#[test]
fn strncat_overflows_and_blames_the_call() {
    let p = fixture("strncat.mc", 20, &["memset", "strncat"]);
    let cx = generate_counterexample(&p, Target::Any, 0).unwrap().unwrap();
    let r = localize(&p, cx.assertion, &cx.test, &LocalizeOptions::default()).unwrap();
    assert_eq!(r.lines(), vec![6]);
}

#[test]
fn strncat_off_by_one_repair() {
    let name = "strncat.mc";
    let lw = lower(name, 20, &["memset", "strncat"]);
    let c = repair_off_by_one(&source(name), &lw, &LocalizeOptions::default())
        .unwrap()
        .expect("a verified repair");
    assert_eq!(c.line, 6);
    assert_eq!(c.kind, RepairKind::ConstantMinusOne);
    assert_eq!((c.original.as_str(), c.replacement.as_str()), ("SIZE", "SIZE - 1"));
    assert!(c.verified);
    let fixed = compile(&c.source, &lw).unwrap();
    assert!(verify_fix(&fixed, &[], 0));
    assert!(c.patch.contains("+  strncat(buf, s, (SIZE - 1));"), "{}", c.patch);
}

#[test]
fn strncat_plus_one_is_rejected() {
    let name = "strncat.mc";
    let r = repair(
        &source(name),
        &lower(name, 20, &["memset", "strncat"]),
        &LocalizeOptions::default(),
        Families {
            off_by_one: true,
            operator: false,
        },
    )
    .unwrap();
    let plus = r.candidates.iter().find(|c| c.kind == RepairKind::ConstantPlusOne).unwrap();
    assert!(!plus.verified);
}
