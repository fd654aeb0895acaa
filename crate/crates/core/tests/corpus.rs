//! Injected-fault corpus: every program fails, restoring the recorded
//! original line removes the failure, and localization reports the line.

use std::path::PathBuf;

use faultsat_core::bmc::{generate_counterexample, Target};
use faultsat_core::lang::{compile, LowerOptions, Program};
use faultsat_core::localize::{localize, LocalizeOptions};
use serde::Deserialize;

#[derive(Deserialize)]
struct Entry {
    file: String,
    class: String,
    line: u32,
    original: String,
    bound: u32,
    #[serde(default = "default_width")]
    width: u32,
}

fn default_width() -> u32 {
    8
}

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn entries() -> Vec<Entry> {
    serde_json::from_str(&std::fs::read_to_string(dir().join("manifest.json")).unwrap()).unwrap()
}

fn build(src: &str, e: &Entry) -> Program {
    compile(
        src,
        &LowerOptions {
            bound: e.bound,
            width: e.width,
            file: e.file.clone(),
            ..LowerOptions::default()
        },
    )
    .unwrap_or_else(|err| panic!("{}: {err}", e.file))
}

fn restored(src: &str, e: &Entry) -> String {
    let mut lines: Vec<&str> = src.lines().collect();
    lines[e.line as usize - 1] = &e.original;
    lines.join("\n") + "\n"
}

#[test]
fn corpus_faults_are_real_single_line_faults() {
    for e in entries() {
        let src = std::fs::read_to_string(dir().join(&e.file)).unwrap();
        let p = build(&src, &e);
        assert!(
            generate_counterexample(&p, Target::Any, 0).unwrap().is_some(),
            "{} does not fail",
            e.file
        );
        let fixed = build(&restored(&src, &e), &e);
        assert!(
            generate_counterexample(&fixed, Target::Any, 0).unwrap().is_none(),
            "{} still fails with the original line restored",
            e.file
        );
    }
}

#[test]
fn corpus_localization() {
    let mut hits = 0;
    let mut ratios = Vec::new();
    let all = entries();
    for e in &all {
        let src = std::fs::read_to_string(dir().join(&e.file)).unwrap();
        let p = build(&src, e);
        let cx = generate_counterexample(&p, Target::Any, 0).unwrap().unwrap();
        let r = localize(&p, cx.assertion, &cx.test, &LocalizeOptions::default()).unwrap();
        let lines = r.lines();
        let loc = src.lines().filter(|l| !l.trim().is_empty()).count();
        let hit = lines.contains(&e.line);
        hits += hit as usize;
        ratios.push(lines.len() as f64 / loc as f64);
        eprintln!(
            "{:<18} {:<7} line {:>3} {} reported {:?} ({} of {loc} lines) test {}",
            e.file,
            e.class,
            e.line,
            if hit { "hit " } else { "MISS" },
            lines,
            lines.len(),
            cx.test.describe()
        );
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    eprintln!("hits {hits}/{} mean ratio {mean:.3}", all.len());
    assert_eq!(all.len(), 20);
    assert!(hits * 10 >= all.len() * 9, "only {hits} of {} faults localized", all.len());
    assert!(mean <= 0.10, "mean reported fraction {mean:.3}");
}

#[test]
fn counterexamples_replay_on_the_interpreter() {
    use faultsat_core::bmc::generate_counterexamples;
    use faultsat_core::exec::{execute, Verdict};
    for e in entries() {
        let src = std::fs::read_to_string(dir().join(&e.file)).unwrap();
        let p = build(&src, &e);
        let cxs = generate_counterexamples(&p, Target::Any, 0, 5).unwrap();
        assert!(!cxs.is_empty(), "{}", e.file);
        let mut seen = Vec::new();
        for cx in cxs {
            assert!(!seen.contains(&cx.test), "{}: repeated input", e.file);
            let r = execute(&p, &cx.test);
            match r.verdict {
                Verdict::Fail { assertion, line, .. } => {
                    assert_eq!(assertion, cx.assertion, "{}", e.file);
                    assert_eq!(line, cx.line, "{}", e.file);
                }
                v => panic!("{}: {} replays as {v:?}", e.file, cx.test.describe()),
            }
            seen.push(cx.test);
        }
    }
}
