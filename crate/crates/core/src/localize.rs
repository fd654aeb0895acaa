//! Error localization: enumerate CoMSSes of the failing-run instance with
//! hard blocking clauses, and rank locations across several failing tests.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::bmc::{Bmc, BmcError, Target};
use crate::encode::{assign_loop_weights, build_instance, EncodeError, Granularity, MaxSatInstance, SourceLoc};
use crate::exec::{execute, TestInput};
use crate::lang::{AssertId, Program};
use crate::maxsat::{solve_pmaxsat, Comss, MaxSatError, MaxSatOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalizeError {
    #[error("the test does not fail the assertion")]
    NotAFailingTest,
    #[error("no failing test found")]
    NoFailingTests,
    #[error(transparent)]
    Encode(EncodeError),
    #[error(transparent)]
    MaxSat(MaxSatError),
    #[error(transparent)]
    Bmc(#[from] BmcError),
}

impl From<EncodeError> for LocalizeError {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::NotAFailingTest => LocalizeError::NotAFailingTest,
            e => LocalizeError::Encode(e),
        }
    }
}

impl From<MaxSatError> for LocalizeError {
    fn from(e: MaxSatError) -> Self {
        LocalizeError::MaxSat(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalizeOptions {
    pub granularity: Granularity,
    pub alpha: u64,
    /// With iteration granularity, weigh loop groups `α + η − κ`.
    pub loop_weights: bool,
    /// Among equal-cost CoMSSes prefer statements later in the program.
    pub prefer_late: bool,
    pub max_iterations: usize,
    pub seed: u64,
    pub conflict_budget: Option<u64>,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        LocalizeOptions {
            granularity: Granularity::Statement,
            alpha: 1,
            loop_weights: true,
            prefer_late: true,
            max_iterations: 32,
            seed: 0,
            conflict_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankEntry {
    pub file: String,
    pub line: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRun {
    pub test: TestInput,
    pub assertion: AssertId,
    pub iterations: Vec<Comss>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizationReport {
    pub iterations: Vec<Comss>,
    pub exhausted: bool,
    /// Filled by [`rank`]; empty for a single localization.
    pub per_test_runs: Vec<TestRun>,
    pub ranking: Vec<RankEntry>,
    /// Wall-clock milliseconds per MAX-SAT call.
    pub times_ms: Vec<u64>,
}

impl LocalizationReport {
    /// Distinct (file, line) pairs over all iterations, in line order.
    pub fn lines(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .iterations
            .iter()
            .flat_map(|c| c.statements.iter().map(|s| s.line))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// The assertion `test` fails, if any.
pub fn failing_assertion(p: &Program, test: &TestInput) -> Option<AssertId> {
    execute(p, test).failed()
}

pub fn localize(
    p: &Program,
    assertion: AssertId,
    test: &TestInput,
    opts: &LocalizeOptions,
) -> Result<LocalizationReport, LocalizeError> {
    let run = localize_run(p, assertion, test, opts)?;
    let ranking = ranking_of(std::slice::from_ref(&run.0));
    Ok(LocalizationReport {
        iterations: run.0.iterations,
        exhausted: run.0.exhausted,
        per_test_runs: Vec::new(),
        ranking,
        times_ms: run.1,
    })
}

fn localize_run(
    p: &Program,
    assertion: AssertId,
    test: &TestInput,
    opts: &LocalizeOptions,
) -> Result<(TestRun, Vec<u64>), LocalizeError> {
    let mut inst = build_instance(p, test, assertion, opts.granularity, opts.alpha)?;
    if opts.granularity == Granularity::Iteration && opts.loop_weights {
        assign_loop_weights(&mut inst, opts.alpha, p.bound)?;
    }
    let weights: Vec<u64> = inst.soft.iter().map(|s| s.weight).collect();
    if opts.prefer_late {
        tie_break_late(&mut inst);
    }
    let mopts = MaxSatOptions {
        seed: opts.seed,
        conflict_budget: opts.conflict_budget,
        ..MaxSatOptions::default()
    };
    let mut iterations: Vec<Comss> = Vec::new();
    let mut times = Vec::new();
    let mut exhausted = false;
    while iterations.len() < opts.max_iterations {
        let start = Instant::now();
        let res = solve_pmaxsat(&inst, &mopts);
        times.push(start.elapsed().as_millis() as u64);
        let mut comss = match res {
            Ok(sol) if !sol.comss.is_empty() => sol.comss,
            Ok(_) | Err(MaxSatError::HardUnsat) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        comss.cost = comss
            .groups
            .iter()
            .map(|&g| inst.soft.iter().position(|s| s.group == g).map_or(0, |i| weights[i]))
            .sum();
        let block: Vec<_> = comss.selectors.iter().map(|v| v.pos()).collect();
        inst.add_hard(&block);
        iterations.push(comss);
    }
    Ok((
        TestRun {
            test: test.clone(),
            assertion,
            iterations,
            exhausted,
        },
        times,
    ))
}

/// Scale weights so that every optimum of the result is an optimum of the
/// original, and among those the one whose falsified groups come latest in
/// program order is preferred.
fn tie_break_late(inst: &mut MaxSatInstance) {
    let n = inst.soft.len() as u64;
    let scale = n * n.saturating_sub(1) / 2 + 1;
    for (i, s) in inst.soft.iter_mut().enumerate() {
        s.weight = s.weight * scale + (n - 1 - i as u64);
    }
    inst.recompute_top();
}

/// Location frequencies: the number of runs whose report mentions each
/// line. Sorted by count descending, then file and line ascending.
pub fn ranking_of(runs: &[TestRun]) -> Vec<RankEntry> {
    let mut counts: BTreeMap<(String, u32), usize> = BTreeMap::new();
    for run in runs {
        let mut seen: Vec<(String, u32)> = run
            .iterations
            .iter()
            .flat_map(|c| c.statements.iter().map(|s| (s.file.clone(), s.line)))
            .collect();
        seen.sort();
        seen.dedup();
        for k in seen {
            *counts.entry(k).or_default() += 1;
        }
    }
    let mut out: Vec<RankEntry> = counts
        .into_iter()
        .map(|((file, line), count)| RankEntry { file, line, count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| (&a.file, a.line).cmp(&(&b.file, b.line))));
    out
}

/// Where the failing tests for [`rank`] come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestSource {
    Given(Vec<TestInput>),
    /// `count` counterexamples from bounded model checking, each with a
    /// distinct input valuation.
    Generated { count: usize },
}

/// Localize every failing test and aggregate location frequencies. Tests
/// that pass (or fail a different assertion than `target`) are skipped.
pub fn rank(
    p: &Program,
    target: Target,
    tests: &TestSource,
    opts: &LocalizeOptions,
) -> Result<LocalizationReport, LocalizeError> {
    let failing: Vec<(TestInput, AssertId)> = match tests {
        TestSource::Given(ts) => ts
            .iter()
            .filter_map(|t| {
                t.validate(p).ok()?;
                let a = failing_assertion(p, t)?;
                match target {
                    Target::Assertion(x) if x != a => None,
                    _ => Some((t.clone(), a)),
                }
            })
            .collect(),
        TestSource::Generated { count } => {
            let mut bmc = Bmc::new(p, target, opts.seed);
            let mut out = Vec::new();
            while out.len() < *count {
                match bmc.next()? {
                    Some(cx) => out.push((cx.test, cx.assertion)),
                    None => break,
                }
            }
            out
        }
    };
    if failing.is_empty() {
        return Err(LocalizeError::NoFailingTests);
    }
    let results: Vec<Result<(TestRun, Vec<u64>), LocalizeError>> = std::thread::scope(|s| {
        let handles: Vec<_> = failing
            .iter()
            .map(|(t, a)| s.spawn(move || localize_run(p, *a, t, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("localization thread panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    let mut times = Vec::new();
    for r in results {
        let (run, t) = r?;
        runs.push(run);
        times.extend(t);
    }
    let mut iterations: Vec<Comss> = Vec::new();
    for run in &runs {
        for c in &run.iterations {
            if !iterations.iter().any(|d| d.statements == c.statements) {
                iterations.push(c.clone());
            }
        }
    }
    Ok(LocalizationReport {
        iterations,
        exhausted: runs.iter().all(|r| r.exhausted),
        ranking: ranking_of(&runs),
        per_test_runs: runs,
        times_ms: times,
    })
}

/// All locations reported for `test`, flattened.
pub fn reported_locations(report: &LocalizationReport) -> Vec<SourceLoc> {
    let mut v: Vec<SourceLoc> = report.iterations.iter().flat_map(|c| c.statements.clone()).collect();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{compile, LowerOptions};

    fn prog(src: &str) -> Program {
        compile(src, &LowerOptions::default()).unwrap()
    }

    const SRC: &str = "input int x;\nint y;\ny = x + 1;\nassert(y != 3);\n";

    #[test]
    fn single_fault_line() {
        let p = prog(SRC);
        let t = TestInput::new().with("x", 2);
        let a = failing_assertion(&p, &t).unwrap();
        let r = localize(&p, a, &t, &LocalizeOptions::default()).unwrap();
        assert_eq!(r.lines(), vec![3]);
        assert!(r.exhausted);
        assert_eq!(r.ranking, vec![RankEntry { file: "input.mc".into(), line: 3, count: 1 }]);
    }

    #[test]
    fn passing_test_is_rejected() {
        let p = prog(SRC);
        let t = TestInput::new().with("x", 0);
        let a = p.assertions[0].id;
        assert_eq!(
            localize(&p, a, &t, &LocalizeOptions::default()),
            Err(LocalizeError::NotAFailingTest)
        );
    }

    #[test]
    fn iteration_cap() {
        let p = prog("input int x;\nint y;\nint z;\ny = x + 1;\nz = y * 2;\nassert(z != 6);\n");
        let t = TestInput::new().with("x", 2);
        let a = failing_assertion(&p, &t).unwrap();
        let opts = LocalizeOptions {
            max_iterations: 1,
            ..LocalizeOptions::default()
        };
        let r = localize(&p, a, &t, &opts).unwrap();
        assert_eq!(r.iterations.len(), 1);
        assert!(!r.exhausted);
    }

    #[test]
    fn rank_counts_runs() {
        let p = prog(SRC);
        let tests = TestSource::Given(vec![
            TestInput::new().with("x", 2),
            TestInput::new().with("x", 5),
            TestInput::new().with("x", 2),
        ]);
        let r = rank(&p, Target::Any, &tests, &LocalizeOptions::default()).unwrap();
        assert_eq!(r.per_test_runs.len(), 2);
        assert_eq!(r.ranking[0].count, 2);
        let none = TestSource::Given(vec![TestInput::new().with("x", 0)]);
        assert_eq!(
            rank(&p, Target::Any, &none, &LocalizeOptions::default()),
            Err(LocalizeError::NoFailingTests)
        );
    }
}
