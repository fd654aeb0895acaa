//! JSON report shapes. Field order is fixed by the struct definitions, so
//! serialization is byte-stable for a given run.

use serde::Serialize;

use crate::encode::{Granularity, SourceLoc};
use crate::exec::TestInput;
use crate::localize::{LocalizationReport, RankEntry, TestRun};
use crate::repair::{RepairCandidate, RepairReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub bound: u32,
    pub width: u32,
    pub granularity: Granularity,
    pub alpha: u64,
    pub max_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times_ms: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunJson {
    pub test: TestInput,
    pub iterations: Vec<Vec<SourceLoc>>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalizeJson {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<TestInput>,
    pub iterations: Vec<Vec<SourceLoc>>,
    pub costs: Vec<u64>,
    pub exhausted: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunJson>,
    pub ranking: Vec<RankEntry>,
    pub meta: Meta,
}

fn run_json(r: &TestRun) -> RunJson {
    RunJson {
        test: r.test.clone(),
        iterations: r.iterations.iter().map(|c| c.statements.clone()).collect(),
        exhausted: r.exhausted,
    }
}

impl LocalizeJson {
    pub fn new(file: &str, test: Option<&TestInput>, report: &LocalizationReport, mut meta: Meta) -> Self {
        if meta.times_ms.is_some() {
            meta.times_ms = Some(report.times_ms.clone());
        }
        LocalizeJson {
            file: file.to_string(),
            test: test.cloned(),
            iterations: report.iterations.iter().map(|c| c.statements.clone()).collect(),
            costs: report.iterations.iter().map(|c| c.cost).collect(),
            exhausted: report.exhausted,
            runs: report.per_test_runs.iter().map(run_json).collect(),
            ranking: report.ranking.clone(),
            meta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateJson {
    #[serde(flatten)]
    pub candidate: RepairCandidate,
    pub primary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairJson {
    pub file: String,
    pub test: TestInput,
    pub localized_lines: Vec<u32>,
    pub candidates: Vec<CandidateJson>,
    pub meta: Meta,
}

impl RepairJson {
    pub fn new(file: &str, report: &RepairReport, meta: Meta) -> Self {
        let primary = report.candidates.iter().position(|c| c.verified);
        RepairJson {
            file: file.to_string(),
            test: report.test.clone(),
            localized_lines: report.lines.clone(),
            candidates: report
                .candidates
                .iter()
                .enumerate()
                .map(|(i, c)| CandidateJson {
                    candidate: c.clone(),
                    primary: Some(i) == primary,
                })
                .collect(),
            meta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionJson {
    pub line: u32,
    pub column: u32,
    pub kind: &'static str,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckJson {
    pub file: String,
    pub counterexamples: Vec<CounterexampleJson>,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleJson {
    pub test: TestInput,
    pub assertion: AssertionJson,
    /// Source lines of the executed trace, consecutive duplicates removed.
    pub trace_lines: Vec<u32>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialization");
    s.push('\n');
    s
}
