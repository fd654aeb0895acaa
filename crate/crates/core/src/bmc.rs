//! Bounded model checking over the unrolled program: find inputs that make
//! an assertion fail, then confirm them by concrete execution.

use thiserror::Error;

use crate::encode::{decode_inputs, encode_program, CheckKind, InputBits, ProgramEncoding, Selectors};
use crate::exec::{execute, Trace, TestInput, Verdict};
use crate::lang::{AssertId, Program};
use crate::sat::{Lit, Solver, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Any,
    Assertion(AssertId),
}

impl Target {
    fn accepts(self, a: AssertId) -> bool {
        match self {
            Target::Any => true,
            Target::Assertion(t) => t == a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub test: TestInput,
    pub assertion: AssertId,
    pub line: u32,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BmcError {
    #[error("SAT solver budget exhausted")]
    Unknown,
    #[error("counterexample {0} does not fail when executed")]
    ReplayMismatch(String),
}

/// Incremental counterexample search; each call to [`Bmc::next`] blocks the
/// inputs already returned.
pub struct Bmc<'p> {
    program: &'p Program,
    target: Target,
    enc: ProgramEncoding,
    solver: Solver,
    done: bool,
}

impl<'p> Bmc<'p> {
    pub fn new(p: &'p Program, target: Target, seed: u64) -> Self {
        let mut enc = encode_program(p, Selectors::None);
        let c = &mut enc.circuit;
        let mut prefix = c.tt();
        let mut violations = Vec::new();
        for ch in &enc.checks {
            if let CheckKind::Assertion(a) = ch.kind {
                if target.accepts(a) {
                    let v = c.and(prefix, !ch.ok);
                    violations.push(v);
                }
            }
            prefix = c.and(prefix, ch.ok);
        }
        let any = c.or_all(&violations);
        c.assert_lit(any);
        let mut solver = Solver::new(seed);
        solver.add_cnf(&c.cnf);
        Bmc {
            program: p,
            target,
            enc,
            solver,
            done: false,
        }
    }

    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.solver.set_conflict_budget(budget);
    }

    pub fn next(&mut self) -> Result<Option<Counterexample>, BmcError> {
        if self.done {
            return Ok(None);
        }
        let res = self.solver.solve(&[]);
        match res.status {
            Status::Unsat => {
                self.done = true;
                return Ok(None);
            }
            Status::Unknown => return Err(BmcError::Unknown),
            Status::Sat => {}
        }
        let test = decode_inputs(&self.enc.inputs, &res.model);
        let mut block: Vec<Lit> = Vec::new();
        for bits in self.enc.inputs.values() {
            let cells: Vec<&Vec<Lit>> = match bits {
                InputBits::Scalar(b) => vec![b],
                InputBits::Array(cs) => cs.iter().collect(),
            };
            for cell in cells {
                for &l in cell {
                    if !self.enc.circuit.is_const(l) {
                        block.push(if l.eval(&res.model) { !l } else { l });
                    }
                }
            }
        }
        if block.is_empty() || !self.solver.add_clause(&block) {
            self.done = true;
        }
        let run = execute(self.program, &test);
        match run.verdict {
            Verdict::Fail { assertion, line } if self.target.accepts(assertion) => Ok(Some(Counterexample {
                test,
                assertion,
                line,
                trace: run.trace,
            })),
            _ => Err(BmcError::ReplayMismatch(test.describe())),
        }
    }
}

/// One failing input for `target`, or `None` if every assertion of that
/// kind holds within the unrolling bound.
pub fn generate_counterexample(p: &Program, target: Target, seed: u64) -> Result<Option<Counterexample>, BmcError> {
    Bmc::new(p, target, seed).next()
}

/// Up to `n` counterexamples with pairwise distinct inputs.
pub fn generate_counterexamples(
    p: &Program,
    target: Target,
    seed: u64,
    n: usize,
) -> Result<Vec<Counterexample>, BmcError> {
    let mut bmc = Bmc::new(p, target, seed);
    let mut out = Vec::new();
    while out.len() < n {
        match bmc.next()? {
            Some(cx) => out.push(cx),
            None => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{compile, LowerOptions};

    fn prog(src: &str, bound: u32) -> Program {
        compile(
            src,
            &LowerOptions {
                bound,
                ..LowerOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn finds_failing_input() {
        let p = prog("input int x;\nint y;\ny = x + 1;\nassert(y != 5);\n", 1);
        let cx = generate_counterexample(&p, Target::Any, 0).unwrap().unwrap();
        assert_eq!(cx.test.describe(), "x=4");
        assert_eq!(cx.line, 4);
    }

    #[test]
    fn safe_program_has_none() {
        let p = prog("input int x;\nint y;\ny = x % 4;\nassert(y < 4 && y > -4);\n", 1);
        assert!(generate_counterexample(&p, Target::Any, 0).unwrap().is_none());
    }

    #[test]
    fn enumerates_distinct_inputs() {
        let p = prog("input int x;\nassert(x > 2 || x < 0);\n", 1);
        let all = generate_counterexamples(&p, Target::Any, 1, 10).unwrap();
        assert_eq!(all.len(), 3);
        let mut xs: Vec<String> = all.iter().map(|c| c.test.describe()).collect();
        xs.sort();
        assert_eq!(xs, vec!["x=0", "x=1", "x=2"]);
    }

    #[test]
    fn respects_assume_and_loop_bound() {
        let p = prog(
            "input int n;\nint i;\nassume(n >= 0 && n < 3);\nwhile (i < n) {\n  i = i + 1;\n}\nassert(i != 2);\n",
            3,
        );
        let cx = generate_counterexample(&p, Target::Any, 0).unwrap().unwrap();
        assert_eq!(cx.test.describe(), "n=2");
    }

    #[test]
    fn target_filters_assertions() {
        let p = prog("input int x;\nassert(x != 1);\nassert(x != 2);\n", 1);
        let second = p.assertions[1].id;
        let cx = generate_counterexample(&p, Target::Assertion(second), 0)
            .unwrap()
            .unwrap();
        assert_eq!(cx.test.describe(), "x=2");
    }
}
