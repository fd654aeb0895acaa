//! Concrete interpreter over lowered programs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bv;
use crate::lang::{Action, AssertId, Expr, Program, Role, TransId};

/// Executed transition ids, in order.
pub type Trace = Vec<TransId>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Scalar(i64),
    Array(Vec<i64>),
}

impl fmt::Display for InputValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputValue::Scalar(v) => write!(f, "{v}"),
            InputValue::Array(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

/// Values for every declared input, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestInput {
    pub values: BTreeMap<String, InputValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("missing value for input `{0}`")]
    Missing(String),
    #[error("`{0}` is not an input of the program")]
    Unknown(String),
    #[error("value {value} of `{name}` does not fit in {width} bits")]
    OutOfRange { name: String, value: i64, width: u32 },
    #[error("`{name}`: expected {expected}")]
    Shape { name: String, expected: String },
    #[error("cannot parse test assignment `{0}` (expected name=value)")]
    Syntax(String),
}

impl TestInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: i64) -> Self {
        self.values.insert(name.to_string(), InputValue::Scalar(value));
        self
    }

    pub fn with_array(mut self, name: &str, values: Vec<i64>) -> Self {
        self.values.insert(name.to_string(), InputValue::Array(values));
        self
    }

    /// Every input set to zero.
    pub fn zeros(p: &Program) -> Self {
        let mut t = TestInput::new();
        for (_, v) in p.inputs() {
            t = t.with(&v.name, 0);
        }
        for (_, a) in p.input_arrays() {
            t = t.with_array(&a.name, vec![0; a.len as usize]);
        }
        t
    }

    /// Parse `name=value` or `name=[v1,v2,...]`.
    pub fn parse_assignment(&mut self, text: &str) -> Result<(), InputError> {
        let bad = || InputError::Syntax(text.to_string());
        let (name, value) = text.split_once('=').ok_or_else(bad)?;
        let (name, value) = (name.trim(), value.trim());
        if name.is_empty() {
            return Err(bad());
        }
        let parsed = if let Some(inner) = value.strip_prefix('[').and_then(|v| v.strip_suffix(']')) {
            let vals: Result<Vec<i64>, _> = inner
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<i64>())
                .collect();
            InputValue::Array(vals.map_err(|_| bad())?)
        } else {
            InputValue::Scalar(value.parse().map_err(|_| bad())?)
        };
        self.values.insert(name.to_string(), parsed);
        Ok(())
    }

    /// Parse several assignments separated by spaces, commas or semicolons,
    /// e.g. `x=1 a=[2, 3]`. The empty string is the empty test.
    pub fn parse_spec(text: &str) -> Result<TestInput, InputError> {
        let mut t = TestInput::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        for ch in text.chars().chain(std::iter::once(';')) {
            match ch {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ => {}
            }
            if depth == 0 && (ch == ';' || ch == ',' || ch.is_whitespace()) {
                // `x = 3` splits into pieces; glue them back while an `=` is pending
                let piece = cur.trim();
                if !piece.is_empty() && !piece.ends_with('=') && (piece.contains('=') || ch == ';') {
                    t.parse_assignment(piece)?;
                    cur.clear();
                }
                continue;
            }
            cur.push(ch);
        }
        if !cur.trim().is_empty() {
            return Err(InputError::Syntax(cur));
        }
        Ok(t)
    }

    pub fn validate(&self, p: &Program) -> Result<(), InputError> {
        for (_, v) in p.inputs() {
            match self.values.get(&v.name) {
                None => return Err(InputError::Missing(v.name.clone())),
                Some(InputValue::Scalar(x)) => check_fits(&v.name, *x, v.width)?,
                Some(InputValue::Array(_)) => {
                    return Err(InputError::Shape {
                        name: v.name.clone(),
                        expected: "a scalar".into(),
                    })
                }
            }
        }
        for (_, a) in p.input_arrays() {
            match self.values.get(&a.name) {
                None => return Err(InputError::Missing(a.name.clone())),
                Some(InputValue::Array(xs)) if xs.len() == a.len as usize => {
                    for x in xs {
                        check_fits(&a.name, *x, a.width)?;
                    }
                }
                Some(_) => {
                    return Err(InputError::Shape {
                        name: a.name.clone(),
                        expected: format!("an array of {} values", a.len),
                    })
                }
            }
        }
        for name in self.values.keys() {
            let known = p.inputs().any(|(_, v)| &v.name == name)
                || p.input_arrays().any(|(_, a)| &a.name == name);
            if !known {
                return Err(InputError::Unknown(name.clone()));
            }
        }
        Ok(())
    }

    /// Compact `a=1 b=[2,3]` rendering.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        parts.join(" ")
    }
}

fn check_fits(name: &str, value: i64, width: u32) -> Result<(), InputError> {
    if bv::fits(value, width) {
        Ok(())
    } else {
        Err(InputError::OutOfRange {
            name: name.to_string(),
            value,
            width,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail { assertion: AssertId, line: u32 },
    /// A loop needed more than the unrolling bound.
    BoundExceeded,
    /// A user `assume` was false; the execution is not a valid run.
    Blocked,
}

/// Program state: scalar values and array contents, indexed by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub vars: Vec<i64>,
    pub arrays: Vec<Vec<i64>>,
}

impl State {
    /// Initial state: inputs from the test, everything else zero.
    pub fn initial(p: &Program, test: &TestInput) -> State {
        let vars = p
            .vars
            .iter()
            .map(|v| match (v.role, test.values.get(&v.name)) {
                (Role::Input, Some(InputValue::Scalar(x))) => bv::wrap(*x, v.width),
                _ => 0,
            })
            .collect();
        let arrays = p
            .arrays
            .iter()
            .map(|a| match (a.role, test.values.get(&a.name)) {
                (Role::Input, Some(InputValue::Array(xs))) => (0..a.len as usize)
                    .map(|i| xs.get(i).map_or(0, |x| bv::wrap(*x, a.width)))
                    .collect(),
                _ => vec![0; a.len as usize],
            })
            .collect();
        State { vars, arrays }
    }

    pub fn eval(&self, e: &Expr, width: u32) -> i64 {
        match e {
            Expr::Const(v) => bv::wrap(*v, width),
            Expr::Var(v) => self.vars[v.0 as usize],
            Expr::Load(a, i) => {
                let i = self.eval(i, width);
                let arr = &self.arrays[a.0 as usize];
                if i >= 0 && (i as usize) < arr.len() {
                    arr[i as usize]
                } else {
                    0
                }
            }
            Expr::Unary(op, a) => bv::eval_unop(*op, self.eval(a, width), width),
            Expr::Binary(op, a, b) => {
                bv::eval_binop(*op, self.eval(a, width), self.eval(b, width), width)
            }
            Expr::Ite(c, a, b) => {
                if self.eval(c, width) != 0 {
                    self.eval(a, width)
                } else {
                    self.eval(b, width)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub trace: Trace,
    pub final_state: State,
    pub verdict: Verdict,
}

impl ExecutionResult {
    pub fn failed(&self) -> Option<AssertId> {
        match self.verdict {
            Verdict::Fail { assertion, .. } => Some(assertion),
            _ => None,
        }
    }

    /// Final values keyed by variable name.
    pub fn named_state(&self, p: &Program) -> BTreeMap<String, InputValue> {
        let mut m = BTreeMap::new();
        for (v, decl) in self.final_state.vars.iter().zip(&p.vars) {
            m.insert(decl.name.clone(), InputValue::Scalar(*v));
        }
        for (a, decl) in self.final_state.arrays.iter().zip(&p.arrays) {
            m.insert(decl.name.clone(), InputValue::Array(a.clone()));
        }
        m
    }
}

/// Run `p` on `test`. Missing inputs default to zero; callers that need
/// strictness use [`TestInput::validate`] first.
pub fn execute(p: &Program, test: &TestInput) -> ExecutionResult {
    let w = p.width;
    let mut state = State::initial(p, test);
    let mut trace = Vec::new();
    let mut loc = p.initial;
    let verdict = 'run: loop {
        for site in p.sites_at(loc) {
            if state.eval(&site.predicate, w) == 0 {
                break 'run Verdict::Fail {
                    assertion: site.assertion,
                    line: p.assertion(site.assertion).line,
                };
            }
        }
        let out = p.outgoing(loc);
        if out.is_empty() {
            break Verdict::Pass;
        }
        let mut chosen = None;
        for &tid in out {
            let t = p.transition(tid);
            match &t.action {
                Action::Branch { cond, taken } => {
                    if (state.eval(cond, w) != 0) == *taken {
                        chosen = Some(tid);
                        break;
                    }
                }
                _ => {
                    chosen = Some(tid);
                    break;
                }
            }
        }
        let tid = chosen.expect("branch pair covers both outcomes");
        let t = p.transition(tid);
        match &t.action {
            Action::Assign { var, value } => {
                state.vars[var.0 as usize] = state.eval(value, w);
            }
            Action::Store {
                array,
                index,
                value,
            } => {
                let i = state.eval(index, w);
                let v = state.eval(value, w);
                let arr = &mut state.arrays[array.0 as usize];
                if i >= 0 && (i as usize) < arr.len() {
                    arr[i as usize] = v;
                }
            }
            Action::Assume { cond } => {
                if state.eval(cond, w) == 0 {
                    break Verdict::Blocked;
                }
            }
            Action::Unwind { guard } => {
                if state.eval(guard, w) != 0 {
                    break Verdict::BoundExceeded;
                }
            }
            Action::Branch { .. } | Action::Skip => {}
        }
        trace.push(tid);
        loc = t.target;
    };
    ExecutionResult {
        trace,
        final_state: state,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{compile, LowerOptions};

    fn opts(bound: u32, width: u32) -> LowerOptions {
        LowerOptions {
            bound,
            width,
            ..LowerOptions::default()
        }
    }

    #[test]
    fn test_specs() {
        let t = TestInput::parse_spec("x = 3, a=[1, -2]; y=4").unwrap();
        assert_eq!(t.describe(), "a=[1,-2] x=3 y=4");
        assert_eq!(TestInput::parse_spec("").unwrap(), TestInput::new());
        assert!(TestInput::parse_spec("x").is_err());
        assert!(TestInput::parse_spec("x=").is_err());
    }

    #[test]
    fn wraps_at_width() {
        let p = compile("input int x; int y = x + 1; assert(y > x);", &opts(1, 4)).unwrap();
        let r = execute(&p, &TestInput::new().with("x", 7));
        assert!(matches!(r.verdict, Verdict::Fail { .. }));
        assert_eq!(r.final_state.vars[1], -8);
        assert_eq!(execute(&p, &TestInput::new().with("x", 6)).verdict, Verdict::Pass);
    }

    #[test]
    fn bound_exceeded_and_blocked() {
        let p = compile("input int x;\nwhile (x < 2)\n  x = x + 1;", &opts(2, 4)).unwrap();
        assert_eq!(execute(&p, &TestInput::new().with("x", 0)).verdict, Verdict::Pass);
        assert_eq!(
            execute(&p, &TestInput::new().with("x", -1)).verdict,
            Verdict::BoundExceeded
        );
        let q = compile("input int x; assume(x > 0); assert(x != 0);", &opts(1, 8)).unwrap();
        assert_eq!(execute(&q, &TestInput::new().with("x", 0)).verdict, Verdict::Blocked);
    }

    #[test]
    fn vacuous_assertion_passes() {
        let p = compile("assert(true);", &opts(1, 8)).unwrap();
        let r = execute(&p, &TestInput::new());
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn short_circuit_guards_implicit_assertions() {
        let p = compile(
            "input int i; int a[2]; int r;\nif (i >= 0 && i < 2 && a[i] == 0) r = 1;\nassert(r == 1);",
            &opts(1, 8),
        )
        .unwrap();
        let r = execute(&p, &TestInput::new().with("i", 5));
        assert_eq!(
            r.verdict,
            Verdict::Fail {
                assertion: AssertId(2),
                line: 3
            }
        );
    }

    #[test]
    fn parse_and_validate_inputs() {
        let p = compile("input int x; input int a[2]; assert(x == a[0]);", &opts(1, 8)).unwrap();
        let mut t = TestInput::new();
        t.parse_assignment("x=3").unwrap();
        assert_eq!(t.validate(&p), Err(InputError::Missing("a".into())));
        t.parse_assignment("a=[3, 4]").unwrap();
        t.validate(&p).unwrap();
        t.parse_assignment("x=300").unwrap();
        assert!(matches!(t.validate(&p), Err(InputError::OutOfRange { .. })));
        assert!(t.parse_assignment("oops").is_err());
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"a":[3,4],"x":300}"#);
    }
}
