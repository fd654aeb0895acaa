//! Path trace formula: one full copy of the program state per step, each
//! step constraining the next copy through the transition relation with
//! framing of every untouched variable.

use std::collections::HashMap;

use crate::exec::Trace;
use crate::lang::{Action, Program, Role};
use crate::sat::{Lit, Var};

use super::circuit::{Bv, Circuit};
use super::symbolic::{eval_with, GroupKey, Granularity};
use super::EncodeError;

/// State bits of one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepBits {
    pub vars: Vec<Bv>,
    pub arrays: Vec<Vec<Bv>>,
}

pub struct TraceFormula {
    pub circuit: Circuit,
    /// `states[i]` is the state before step `i`; `states[len]` is final.
    pub states: Vec<StepBits>,
    /// Clause group of each step, when selectors were requested.
    pub step_groups: Vec<Option<usize>>,
    pub group_keys: Vec<GroupKey>,
}

impl TraceFormula {
    pub fn selectors(&self) -> Vec<Var> {
        self.circuit.groups.iter().map(|g| g.selector).collect()
    }

    /// All variables that encode program-state bits (initial inputs included).
    pub fn program_bits(&self) -> Vec<Lit> {
        let mut out = Vec::new();
        for s in &self.states {
            for v in &s.vars {
                out.extend(v.iter().filter(|l| !self.circuit.is_const(**l)));
            }
            for a in &s.arrays {
                for cell in a {
                    out.extend(cell.iter().filter(|l| !self.circuit.is_const(**l)));
                }
            }
        }
        out
    }
}

/// Plain trace formula of `trace` (no selectors).
pub fn build_trace_formula(p: &Program, trace: &Trace) -> Result<TraceFormula, EncodeError> {
    build_trace_formula_with(p, trace, None)
}

/// Trace formula whose per-statement clauses are augmented with selectors.
pub fn build_trace_formula_with(
    p: &Program,
    trace: &Trace,
    selectors: Option<Granularity>,
) -> Result<TraceFormula, EncodeError> {
    let mut at = p.initial;
    for (i, &tid) in trace.iter().enumerate() {
        let t = p.transition(tid);
        if t.source != at {
            return Err(EncodeError::DisconnectedTrace { step: i });
        }
        at = t.target;
    }
    let w = p.width;
    let mut c = Circuit::new();
    let first = StepBits {
        vars: p
            .vars
            .iter()
            .map(|v| match v.role {
                Role::Input => c.bv_fresh(&v.name, 0, w),
                Role::Local => c.bv_const(0, w),
            })
            .collect(),
        arrays: p
            .arrays
            .iter()
            .map(|a| {
                (0..a.len)
                    .map(|j| match a.role {
                        Role::Input => c.bv_fresh(&format!("{}[{j}]", a.name), 0, w),
                        Role::Local => c.bv_const(0, w),
                    })
                    .collect()
            })
            .collect(),
    };
    let mut states = vec![first];
    let mut step_groups = Vec::new();
    let mut groups: HashMap<GroupKey, usize> = HashMap::new();
    let mut group_keys = Vec::new();
    for (i, &tid) in trace.iter().enumerate() {
        let t = p.transition(tid);
        let version = i as u32 + 1;
        let group = match (selectors, t.stmt, t.trusted) {
            (Some(g), Some(stmt), false) => {
                let key = GroupKey {
                    stmt,
                    loop_context: match g {
                        Granularity::Statement => None,
                        Granularity::Iteration => t.loop_context,
                    },
                };
                Some(*groups.entry(key).or_insert_with(|| {
                    group_keys.push(key);
                    c.new_group()
                }))
            }
            _ => None,
        };
        step_groups.push(group);
        c.set_group(group);
        let cur = states[i].clone();
        let next = StepBits {
            vars: p
                .vars
                .iter()
                .map(|v| c.bv_fresh(&v.name, version, w))
                .collect(),
            arrays: p
                .arrays
                .iter()
                .map(|a| {
                    (0..a.len)
                        .map(|j| c.bv_fresh(&format!("{}[{j}]", a.name), version, w))
                        .collect()
                })
                .collect(),
        };
        let mut written_var = None;
        let mut written_array = None;
        match &t.action {
            Action::Assign { var, value } => {
                let v = eval_with(&mut c, &cur.vars, &cur.arrays, value, w);
                c.bv_assert_eq(&next.vars[var.0 as usize], &v);
                written_var = Some(var.0 as usize);
            }
            Action::Store {
                array,
                index,
                value,
            } => {
                let idx = eval_with(&mut c, &cur.vars, &cur.arrays, index, w);
                let v = eval_with(&mut c, &cur.vars, &cur.arrays, value, w);
                let ai = array.0 as usize;
                for (j, cell) in cur.arrays[ai].iter().enumerate() {
                    let k = c.bv_const(j as i64, w);
                    let hit = c.bv_eq(&idx, &k);
                    let upd = c.bv_ite(hit, &v, cell);
                    c.bv_assert_eq(&next.arrays[ai][j], &upd);
                }
                written_array = Some(ai);
            }
            Action::Branch { cond, taken } => {
                let v = eval_with(&mut c, &cur.vars, &cur.arrays, cond, w);
                let b = c.bv_to_bool(&v);
                c.assert_lit(if *taken { b } else { !b });
            }
            Action::Assume { cond } => {
                let v = eval_with(&mut c, &cur.vars, &cur.arrays, cond, w);
                let b = c.bv_to_bool(&v);
                c.assert_lit(b);
            }
            Action::Unwind { guard } => {
                let v = eval_with(&mut c, &cur.vars, &cur.arrays, guard, w);
                let b = c.bv_to_bool(&v);
                c.assert_lit(!b);
            }
            Action::Skip => {}
        }
        for (k, (x, y)) in next.vars.iter().zip(&cur.vars).enumerate() {
            if written_var != Some(k) {
                c.bv_assert_eq(x, y);
            }
        }
        for (k, (xs, ys)) in next.arrays.iter().zip(&cur.arrays).enumerate() {
            if written_array != Some(k) {
                for (x, y) in xs.iter().zip(ys) {
                    c.bv_assert_eq(x, y);
                }
            }
        }
        c.set_group(None);
        states.push(next);
    }
    Ok(TraceFormula {
        circuit: c,
        states,
        step_groups,
        group_keys,
    })
}
