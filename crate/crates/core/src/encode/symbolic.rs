//! Whole-program encoding of a lowered [`Program`] in guarded SSA form.
//!
//! Locations are visited in id order. Each location carries a path literal
//! (hard: disjunction of its incoming edge guards) and a symbolic state.
//! Statement effects are encoded as constraints in the statement's clause
//! group, so disabling the group's selector frees exactly that statement:
//! an assignment gets fresh bits `x_new = e`, a branch gets a fresh guard
//! bit `g = cond`, an assume gets `path -> cond`. Merges at join points are
//! hard if-then-else chains over the edge guards.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::lang::{Action, AssertId, Expr, LoopContext, Loc, Program, StmtId, TransId};
use crate::sat::Lit;

use super::circuit::{Bv, Circuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// One selector per source statement, shared by all its copies.
    #[default]
    Statement,
    /// One selector per (statement, innermost loop iteration).
    Iteration,
}

/// Identity of a clause group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub stmt: StmtId,
    pub loop_context: Option<LoopContext>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Assertion(AssertId),
    Assume,
    Unwind,
}

/// A condition that must hold whenever its location is reached. `ok` is
/// `path -> predicate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckKind,
    pub location: Loc,
    pub ok: Lit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputBits {
    Scalar(Bv),
    Array(Vec<Bv>),
}

#[derive(Clone)]
struct SymState {
    vars: Vec<Rc<Bv>>,
    arrays: Vec<Rc<Vec<Bv>>>,
}

pub struct ProgramEncoding {
    pub circuit: Circuit,
    /// Group key of each created group, indexed like `circuit.groups`.
    pub group_keys: Vec<GroupKey>,
    pub inputs: BTreeMap<String, InputBits>,
    /// Checks in execution order along any path.
    pub checks: Vec<Check>,
    /// Path literal of every location.
    pub reach: Vec<Lit>,
    /// Symbolic value of every scalar at the exit location.
    pub exit_vars: Vec<Bv>,
}

/// How transitions map to clause groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selectors {
    /// Everything hard (bounded model checking).
    None,
    Grouped(Granularity),
}

pub fn encode_program(p: &Program, selectors: Selectors) -> ProgramEncoding {
    let mut c = Circuit::new();
    let w = p.width;
    let mut inputs = BTreeMap::new();
    let mut versions: Vec<u32> = vec![0; p.vars.len()];
    let init_vars: Vec<Rc<Bv>> = p
        .vars
        .iter()
        .map(|v| {
            if v.role == crate::lang::Role::Input {
                let bits = c.bv_fresh(&v.name, 0, w);
                inputs.insert(v.name.clone(), InputBits::Scalar(bits.clone()));
                Rc::new(bits)
            } else {
                Rc::new(c.bv_const(0, w))
            }
        })
        .collect();
    let init_arrays: Vec<Rc<Vec<Bv>>> = p
        .arrays
        .iter()
        .map(|a| {
            let cells: Vec<Bv> = (0..a.len)
                .map(|i| {
                    if a.role == crate::lang::Role::Input {
                        c.bv_fresh(&format!("{}[{i}]", a.name), 0, w)
                    } else {
                        c.bv_const(0, w)
                    }
                })
                .collect();
            if a.role == crate::lang::Role::Input {
                inputs.insert(a.name.clone(), InputBits::Array(cells.clone()));
            }
            Rc::new(cells)
        })
        .collect();
    let mut array_versions: Vec<u32> = vec![0; p.arrays.len()];

    let n = p.num_locations as usize;
    let mut reach: Vec<Lit> = vec![c.ff(); n];
    // edge guard and post-state of each transition, consumed at its target
    let mut pending: HashMap<TransId, (Lit, SymState)> = HashMap::new();
    let mut group_of: HashMap<GroupKey, usize> = HashMap::new();
    let mut group_keys = Vec::new();
    let mut checks = Vec::new();
    let mut exit_vars = Vec::new();

    for li in 0..n {
        let loc = Loc(li as u32);
        let (path, state) = if li == p.initial.0 as usize {
            (
                c.tt(),
                SymState {
                    vars: init_vars.clone(),
                    arrays: init_arrays.clone(),
                },
            )
        } else {
            let inc: Vec<(Lit, SymState)> = p
                .incoming(loc)
                .iter()
                .filter_map(|t| pending.remove(t))
                .collect();
            if inc.is_empty() {
                continue;
            }
            merge(&mut c, inc)
        };
        reach[li] = path;
        for site in p.sites_at(loc) {
            let v = eval(&mut c, &state, &site.predicate, w);
            let pv = c.bv_to_bool(&v);
            let ok = c.or(!path, pv);
            checks.push(Check {
                kind: CheckKind::Assertion(site.assertion),
                location: loc,
                ok,
            });
        }
        if loc == p.exit {
            exit_vars = state.vars.iter().map(|v| (**v).clone()).collect();
        }
        let out = p.outgoing(loc);
        // a branch pair shares one guard bit
        let mut branch_guard: Option<Lit> = None;
        for &tid in out {
            let t = p.transition(tid);
            let group = match (selectors, t.stmt, t.trusted) {
                (Selectors::Grouped(g), Some(stmt), false) => {
                    let key = GroupKey {
                        stmt,
                        loop_context: match g {
                            Granularity::Statement => None,
                            Granularity::Iteration => t.loop_context,
                        },
                    };
                    Some(*group_of.entry(key).or_insert_with(|| {
                        group_keys.push(key);
                        c.new_group()
                    }))
                }
                _ => None,
            };
            let mut next = state.clone();
            let mut guard = path;
            c.set_group(group);
            match &t.action {
                Action::Assign { var, value } => {
                    let v = eval(&mut c, &state, value, w);
                    let i = var.0 as usize;
                    next.vars[i] = Rc::new(if group.is_some() {
                        versions[i] += 1;
                        let fresh = c.bv_fresh(&p.vars[i].name, versions[i], w);
                        c.bv_assert_eq(&fresh, &v);
                        fresh
                    } else {
                        v
                    });
                }
                Action::Store {
                    array,
                    index,
                    value,
                } => {
                    let idx = eval(&mut c, &state, index, w);
                    let v = eval(&mut c, &state, value, w);
                    let ai = array.0 as usize;
                    let old = state.arrays[ai].clone();
                    array_versions[ai] += 1;
                    let mut cells = Vec::with_capacity(old.len());
                    for (j, cell) in old.iter().enumerate() {
                        let k = c.bv_const(j as i64, w);
                        let hit = c.bv_eq(&idx, &k);
                        let updated = c.bv_ite(hit, &v, cell);
                        cells.push(if group.is_some() {
                            let name = format!("{}[{j}]", p.arrays[ai].name);
                            let fresh = c.bv_fresh(&name, array_versions[ai], w);
                            c.bv_assert_eq(&fresh, &updated);
                            fresh
                        } else {
                            updated
                        });
                    }
                    next.arrays[ai] = Rc::new(cells);
                }
                Action::Branch { cond, taken } => {
                    let g = match branch_guard {
                        Some(g) => g,
                        None => {
                            let v = eval(&mut c, &state, cond, w);
                            let b = c.bv_to_bool(&v);
                            let g = if group.is_some() {
                                let g = c.fresh();
                                c.clause(&[!g, b]);
                                c.clause(&[g, !b]);
                                g
                            } else {
                                b
                            };
                            branch_guard = Some(g);
                            g
                        }
                    };
                    c.set_group(None);
                    guard = c.and(path, if *taken { g } else { !g });
                }
                Action::Assume { cond } => {
                    let v = eval(&mut c, &state, cond, w);
                    let b = c.bv_to_bool(&v);
                    let ok = c.or(!path, b);
                    if group.is_some() {
                        c.assert_lit(ok);
                    } else {
                        checks.push(Check {
                            kind: CheckKind::Assume,
                            location: loc,
                            ok,
                        });
                    }
                }
                Action::Unwind { guard: lg } => {
                    let v = eval(&mut c, &state, lg, w);
                    let b = c.bv_to_bool(&v);
                    let ok = c.or(!path, !b);
                    checks.push(Check {
                        kind: CheckKind::Unwind,
                        location: loc,
                        ok,
                    });
                }
                Action::Skip => {}
            }
            c.set_group(None);
            pending.insert(tid, (guard, next));
        }
    }
    ProgramEncoding {
        circuit: c,
        group_keys,
        inputs,
        checks,
        reach,
        exit_vars,
    }
}

fn merge(c: &mut Circuit, mut inc: Vec<(Lit, SymState)>) -> (Lit, SymState) {
    if inc.len() == 1 {
        return inc.pop().expect("one edge");
    }
    let guards: Vec<Lit> = inc.iter().map(|(g, _)| *g).collect();
    let path = c.or_all(&guards);
    let (_, mut state) = inc.pop().expect("edges");
    for (g, s) in inc.iter().rev() {
        for (i, v) in s.vars.iter().enumerate() {
            if !Rc::ptr_eq(v, &state.vars[i]) && **v != *state.vars[i] {
                state.vars[i] = Rc::new(c.bv_ite(*g, v, &state.vars[i]));
            }
        }
        for (i, a) in s.arrays.iter().enumerate() {
            if !Rc::ptr_eq(a, &state.arrays[i]) && **a != *state.arrays[i] {
                let cells: Vec<Bv> = a
                    .iter()
                    .zip(state.arrays[i].iter())
                    .map(|(x, y)| c.bv_ite(*g, x, y))
                    .collect();
                state.arrays[i] = Rc::new(cells);
            }
        }
    }
    (path, state)
}

fn eval(c: &mut Circuit, s: &SymState, e: &Expr, w: u32) -> Bv {
    match e {
        Expr::Const(v) => c.bv_const(*v, w),
        Expr::Var(v) => (*s.vars[v.0 as usize]).clone(),
        Expr::Load(a, i) => {
            let idx = eval(c, s, i, w);
            let mut acc = c.bv_const(0, w);
            for (j, cell) in s.arrays[a.0 as usize].iter().enumerate().rev() {
                let k = c.bv_const(j as i64, w);
                let hit = c.bv_eq(&idx, &k);
                acc = c.bv_ite(hit, cell, &acc);
            }
            acc
        }
        Expr::Unary(op, a) => {
            let x = eval(c, s, a, w);
            c.bv_unop(*op, &x)
        }
        Expr::Binary(op, a, b) => {
            let x = eval(c, s, a, w);
            let y = eval(c, s, b, w);
            c.bv_binop(*op, &x, &y)
        }
        Expr::Ite(k, a, b) => {
            let kv = eval(c, s, k, w);
            let kb = c.bv_to_bool(&kv);
            let x = eval(c, s, a, w);
            let y = eval(c, s, b, w);
            c.bv_ite(kb, &x, &y)
        }
    }
}

/// Evaluate a lowered expression over explicit operand bit-vectors; used
/// by the trace formula and by tests.
pub(crate) fn eval_with(c: &mut Circuit, vars: &[Bv], arrays: &[Vec<Bv>], e: &Expr, w: u32) -> Bv {
    let s = SymState {
        vars: vars.iter().map(|v| Rc::new(v.clone())).collect(),
        arrays: arrays.iter().map(|a| Rc::new(a.clone())).collect(),
    };
    eval(c, &s, e, w)
}
