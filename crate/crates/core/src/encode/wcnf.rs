//! DIMACS WCNF export and import.
//!
//! Export writes `p wcnf <vars> <clauses> <top>`, every hard clause with
//! weight `top`, one weighted unit per selector, and a comment
//! `c group <selector> <file>:<line> [iter <k>]` per group.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::sat::{Cnf, Lit, Var, VarMeta};

use super::instance::{ClauseGroup, MaxSatInstance, SoftUnit, SourceLoc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WcnfError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

pub fn export_wcnf(inst: &MaxSatInstance) -> String {
    let mut out = String::new();
    let top = inst.top_weight;
    for s in &inst.soft {
        let g = &inst.groups[s.group];
        let _ = write!(out, "c group {}", s.selector.pos().to_dimacs());
        if let Some(loc) = &g.location {
            let _ = write!(out, " {}:{}", loc.file, loc.line);
            if let Some(k) = loc.iter {
                let _ = write!(out, " iter {k}");
            }
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "p wcnf {} {} {}",
        inst.cnf.var_count(),
        inst.cnf.clauses.len() + inst.soft.len(),
        top
    );
    for c in &inst.cnf.clauses {
        let _ = write!(out, "{top}");
        for l in c {
            let _ = write!(out, " {l}");
        }
        out.push_str(" 0\n");
    }
    for s in &inst.soft {
        let _ = writeln!(out, "{} {} 0", s.weight, s.selector.pos());
    }
    out
}

fn parse_group_comment(rest: &str) -> Option<(i64, Option<SourceLoc>)> {
    let mut it = rest.split_whitespace();
    let lit: i64 = it.next()?.parse().ok()?;
    let loc = it.next().and_then(|fl| {
        let (file, line) = fl.rsplit_once(':')?;
        let line = line.parse().ok()?;
        let iter = match (it.next(), it.next()) {
            (Some("iter"), Some(k)) => k.parse().ok(),
            _ => None,
        };
        Some(SourceLoc {
            file: file.to_string(),
            line,
            iter,
        })
    });
    Some((lit, loc))
}

/// Parse WCNF. Positive unit soft clauses become groups over their own
/// variable; any other soft clause `C` gets a fresh selector `s` with hard
/// clause `C ∨ ¬s`. Accepts both the `p wcnf` format and the newer
/// header-less format with `h` for hard clauses.
pub fn import_wcnf(text: &str) -> Result<MaxSatInstance, WcnfError> {
    let mut top: Option<u64> = None;
    let mut declared_vars = 0usize;
    let mut hard: Vec<Vec<Lit>> = Vec::new();
    let mut soft: Vec<(u64, Vec<Lit>)> = Vec::new();
    let mut labels: HashMap<i64, Option<SourceLoc>> = HashMap::new();
    let mut max_var = 0usize;
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_weight: Option<Option<u64>> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('c') {
            if let Some(g) = rest.trim_start().strip_prefix("group ") {
                if let Some((lit, loc)) = parse_group_comment(g) {
                    labels.insert(lit, loc);
                }
            }
            continue;
        }
        let bad = |msg: &str| WcnfError::Malformed {
            line,
            msg: msg.to_string(),
        };
        if let Some(rest) = s.strip_prefix('p') {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() < 3 || f[0] != "wcnf" {
                return Err(bad("expected `p wcnf <vars> <clauses> [top]`"));
            }
            declared_vars = f[1].parse().map_err(|_| bad("bad variable count"))?;
            top = match f.get(3) {
                Some(t) => Some(t.parse().map_err(|_| bad("bad top weight"))?),
                None => Some(u64::MAX),
            };
            continue;
        }
        let mut toks = s.split_whitespace();
        if pending_weight.is_none() {
            let first = toks.next().ok_or_else(|| bad("empty clause line"))?;
            pending_weight = Some(if first == "h" {
                None
            } else {
                Some(first.parse().map_err(|_| bad("bad weight"))?)
            });
        }
        for t in toks {
            let x: i64 = t.parse().map_err(|_| bad("bad literal"))?;
            if x == 0 {
                let lits: Vec<Lit> = pending.drain(..).map(Lit::from_dimacs).collect();
                match pending_weight.take().expect("weight") {
                    Some(w) if top.map_or(true, |t| w < t) => soft.push((w, lits)),
                    _ => hard.push(lits),
                }
            } else {
                max_var = max_var.max(x.unsigned_abs() as usize);
                pending.push(x);
            }
        }
    }
    if pending_weight.is_some() {
        return Err(WcnfError::Malformed {
            line: text.lines().count(),
            msg: "unterminated clause".into(),
        });
    }
    let mut cnf = Cnf::new();
    for _ in 0..declared_vars.max(max_var) {
        cnf.new_var(VarMeta::Aux);
    }
    for c in &hard {
        cnf.add_clause(c);
    }
    let mut inst = MaxSatInstance::new(cnf);
    let mut used: HashMap<Var, usize> = HashMap::new();
    for (w, lits) in soft {
        let reuse = match lits.as_slice() {
            [l] if l.is_positive() && !used.contains_key(&l.var()) => Some(l.var()),
            _ => None,
        };
        let gi = inst.groups.len();
        let sel = match reuse {
            Some(v) => {
                inst.cnf.meta[v.index()] = VarMeta::Selector(gi);
                v
            }
            None => {
                let v = inst.cnf.new_var(VarMeta::Selector(gi));
                let mut c = lits.clone();
                c.push(v.neg());
                inst.cnf.add_clause(&c);
                v
            }
        };
        used.insert(sel, gi);
        let members = inst
            .cnf
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&sel.neg()))
            .map(|(i, _)| i)
            .collect();
        let location = labels.get(&sel.pos().to_dimacs()).cloned().flatten();
        inst.groups.push(ClauseGroup {
            selector: sel,
            key: None,
            location,
            member_clauses: members,
        });
        inst.soft.push(SoftUnit {
            selector: sel,
            weight: w,
            group: gi,
        });
    }
    inst.recompute_top();
    Ok(inst)
}
