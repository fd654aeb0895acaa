//! Core-guided partial weighted MAX-SAT (Fu & Malik with weight splitting)
//! and CoMSS extraction.

pub mod card;

use serde::Serialize;
use thiserror::Error;

use crate::encode::{MaxSatInstance, SourceLoc};
use crate::sat::{Lit, Solver, Status, Var};

pub use card::encode_at_most_k;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaxSatError {
    #[error("hard clauses are unsatisfiable")]
    HardUnsat,
    #[error("model violates a hard clause")]
    ModelViolatesHard,
    #[error("SAT solver budget exhausted")]
    Unknown,
}

/// A minimal set of soft groups whose removal restores satisfiability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comss {
    #[serde(skip)]
    pub selectors: Vec<Var>,
    #[serde(skip)]
    pub groups: Vec<usize>,
    pub statements: Vec<SourceLoc>,
    pub cost: u64,
}

impl Comss {
    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSatSolution {
    pub cost: u64,
    pub comss: Comss,
    pub model: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxSatOptions {
    pub seed: u64,
    /// Per SAT call; `None` means unbounded.
    pub conflict_budget: Option<u64>,
    /// Largest core still minimized by deletion.
    pub trim_limit: usize,
}

impl Default for MaxSatOptions {
    fn default() -> Self {
        MaxSatOptions {
            seed: 0,
            conflict_budget: None,
            trim_limit: 32,
        }
    }
}

struct WorkSoft {
    lits: Vec<Lit>,
    weight: u64,
    act: Lit,
}

fn fresh(solver: &mut Solver) -> Lit {
    solver.new_var().pos()
}

fn activate(solver: &mut Solver, lits: &[Lit]) -> Lit {
    let a = fresh(solver);
    let mut c = lits.to_vec();
    c.push(!a);
    solver.add_clause(&c);
    a
}

/// Optimum cost and one subset-minimal CoMSS realizing it.
pub fn solve_pmaxsat(inst: &MaxSatInstance, opts: &MaxSatOptions) -> Result<MaxSatSolution, MaxSatError> {
    let mut solver = Solver::new(opts.seed);
    solver.set_conflict_budget(opts.conflict_budget);
    solver.add_cnf(&inst.cnf);
    match solver.solve(&[]).status {
        Status::Unsat => return Err(MaxSatError::HardUnsat),
        Status::Unknown => return Err(MaxSatError::Unknown),
        Status::Sat => {}
    }
    let mut work: Vec<WorkSoft> = Vec::new();
    for s in inst.soft.iter().filter(|s| s.weight > 0) {
        let lits = vec![s.selector.pos()];
        let act = activate(&mut solver, &lits);
        work.push(WorkSoft {
            lits,
            weight: s.weight,
            act,
        });
    }
    let mut cost = 0u64;
    loop {
        let assumptions: Vec<Lit> = work.iter().map(|w| w.act).collect();
        let res = solver.solve(&assumptions);
        match res.status {
            Status::Unknown => return Err(MaxSatError::Unknown),
            Status::Sat => {
                let model = res.model;
                debug_assert_eq!(inst.cost_of(&model), cost);
                let comss = extract_comss_with(inst, &model, opts)?;
                return Ok(MaxSatSolution {
                    cost: comss.cost,
                    comss,
                    model,
                });
            }
            Status::Unsat => {}
        }
        let mut core = res.core;
        if core.is_empty() {
            return Err(MaxSatError::HardUnsat);
        }
        if core.len() <= opts.trim_limit {
            core = trim_core(&mut solver, core)?;
        }
        let members: Vec<usize> = core
            .iter()
            .filter_map(|l| work.iter().position(|w| w.act == *l))
            .collect();
        let wmin = members.iter().map(|&i| work[i].weight).min().expect("core");
        let mut relax = Vec::with_capacity(members.len());
        for &i in &members {
            if work[i].weight > wmin {
                let residual = work[i].weight - wmin;
                let lits = work[i].lits.clone();
                let act = activate(&mut solver, &lits);
                work.push(WorkSoft {
                    lits,
                    weight: residual,
                    act,
                });
                work[i].weight = wmin;
            }
            let r = fresh(&mut solver);
            relax.push(r);
            work[i].lits.push(r);
            let lits = work[i].lits.clone();
            work[i].act = activate(&mut solver, &lits);
        }
        let mut scratch = crate::sat::Cnf::new();
        let base = solver.num_vars();
        for _ in 0..base {
            scratch.new_var(crate::sat::VarMeta::Aux);
        }
        for c in encode_at_most_k(&mut scratch, &relax, 1) {
            solver.ensure_vars(scratch.var_count());
            solver.add_clause(&c);
        }
        solver.ensure_vars(scratch.var_count());
        solver.add_clause(&relax);
        cost += wmin;
    }
}

/// Deletion-based core minimization over assumption literals.
fn trim_core(solver: &mut Solver, core: Vec<Lit>) -> Result<Vec<Lit>, MaxSatError> {
    let mut keep = core;
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        let res = solver.solve(&trial);
        match res.status {
            Status::Unsat => {
                // the new core is a subset of `trial`
                keep = trial
                    .into_iter()
                    .filter(|l| res.core.contains(l))
                    .collect();
            }
            Status::Sat => i += 1,
            Status::Unknown => return Err(MaxSatError::Unknown),
        }
    }
    Ok(keep)
}

/// Soft units falsified by `model`, shrunk to a subset-minimal correction set.
pub fn extract_comss(inst: &MaxSatInstance, model: &[bool]) -> Result<Comss, MaxSatError> {
    extract_comss_with(inst, model, &MaxSatOptions::default())
}

pub fn extract_comss_with(inst: &MaxSatInstance, model: &[bool], opts: &MaxSatOptions) -> Result<Comss, MaxSatError> {
    if model.len() < inst.cnf.var_count() || !inst.cnf.is_satisfied_by(model) {
        return Err(MaxSatError::ModelViolatesHard);
    }
    let mut falsified: Vec<usize> = (0..inst.soft.len())
        .filter(|&i| !inst.soft[i].selector.pos().eval(model))
        .collect();
    if !falsified.is_empty() {
        let mut solver = Solver::new(opts.seed);
        solver.set_conflict_budget(opts.conflict_budget);
        solver.add_cnf(&inst.cnf);
        let mut k = 0;
        while k < falsified.len() {
            let candidate = falsified[k];
            let assumptions: Vec<Lit> = (0..inst.soft.len())
                .filter(|i| *i == candidate || !falsified.contains(i))
                .map(|i| inst.soft[i].selector.pos())
                .collect();
            let res = solver.solve(&assumptions);
            match res.status {
                Status::Sat => {
                    let m = res.model;
                    falsified.retain(|&i| !inst.soft[i].selector.pos().eval(&m));
                }
                Status::Unsat => k += 1,
                Status::Unknown => return Err(MaxSatError::Unknown),
            }
        }
    }
    Ok(comss_of(inst, &falsified))
}

fn comss_of(inst: &MaxSatInstance, soft_idx: &[usize]) -> Comss {
    let mut statements: Vec<SourceLoc> = soft_idx
        .iter()
        .filter_map(|&i| inst.groups[inst.soft[i].group].location.clone())
        .collect();
    statements.sort();
    statements.dedup();
    Comss {
        selectors: soft_idx.iter().map(|&i| inst.soft[i].selector).collect(),
        groups: soft_idx.iter().map(|&i| inst.soft[i].group).collect(),
        statements,
        cost: soft_idx.iter().map(|&i| inst.soft[i].weight).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{Cnf, VarMeta};

    fn opts() -> MaxSatOptions {
        MaxSatOptions::default()
    }

    #[test]
    fn small_weighted_example() {
        // hard (x1); soft (¬x1):1, (x1 ∨ x2):1, (¬x2):1
        let mut cnf = Cnf::new();
        let x1 = cnf.new_var(VarMeta::Aux);
        let x2 = cnf.new_var(VarMeta::Aux);
        let mut inst = MaxSatInstance::new(cnf);
        inst.add_hard(&[x1.pos()]);
        let g0 = inst.add_group(&[vec![x1.neg()]], 1, None);
        inst.add_group(&[vec![x1.pos(), x2.pos()]], 1, None);
        inst.add_group(&[vec![x2.neg()]], 1, None);
        let sol = solve_pmaxsat(&inst, &opts()).unwrap();
        assert_eq!(sol.cost, 1);
        assert_eq!(sol.comss.groups, vec![g0]);
    }

    #[test]
    fn nothing_to_falsify() {
        let mut cnf = Cnf::new();
        let x = cnf.new_var(VarMeta::Aux);
        let mut inst = MaxSatInstance::new(cnf);
        inst.add_hard(&[x.pos()]);
        let sol = solve_pmaxsat(&inst, &opts()).unwrap();
        assert_eq!(sol.cost, 0);
        assert!(sol.comss.is_empty());
    }

    #[test]
    fn hard_unsat() {
        let mut cnf = Cnf::new();
        let x = cnf.new_var(VarMeta::Aux);
        let mut inst = MaxSatInstance::new(cnf);
        inst.add_hard(&[x.pos()]);
        inst.add_hard(&[x.neg()]);
        inst.add_group(&[vec![x.pos()]], 1, None);
        assert_eq!(solve_pmaxsat(&inst, &opts()), Err(MaxSatError::HardUnsat));
    }

    #[test]
    fn shrinking_drops_redundant_selector() {
        // hard (a); soft (¬a):5, (b):1, (¬b):1
        let mut cnf = Cnf::new();
        let a = cnf.new_var(VarMeta::Aux);
        let b = cnf.new_var(VarMeta::Aux);
        let mut inst = MaxSatInstance::new(cnf);
        inst.add_hard(&[a.pos()]);
        let ga = inst.add_group(&[vec![a.neg()]], 5, None);
        let gb = inst.add_group(&[vec![b.pos()]], 1, None);
        let gnb = inst.add_group(&[vec![b.neg()]], 1, None);
        // a model falsifying all three selectors with b = true
        let mut model = vec![false; inst.cnf.var_count()];
        model[a.index()] = true;
        model[b.index()] = true;
        let c = extract_comss(&inst, &model).unwrap();
        assert!(c.groups.contains(&ga));
        assert!(!c.groups.contains(&gb));
        assert_eq!(c.groups.len(), 2);
        assert!(c.groups.contains(&gnb));
        let sol = solve_pmaxsat(&inst, &opts()).unwrap();
        assert_eq!(sol.cost, 6);
    }

    #[test]
    fn rejects_model_violating_hard() {
        let mut cnf = Cnf::new();
        let a = cnf.new_var(VarMeta::Aux);
        let mut inst = MaxSatInstance::new(cnf);
        inst.add_hard(&[a.pos()]);
        let model = vec![false; inst.cnf.var_count()];
        assert_eq!(extract_comss(&inst, &model), Err(MaxSatError::ModelViolatesHard));
    }
}
