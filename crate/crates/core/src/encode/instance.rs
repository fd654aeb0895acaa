//! Partial weighted MAX-SAT instances built from failing runs.

use serde::Serialize;

use crate::exec::{execute, InputValue, TestInput, Verdict};
use crate::lang::{AssertId, Program};
use crate::sat::{Cnf, Lit, Var, VarMeta};

use super::circuit::bv_value;
use super::symbolic::{encode_program, CheckKind, GroupKey, Granularity, InputBits, Selectors};
use super::EncodeError;

/// A source location reported to users.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceLoc {
    pub file: String,
    pub line: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iter: Option<u32>,
}

impl std::fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.file, self.line)?;
        if let Some(k) = self.iter {
            write!(f, " (iteration {k})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseGroup {
    pub selector: Var,
    pub key: Option<GroupKey>,
    pub location: Option<SourceLoc>,
    /// Indices into `MaxSatInstance::cnf.clauses`; each contains `¬selector`.
    pub member_clauses: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftUnit {
    pub selector: Var,
    pub weight: u64,
    pub group: usize,
}

/// Hard clauses are all of `cnf.clauses`; the soft part is one weighted unit
/// clause `[λ]` per group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSatInstance {
    pub cnf: Cnf,
    pub soft: Vec<SoftUnit>,
    pub groups: Vec<ClauseGroup>,
    pub top_weight: u64,
    pub granularity: Option<Granularity>,
}

impl MaxSatInstance {
    pub fn new(cnf: Cnf) -> Self {
        MaxSatInstance {
            cnf,
            soft: Vec::new(),
            groups: Vec::new(),
            top_weight: 1,
            granularity: None,
        }
    }

    pub fn add_hard(&mut self, clause: &[Lit]) {
        self.cnf.add_clause(clause);
    }

    /// Add a soft group: a fresh selector guarding `clauses`, with a unit
    /// soft clause of the given weight. Returns the group index.
    pub fn add_group(&mut self, clauses: &[Vec<Lit>], weight: u64, location: Option<SourceLoc>) -> usize {
        let gi = self.groups.len();
        let sel = self.cnf.new_var(VarMeta::Selector(gi));
        let mut members = Vec::new();
        for c in clauses {
            let mut aug = c.clone();
            aug.push(sel.neg());
            if let Some(i) = self.cnf.add_clause(&aug) {
                members.push(i);
            }
        }
        self.groups.push(ClauseGroup {
            selector: sel,
            key: None,
            location,
            member_clauses: members,
        });
        self.soft.push(SoftUnit {
            selector: sel,
            weight,
            group: gi,
        });
        self.recompute_top();
        gi
    }

    pub fn soft_weight_sum(&self) -> u64 {
        self.soft.iter().map(|s| s.weight).sum()
    }

    pub fn recompute_top(&mut self) {
        self.top_weight = self.soft_weight_sum() + 1;
    }

    pub fn group_of_selector(&self, v: Var) -> Option<usize> {
        self.groups.iter().position(|g| g.selector == v)
    }

    /// Total weight of soft units falsified by `model`.
    pub fn cost_of(&self, model: &[bool]) -> u64 {
        self.soft
            .iter()
            .filter(|s| !s.selector.pos().eval(model))
            .map(|s| s.weight)
            .sum()
    }
}

/// Build the localization instance for a failing `test`: hard clauses fix
/// the inputs, require `assertion` at every site, and encode the program;
/// each non-trusted statement is a soft group of weight `alpha`.
pub fn build_instance(
    p: &Program,
    test: &TestInput,
    assertion: AssertId,
    granularity: Granularity,
    alpha: u64,
) -> Result<MaxSatInstance, EncodeError> {
    test.validate(p)?;
    match execute(p, test).verdict {
        Verdict::Fail { assertion: a, .. } if a == assertion => {}
        _ => return Err(EncodeError::NotAFailingTest),
    }
    let mut enc = encode_program(p, Selectors::Grouped(granularity));
    let c = &mut enc.circuit;
    c.set_group(None);
    for (name, bits) in &enc.inputs {
        match (bits, test.values.get(name)) {
            (InputBits::Scalar(b), Some(InputValue::Scalar(v))) => {
                let k = c.bv_const(*v, p.width);
                c.bv_assert_eq(b, &k);
            }
            (InputBits::Array(cells), Some(InputValue::Array(vs))) => {
                for (b, v) in cells.iter().zip(vs) {
                    let k = c.bv_const(*v, p.width);
                    c.bv_assert_eq(b, &k);
                }
            }
            _ => return Err(EncodeError::NotAFailingTest),
        }
    }
    for ch in &enc.checks {
        match ch.kind {
            CheckKind::Assertion(a) if a != assertion => {}
            _ => c.assert_lit(ch.ok),
        }
    }
    let mut inst = MaxSatInstance::new(std::mem::take(&mut c.cnf));
    inst.granularity = Some(granularity);
    for (gi, (g, key)) in c.groups.iter().zip(&enc.group_keys).enumerate() {
        let line = p.statements.get(&key.stmt).map_or(0, |s| s.line);
        inst.groups.push(ClauseGroup {
            selector: g.selector,
            key: Some(*key),
            location: Some(SourceLoc {
                file: p.file.clone(),
                line,
                iter: key.loop_context.map(|l| l.iteration),
            }),
            member_clauses: g.clauses.clone(),
        });
        inst.soft.push(SoftUnit {
            selector: g.selector,
            weight: alpha,
            group: gi,
        });
    }
    inst.recompute_top();
    Ok(inst)
}

/// Iteration-decaying weights: a loop group at iteration κ weighs `α + η − κ`;
/// groups outside loops weigh `α + η`.
pub fn assign_loop_weights(inst: &mut MaxSatInstance, alpha: u64, eta: u32) -> Result<(), EncodeError> {
    if inst.granularity != Some(Granularity::Iteration) {
        return Err(EncodeError::Granularity);
    }
    let eta = u64::from(eta);
    for s in &mut inst.soft {
        let g = &inst.groups[s.group];
        s.weight = match g.key.and_then(|k| k.loop_context) {
            Some(lc) => {
                let k = u64::from(lc.iteration);
                if k < 1 || k > eta {
                    return Err(EncodeError::Granularity);
                }
                alpha + eta - k
            }
            None => alpha + eta,
        };
    }
    inst.recompute_top();
    Ok(())
}

/// Decode the program inputs from a model of a program encoding.
pub(crate) fn decode_inputs(
    inputs: &std::collections::BTreeMap<String, InputBits>,
    model: &[bool],
) -> TestInput {
    let mut t = TestInput::new();
    for (name, bits) in inputs {
        match bits {
            InputBits::Scalar(b) => t = t.with(name, bv_value(b, model)),
            InputBits::Array(cells) => {
                t = t.with_array(name, cells.iter().map(|b| bv_value(b, model)).collect())
            }
        }
    }
    t
}
