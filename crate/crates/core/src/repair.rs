//! Mutation-based repair of localized statements: integer constants ±1 and
//! single-operator swaps, each verified by bounded model checking.

use serde::Serialize;
use similar::TextDiff;
use thiserror::Error;

use crate::bmc::{generate_counterexample, Target};
use crate::exec::{execute, TestInput, Verdict};
use crate::lang::{compile, BinOp, FrontendError, LowerOptions, Program, Span};
use crate::localize::{localize, LocalizeError, LocalizeOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("the program has no failing execution within the bound")]
    NotAFailingProgram,
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error(transparent)]
    Bmc(#[from] crate::bmc::BmcError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RepairKind {
    #[serde(rename = "constant+1")]
    ConstantPlusOne,
    #[serde(rename = "constant-1")]
    ConstantMinusOne,
    #[serde(rename = "operator")]
    OperatorSwap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairCandidate {
    pub file: String,
    pub line: u32,
    pub kind: RepairKind,
    pub original: String,
    pub replacement: String,
    pub verified: bool,
    /// Unified diff against the original source.
    pub patch: String,
    #[serde(skip)]
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Families {
    pub off_by_one: bool,
    pub operator: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    /// Failing input the repair was driven by.
    pub test: TestInput,
    /// Localized lines, in order of first appearance.
    pub lines: Vec<u32>,
    /// Every mutant that compiled, verified or not, in candidate order.
    pub candidates: Vec<RepairCandidate>,
}

impl RepairReport {
    pub fn verified(&self) -> impl Iterator<Item = &RepairCandidate> {
        self.candidates.iter().filter(|c| c.verified)
    }

    pub fn primary(&self) -> Option<&RepairCandidate> {
        self.verified().next()
    }
}

/// Replacement operators tried for `op`.
pub fn operator_family(op: BinOp) -> Vec<BinOp> {
    use BinOp::*;
    const CMP: [BinOp; 6] = [Lt, Le, Gt, Ge, Eq, Ne];
    match op {
        Lt | Le | Gt | Ge | Eq | Ne => CMP.iter().copied().filter(|o| *o != op).collect(),
        Add => vec![Sub],
        Sub => vec![Add],
        Mul => vec![Div],
        Div => vec![Mul],
        And => vec![Or],
        Or => vec![And],
        Rem => vec![],
    }
}

/// True iff bounded model checking finds no assertion violation in `p` and
/// every witness test passes.
pub fn verify_fix(p: &Program, witnesses: &[TestInput], seed: u64) -> bool {
    match generate_counterexample(p, Target::Any, seed) {
        Ok(None) => {}
        _ => return false,
    }
    witnesses
        .iter()
        .all(|t| t.validate(p).is_ok() && execute(p, t).verdict == Verdict::Pass)
}

struct Mutation {
    line: u32,
    kind: RepairKind,
    span: Span,
    original: String,
    replacement: String,
    spliced: String,
}

fn mutations(p: &Program, source: &str, lines: &[u32], families: Families) -> Vec<Mutation> {
    let mut out = Vec::new();
    for &line in lines {
        for info in p.statements.values().filter(|s| s.line == line && !s.trusted) {
            if families.off_by_one {
                for c in &info.constants {
                    for (kind, d) in [(RepairKind::ConstantPlusOne, 1i64), (RepairKind::ConstantMinusOne, -1)] {
                        let sign = if d > 0 { '+' } else { '-' };
                        let (original, replacement, spliced) = match &c.name {
                            Some(n) => (n.clone(), format!("{n} {sign} 1"), format!("({n} {sign} 1)")),
                            None => {
                                let v = c.value + d;
                                let text = if v < 0 { format!("({v})") } else { v.to_string() };
                                (source[c.span.start..c.span.end].to_string(), v.to_string(), text)
                            }
                        };
                        out.push(Mutation {
                            line,
                            kind,
                            span: c.span,
                            original,
                            replacement,
                            spliced,
                        });
                    }
                }
            }
            if families.operator {
                for o in &info.operators {
                    for r in operator_family(o.op) {
                        out.push(Mutation {
                            line,
                            kind: RepairKind::OperatorSwap,
                            span: o.span,
                            original: o.op.symbol().to_string(),
                            replacement: r.symbol().to_string(),
                            spliced: r.symbol().to_string(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn unified_diff(file: &str, old: &str, new: &str) -> String {
    TextDiff::from_lines(old, new)
        .unified_diff()
        .context_radius(2)
        .header(&format!("a/{file}"), &format!("b/{file}"))
        .to_string()
}

fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).max(1);
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("verification thread panicked"))
            .collect()
    })
}

/// Localize the first counterexample of `source`, then try every mutation of
/// the requested families on the localized lines.
pub fn repair(
    source: &str,
    lower: &LowerOptions,
    opts: &LocalizeOptions,
    families: Families,
) -> Result<RepairReport, RepairError> {
    let p = compile(source, lower)?;
    let cx = generate_counterexample(&p, Target::Any, opts.seed)?.ok_or(RepairError::NotAFailingProgram)?;
    let report = localize(&p, cx.assertion, &cx.test, opts)?;
    let mut lines: Vec<u32> = Vec::new();
    for c in &report.iterations {
        for s in &c.statements {
            if !lines.contains(&s.line) {
                lines.push(s.line);
            }
        }
    }
    let muts = mutations(&p, source, &lines, families);
    let witnesses = [cx.test.clone()];
    let results = parallel_map(&muts, |m| {
        let mut text = String::with_capacity(source.len() + 8);
        text.push_str(&source[..m.span.start]);
        text.push_str(&m.spliced);
        text.push_str(&source[m.span.end..]);
        // literals that overflow the width are compile errors, so they drop out here
        let mp = compile(&text, lower).ok()?;
        let verified = verify_fix(&mp, &witnesses, opts.seed);
        Some(RepairCandidate {
            file: p.file.clone(),
            line: m.line,
            kind: m.kind,
            original: m.original.clone(),
            replacement: m.replacement.clone(),
            verified,
            patch: unified_diff(&p.file, source, &text),
            source: text,
        })
    });
    Ok(RepairReport {
        test: cx.test,
        lines,
        candidates: results.into_iter().flatten().collect(),
    })
}

/// The off-by-one repair: the first verified constant mutation, if any.
pub fn repair_off_by_one(
    source: &str,
    lower: &LowerOptions,
    opts: &LocalizeOptions,
) -> Result<Option<RepairCandidate>, RepairError> {
    let r = repair(
        source,
        lower,
        opts,
        Families {
            off_by_one: true,
            operator: false,
        },
    )?;
    Ok(r.primary().cloned())
}

/// All verified single-operator mutations.
pub fn repair_operator(
    source: &str,
    lower: &LowerOptions,
    opts: &LocalizeOptions,
) -> Result<Vec<RepairCandidate>, RepairError> {
    let r = repair(
        source,
        lower,
        opts,
        Families {
            off_by_one: false,
            operator: true,
        },
    )?;
    Ok(r.verified().cloned().collect())
}
