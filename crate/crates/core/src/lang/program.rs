//! Lowered program: a DAG of control locations connected by guarded
//! transitions over fixed-width integer state.
//!
//! Location ids are allocated in topological order, so every transition goes
//! from a lower to a higher id and any execution visits locations in
//! increasing order.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::{BinOp, Span, StmtId, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ArrayId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Loc(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TransId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AssertId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub width: u32,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    pub width: u32,
    pub len: u32,
    pub role: Role,
}

/// Side-effect free integer expression. Comparisons and connectives yield 0/1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Load(ArrayId, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(a))
    }

    /// `guard -> body`, or just `body` when there is no guard.
    pub fn implies(guard: Option<Expr>, body: Expr) -> Expr {
        match guard {
            None => body,
            Some(g) => Expr::bin(BinOp::Or, Expr::not(g), body),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Load(_, i) | Expr::Unary(_, i) => i.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Ite(c, a, b) => {
                c.visit_vars(f);
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn visit_arrays(&self, f: &mut impl FnMut(ArrayId)) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Load(a, i) => {
                f(*a);
                i.visit_arrays(f);
            }
            Expr::Unary(_, i) => i.visit_arrays(f),
            Expr::Binary(_, a, b) => {
                a.visit_arrays(f);
                b.visit_arrays(f);
            }
            Expr::Ite(c, a, b) => {
                c.visit_arrays(f);
                a.visit_arrays(f);
                b.visit_arrays(f);
            }
        }
    }
}

/// Effect of a transition. Variables not written are framed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Assign { var: VarId, value: Expr },
    Store { array: ArrayId, index: Expr, value: Expr },
    /// One side of a two-way branch; both sides leave the same location.
    Branch { cond: Expr, taken: bool },
    Assume { cond: Expr },
    /// Loop exit after the last unrolled copy: requires the loop guard to be false.
    Unwind { guard: Expr },
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LoopContext {
    /// Statement id of the `while`.
    pub loop_id: StmtId,
    /// 1-based unrolling index.
    pub iteration: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: TransId,
    pub source: Loc,
    pub target: Loc,
    pub action: Action,
    /// Source statement, `None` for structural edges and unwinding assumptions.
    pub stmt: Option<StmtId>,
    pub line: u32,
    pub column: u32,
    pub loop_context: Option<LoopContext>,
    /// Emitted from a trusted function body; never gets a selector.
    pub trusted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssertKind {
    Explicit,
    ArrayBounds,
    DivisionGuard,
}

/// A source-level assertion. Unrolling and inlining may place it at several
/// locations (see [`AssertionSite`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionSpec {
    pub id: AssertId,
    pub line: u32,
    pub column: u32,
    pub kind: AssertKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionSite {
    pub assertion: AssertId,
    pub location: Loc,
    pub predicate: Expr,
}

/// Integer constant token in an executable statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstToken {
    pub span: Span,
    pub value: i64,
    /// Set when the token names a `const` declaration.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpToken {
    pub span: Span,
    pub op: BinOp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementInfo {
    pub id: StmtId,
    pub line: u32,
    pub column: u32,
    pub trusted: bool,
    pub constants: Vec<ConstToken>,
    pub operators: Vec<OpToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub file: String,
    pub width: u32,
    pub bound: u32,
    pub vars: Vec<VarDecl>,
    pub arrays: Vec<ArrayDecl>,
    pub num_locations: u32,
    pub initial: Loc,
    pub exit: Loc,
    pub transitions: Vec<Transition>,
    pub assertions: Vec<AssertionSpec>,
    pub sites: Vec<AssertionSite>,
    pub statements: BTreeMap<StmtId, StatementInfo>,
    pub(crate) outgoing: Vec<Vec<TransId>>,
    pub(crate) incoming: Vec<Vec<TransId>>,
    pub(crate) sites_at: Vec<Vec<usize>>,
}

impl Program {
    pub fn transition(&self, id: TransId) -> &Transition {
        &self.transitions[id.0 as usize]
    }

    pub fn outgoing(&self, l: Loc) -> &[TransId] {
        &self.outgoing[l.0 as usize]
    }

    pub fn incoming(&self, l: Loc) -> &[TransId] {
        &self.incoming[l.0 as usize]
    }

    /// Assertion sites checked on arrival at `l`, in evaluation order.
    pub fn sites_at(&self, l: Loc) -> impl Iterator<Item = &AssertionSite> {
        self.sites_at[l.0 as usize].iter().map(|&i| &self.sites[i])
    }

    pub fn assertion(&self, id: AssertId) -> &AssertionSpec {
        &self.assertions[id.0 as usize]
    }

    pub fn var(&self, v: VarId) -> &VarDecl {
        &self.vars[v.0 as usize]
    }

    pub fn array(&self, a: ArrayId) -> &ArrayDecl {
        &self.arrays[a.0 as usize]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn array_by_name(&self, name: &str) -> Option<ArrayId> {
        self.arrays
            .iter()
            .position(|v| v.name == name)
            .map(|i| ArrayId(i as u32))
    }

    pub fn inputs(&self) -> impl Iterator<Item = (VarId, &VarDecl)> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == Role::Input)
            .map(|(i, v)| (VarId(i as u32), v))
    }

    pub fn input_arrays(&self) -> impl Iterator<Item = (ArrayId, &ArrayDecl)> {
        self.arrays
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == Role::Input)
            .map(|(i, v)| (ArrayId(i as u32), v))
    }

    /// Source position of every transition.
    pub fn statement_table(&self) -> BTreeMap<TransId, (u32, u32)> {
        self.transitions
            .iter()
            .map(|t| (t.id, (t.line, t.column)))
            .collect()
    }

    /// Lines that own at least one statement-bearing transition.
    pub fn executable_lines(&self) -> Vec<u32> {
        let mut lines: Vec<u32> = self
            .transitions
            .iter()
            .filter(|t| t.stmt.is_some())
            .map(|t| t.line)
            .collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }

    pub fn has_loops(&self) -> bool {
        self.transitions.iter().any(|t| t.loop_context.is_some())
    }

    pub(crate) fn index(&mut self) {
        let n = self.num_locations as usize;
        self.outgoing = vec![Vec::new(); n];
        self.incoming = vec![Vec::new(); n];
        self.sites_at = vec![Vec::new(); n];
        for t in &self.transitions {
            self.outgoing[t.source.0 as usize].push(t.id);
            self.incoming[t.target.0 as usize].push(t.id);
        }
        for (i, s) in self.sites.iter().enumerate() {
            self.sites_at[s.location.0 as usize].push(i);
        }
    }
}
