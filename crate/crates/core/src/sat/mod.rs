//! Propositional layer: literals, CNF containers, a CDCL solver and DIMACS IO.

pub mod dimacs;
mod heap;
pub mod solver;

use std::fmt;
use std::ops::Not;

pub use solver::{solve, SolveResult, Solver, Status};

/// Boolean variable, 0-based. DIMACS index is `index() + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    #[inline]
    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A literal packed as `var << 1 | negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    /// Parses a nonzero DIMACS integer.
    pub fn from_dimacs(x: i64) -> Lit {
        debug_assert!(x != 0);
        Lit::new(Var((x.unsigned_abs() - 1) as u32), x > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Value of this literal under a full assignment indexed by variable.
    #[inline]
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var().index()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// What a Boolean variable stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarMeta {
    /// Bit `bit` of SSA version `version` of a program variable (array cells use `name[i]`).
    ProgramBit {
        name: String,
        version: u32,
        bit: u32,
    },
    /// Selector variable of the clause group with this index.
    Selector(usize),
    /// Tseitin or other auxiliary variable.
    Aux,
}

/// A clause set with per-variable metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub clauses: Vec<Vec<Lit>>,
    pub meta: Vec<VarMeta>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var_count(&self) -> usize {
        self.meta.len()
    }

    pub fn new_var(&mut self, meta: VarMeta) -> Var {
        self.meta.push(meta);
        Var(self.meta.len() as u32 - 1)
    }

    /// Adds a clause after removing duplicate literals. Tautologies are dropped
    /// and `None` is returned; otherwise the clause index.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Option<usize> {
        let clause = normalize_clause(lits)?;
        debug_assert!(clause.iter().all(|l| l.var().index() < self.var_count()));
        self.clauses.push(clause);
        Some(self.clauses.len() - 1)
    }

    /// True if `model` satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| l.eval(model)))
    }
}

/// Sorts and dedups; `None` for a tautology.
pub fn normalize_clause(lits: &[Lit]) -> Option<Vec<Lit>> {
    let mut c = lits.to_vec();
    c.sort_unstable();
    c.dedup();
    if c.windows(2).any(|w| w[0].var() == w[1].var()) {
        return None;
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_packing() {
        let v = Var(7);
        assert_eq!(v.pos().var(), v);
        assert!(v.pos().is_positive());
        assert!(!v.neg().is_positive());
        assert_eq!(!v.pos(), v.neg());
        assert_eq!(Lit::from_dimacs(-8), v.neg());
        assert_eq!(v.pos().to_dimacs(), 8);
    }

    #[test]
    fn tautologies_are_dropped() {
        let mut cnf = Cnf::new();
        let a = cnf.new_var(VarMeta::Aux);
        let b = cnf.new_var(VarMeta::Aux);
        assert_eq!(cnf.add_clause(&[a.pos(), a.neg()]), None);
        assert_eq!(cnf.add_clause(&[b.pos(), a.pos(), b.pos()]), Some(0));
        assert_eq!(cnf.clauses[0].len(), 2);
    }
}
