//! Tseitin circuit builder over a [`Cnf`], with constant folding and
//! optional clause grouping. While a group is active every emitted clause
//! gets the group's `¬λ` appended and is recorded as a member of the group.

use std::collections::HashMap;

use crate::lang::{BinOp, UnOp};
use crate::sat::{Cnf, Lit, Var, VarMeta};

/// Bit-vector, least significant bit first.
pub type Bv = Vec<Lit>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Gate {
    And,
    Xor,
    Ite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupBuf {
    pub selector: Var,
    pub clauses: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    pub cnf: Cnf,
    tt: Lit,
    pub groups: Vec<GroupBuf>,
    /// Indices of clauses emitted outside any group.
    pub hard: Vec<usize>,
    active: Option<usize>,
    cache: HashMap<(Option<usize>, Gate, Lit, Lit, Lit), Lit>,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        let mut cnf = Cnf::new();
        let t = cnf.new_var(VarMeta::Aux);
        let unit = cnf.add_clause(&[t.pos()]).expect("unit clause");
        Circuit {
            cnf,
            tt: t.pos(),
            groups: Vec::new(),
            hard: vec![unit],
            active: None,
            cache: HashMap::new(),
        }
    }

    pub fn tt(&self) -> Lit {
        self.tt
    }

    pub fn ff(&self) -> Lit {
        !self.tt
    }

    pub fn is_const(&self, l: Lit) -> bool {
        l.var() == self.tt.var()
    }

    pub fn fresh(&mut self) -> Lit {
        self.cnf.new_var(VarMeta::Aux).pos()
    }

    pub fn fresh_meta(&mut self, meta: VarMeta) -> Lit {
        self.cnf.new_var(meta).pos()
    }

    /// Create a new clause group with a fresh selector; returns its index.
    pub fn new_group(&mut self) -> usize {
        let id = self.groups.len();
        let selector = self.cnf.new_var(VarMeta::Selector(id));
        self.groups.push(GroupBuf {
            selector,
            clauses: Vec::new(),
        });
        id
    }

    pub fn set_group(&mut self, g: Option<usize>) {
        self.active = g;
    }

    pub fn group(&self) -> Option<usize> {
        self.active
    }

    /// Emit a clause in the active context, folding constant literals.
    pub fn clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len() + 1);
        for &l in lits {
            if l == self.tt {
                return;
            }
            if l != !self.tt {
                c.push(l);
            }
        }
        match self.active {
            Some(g) => {
                c.push(self.groups[g].selector.neg());
                if let Some(i) = self.cnf.add_clause(&c) {
                    self.groups[g].clauses.push(i);
                }
            }
            None => {
                if c.is_empty() {
                    c.push(!self.tt);
                }
                if let Some(i) = self.cnf.add_clause(&c) {
                    self.hard.push(i);
                }
            }
        }
    }

    pub fn assert_lit(&mut self, l: Lit) {
        self.clause(&[l]);
    }

    fn cached(&mut self, g: Gate, a: Lit, b: Lit, c: Lit) -> Result<Lit, Lit> {
        let key = (self.active, g, a, b, c);
        if let Some(&o) = self.cache.get(&key) {
            return Ok(o);
        }
        let o = self.fresh();
        self.cache.insert(key, o);
        Err(o)
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (t, f) = (self.tt, !self.tt);
        if a == f || b == f || a == !b {
            return f;
        }
        if a == t || a == b {
            return b;
        }
        if b == t {
            return a;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        match self.cached(Gate::And, a, b, t) {
            Ok(o) => o,
            Err(o) => {
                self.clause(&[!o, a]);
                self.clause(&[!o, b]);
                self.clause(&[o, !a, !b]);
                o
            }
        }
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let t = self.tt;
        if self.is_const(a) {
            return if a == t { !b } else { b };
        }
        if self.is_const(b) {
            return if b == t { !a } else { a };
        }
        if a == b {
            return !t;
        }
        if a == !b {
            return t;
        }
        // normalize polarity so that cache hits are more frequent
        let mut flip = false;
        let (mut a, mut b) = (a, b);
        if !a.is_positive() {
            a = !a;
            flip = !flip;
        }
        if !b.is_positive() {
            b = !b;
            flip = !flip;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let o = match self.cached(Gate::Xor, a, b, t) {
            Ok(o) => o,
            Err(o) => {
                self.clause(&[!o, a, b]);
                self.clause(&[!o, !a, !b]);
                self.clause(&[o, !a, b]);
                self.clause(&[o, a, !b]);
                o
            }
        };
        if flip {
            !o
        } else {
            o
        }
    }

    pub fn iff(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor(a, b)
    }

    pub fn ite(&mut self, c: Lit, a: Lit, b: Lit) -> Lit {
        let t = self.tt;
        if c == t {
            return a;
        }
        if c == !t {
            return b;
        }
        if a == b {
            return a;
        }
        if a == t && b == !t {
            return c;
        }
        if a == !t && b == t {
            return !c;
        }
        if a == t || a == c {
            return self.or(c, b);
        }
        if a == !t || a == !c {
            return self.and(!c, b);
        }
        if b == t || b == !c {
            return self.or(!c, a);
        }
        if b == !t || b == c {
            return self.and(c, a);
        }
        let (c, a, b) = if c.is_positive() { (c, a, b) } else { (!c, b, a) };
        match self.cached(Gate::Ite, c, a, b) {
            Ok(o) => o,
            Err(o) => {
                self.clause(&[!c, !a, o]);
                self.clause(&[!c, a, !o]);
                self.clause(&[c, !b, o]);
                self.clause(&[c, b, !o]);
                // redundant but helps propagation
                self.clause(&[!a, !b, o]);
                self.clause(&[a, b, !o]);
                o
            }
        }
    }

    pub fn and_all(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = self.tt;
        for &l in lits {
            acc = self.and(acc, l);
        }
        acc
    }

    pub fn or_all(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = !self.tt;
        for &l in lits {
            acc = self.or(acc, l);
        }
        acc
    }

    // ---- bit-vectors ----

    pub fn bv_const(&self, v: i64, width: u32) -> Bv {
        (0..width)
            .map(|i| if (v >> i) & 1 == 1 { self.tt } else { !self.tt })
            .collect()
    }

    /// Fresh bit-vector whose bits carry `name@version` metadata.
    pub fn bv_fresh(&mut self, name: &str, version: u32, width: u32) -> Bv {
        (0..width)
            .map(|bit| {
                self.fresh_meta(VarMeta::ProgramBit {
                    name: name.to_string(),
                    version,
                    bit,
                })
            })
            .collect()
    }

    pub fn bv_from_bool(&self, l: Lit, width: u32) -> Bv {
        let mut v = vec![!self.tt; width as usize];
        v[0] = l;
        v
    }

    pub fn bv_to_bool(&mut self, a: &[Lit]) -> Lit {
        self.or_all(a)
    }

    /// Constrain `a == b` bitwise in the active context.
    pub fn bv_assert_eq(&mut self, a: &[Lit], b: &[Lit]) {
        for (&x, &y) in a.iter().zip(b) {
            self.clause(&[!x, y]);
            self.clause(&[x, !y]);
        }
    }

    pub fn bv_eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let bits: Vec<Lit> = a.iter().zip(b).map(|(&x, &y)| self.iff(x, y)).collect();
        self.and_all(&bits)
    }

    pub fn bv_ite(&mut self, c: Lit, a: &[Lit], b: &[Lit]) -> Bv {
        a.iter().zip(b).map(|(&x, &y)| self.ite(c, x, y)).collect()
    }

    fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let ab = self.xor(a, b);
        let s = self.xor(ab, c);
        let g = self.and(a, b);
        let p = self.and(ab, c);
        (s, self.or(g, p))
    }

    pub fn bv_add_carry(&mut self, a: &[Lit], b: &[Lit], mut carry: Lit) -> Bv {
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (s, c) = self.full_add(x, y, carry);
            out.push(s);
            carry = c;
        }
        out
    }

    pub fn bv_add(&mut self, a: &[Lit], b: &[Lit]) -> Bv {
        let f = !self.tt;
        self.bv_add_carry(a, b, f)
    }

    pub fn bv_not(&self, a: &[Lit]) -> Bv {
        a.iter().map(|&l| !l).collect()
    }

    pub fn bv_sub(&mut self, a: &[Lit], b: &[Lit]) -> Bv {
        let nb = self.bv_not(b);
        let t = self.tt;
        self.bv_add_carry(a, &nb, t)
    }

    pub fn bv_neg(&mut self, a: &[Lit]) -> Bv {
        let z = self.bv_const(0, a.len() as u32);
        self.bv_sub(&z, a)
    }

    /// Shift-and-add product truncated to the operand width.
    pub fn bv_mul(&mut self, a: &[Lit], b: &[Lit]) -> Bv {
        let w = a.len();
        let mut acc = self.bv_const(0, w as u32);
        for (i, &bi) in b.iter().enumerate() {
            if bi == !self.tt {
                continue;
            }
            let mut partial = vec![!self.tt; w];
            for j in 0..w - i {
                partial[i + j] = self.and(a[j], bi);
            }
            acc = self.bv_add(&acc, &partial);
        }
        acc
    }

    /// Unsigned `a < b`.
    pub fn bv_ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut lt = !self.tt;
        for (&x, &y) in a.iter().zip(b) {
            let e = self.iff(x, y);
            let here = self.and(!x, y);
            lt = self.ite(e, lt, here);
        }
        lt
    }

    /// Signed `a < b`.
    pub fn bv_slt(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let w = a.len();
        let mut a2 = a.to_vec();
        let mut b2 = b.to_vec();
        a2[w - 1] = !a2[w - 1];
        b2[w - 1] = !b2[w - 1];
        self.bv_ult(&a2, &b2)
    }

    /// Unsigned quotient and remainder. Fresh `q`, `r` are tied to the
    /// operands by `n = q*d + r ∧ r < d` (computed without overflow) when
    /// `d ≠ 0`, and `q = ~0 ∧ r = n` otherwise.
    pub fn bv_udivrem(&mut self, n: &[Lit], d: &[Lit]) -> (Bv, Bv) {
        let w = n.len();
        let q: Bv = (0..w).map(|_| self.fresh()).collect();
        let r: Bv = (0..w).map(|_| self.fresh()).collect();
        let f = !self.tt;
        let ext = |v: &[Lit]| -> Bv {
            let mut e = v.to_vec();
            e.resize(2 * w, f);
            e
        };
        let prod = self.bv_mul(&ext(&q), &ext(d));
        let sum = self.bv_add(&prod, &ext(&r));
        let exact = self.bv_eq(&sum, &ext(n));
        let below = self.bv_ult(&r, d);
        let nz = self.bv_to_bool(d);
        let ok_nz = self.and(exact, below);
        let ones = self.bv_const(-1, w as u32);
        let q_ones = self.bv_eq(&q, &ones);
        let r_n = self.bv_eq(&r, n);
        let ok_z = self.and(q_ones, r_n);
        self.clause(&[!nz, ok_nz]);
        self.clause(&[nz, ok_z]);
        (q, r)
    }

    fn bv_abs(&mut self, a: &[Lit]) -> Bv {
        let s = a[a.len() - 1];
        let n = self.bv_neg(a);
        self.bv_ite(s, &n, a)
    }

    pub fn bv_sdiv(&mut self, a: &[Lit], b: &[Lit]) -> Bv {
        let w = a.len();
        let (ua, ub) = (self.bv_abs(a), self.bv_abs(b));
        let (q, _) = self.bv_udivrem(&ua, &ub);
        let flip = self.xor(a[w - 1], b[w - 1]);
        let nq = self.bv_neg(&q);
        self.bv_ite(flip, &nq, &q)
    }

    pub fn bv_srem(&mut self, a: &[Lit], b: &[Lit]) -> Bv {
        let w = a.len();
        let (ua, ub) = (self.bv_abs(a), self.bv_abs(b));
        let (_, r) = self.bv_udivrem(&ua, &ub);
        let nr = self.bv_neg(&r);
        self.bv_ite(a[w - 1], &nr, &r)
    }

    pub fn bv_unop(&mut self, op: UnOp, a: &[Lit]) -> Bv {
        let w = a.len() as u32;
        match op {
            UnOp::Neg => self.bv_neg(a),
            UnOp::Not => {
                let t = self.bv_to_bool(a);
                self.bv_from_bool(!t, w)
            }
        }
    }

    pub fn bv_binop(&mut self, op: BinOp, a: &[Lit], b: &[Lit]) -> Bv {
        let w = a.len() as u32;
        let boolean = |c: &mut Self, l: Lit| c.bv_from_bool(l, w);
        match op {
            BinOp::Add => self.bv_add(a, b),
            BinOp::Sub => self.bv_sub(a, b),
            BinOp::Mul => self.bv_mul(a, b),
            BinOp::Div => self.bv_sdiv(a, b),
            BinOp::Rem => self.bv_srem(a, b),
            BinOp::Lt => {
                let l = self.bv_slt(a, b);
                boolean(self, l)
            }
            BinOp::Gt => {
                let l = self.bv_slt(b, a);
                boolean(self, l)
            }
            BinOp::Le => {
                let l = self.bv_slt(b, a);
                boolean(self, !l)
            }
            BinOp::Ge => {
                let l = self.bv_slt(a, b);
                boolean(self, !l)
            }
            BinOp::Eq => {
                let l = self.bv_eq(a, b);
                boolean(self, l)
            }
            BinOp::Ne => {
                let l = self.bv_eq(a, b);
                boolean(self, !l)
            }
            BinOp::And => {
                let (x, y) = (self.bv_to_bool(a), self.bv_to_bool(b));
                let l = self.and(x, y);
                boolean(self, l)
            }
            BinOp::Or => {
                let (x, y) = (self.bv_to_bool(a), self.bv_to_bool(b));
                let l = self.or(x, y);
                boolean(self, l)
            }
        }
    }
}

/// Read a bit-vector's value (sign-extended) from a model.
pub fn bv_value(bits: &[Lit], model: &[bool]) -> i64 {
    let mut v: u64 = 0;
    for (i, l) in bits.iter().enumerate() {
        if l.eval(model) {
            v |= 1 << i;
        }
    }
    crate::bv::from_bits(v, bits.len() as u32)
}
