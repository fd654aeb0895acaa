//! Lowering from the surface AST to a loop-free transition system.
//!
//! Functions are inlined with per-call renaming (`f#k.x`). Each `while` is
//! unrolled into `bound` guarded copies followed by an unwinding assumption.
//! Array accesses and divisions get implicit assertions placed at the
//! location where the expression is evaluated, guarded by the short-circuit
//! context of the subexpression.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::ast::{self, BinOp, ExprKind, Item, LValue, Rhs, Span, StmtId, StmtKind};
use super::pretty::expr_to_string;
use super::program::*;
use super::{FrontendError, WIDTHS};
use crate::bv;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerOptions {
    /// Loop unrolling bound η.
    pub bound: u32,
    pub width: u32,
    /// Functions whose bodies are trusted (their transitions get no selector).
    pub trusted: Vec<String>,
    pub file: String,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions {
            bound: 1,
            width: 8,
            trusted: Vec::new(),
            file: "input.mc".into(),
        }
    }
}

type LResult<T> = Result<T, FrontendError>;

#[derive(Debug, Clone, Copy)]
enum Binding {
    Var(VarId),
    Array(ArrayId),
}

struct Frame {
    /// Item index of the function, `None` at top level.
    item: Option<usize>,
    prefix: String,
    scopes: Vec<HashMap<String, Binding>>,
    decls: HashMap<StmtId, Binding>,
    trusted: bool,
}

enum Target<'b> {
    Var(VarId),
    LValue(&'b LValue),
}

struct Lowerer<'a> {
    opts: &'a LowerOptions,
    width: u32,
    consts: HashMap<String, i64>,
    functions: HashMap<&'a str, (&'a ast::Function, usize)>,
    globals: HashMap<String, (Binding, usize)>,
    item: usize,
    vars: Vec<VarDecl>,
    arrays: Vec<ArrayDecl>,
    used_names: HashSet<String>,
    transitions: Vec<Transition>,
    specs: Vec<AssertionSpec>,
    spec_index: HashMap<(usize, u8), AssertId>,
    sites: Vec<AssertionSite>,
    num_locs: u32,
    cur: Loc,
    frames: Vec<Frame>,
    loops: Vec<LoopContext>,
    instances: HashMap<String, u32>,
}

pub fn lower_to_cfg(ast: &ast::Ast, opts: &LowerOptions) -> Result<Program, FrontendError> {
    if opts.bound < 1 {
        return Err(FrontendError::UnrollBound);
    }
    if !WIDTHS.contains(&opts.width) {
        return Err(FrontendError::Semantic {
            line: 0,
            column: 0,
            msg: format!("unsupported bit width {}", opts.width),
        });
    }
    let mut l = Lowerer {
        opts,
        width: opts.width,
        consts: HashMap::new(),
        functions: HashMap::new(),
        globals: HashMap::new(),
        item: 0,
        vars: Vec::new(),
        arrays: Vec::new(),
        used_names: HashSet::new(),
        transitions: Vec::new(),
        specs: Vec::new(),
        spec_index: HashMap::new(),
        sites: Vec::new(),
        num_locs: 1,
        cur: Loc(0),
        frames: vec![Frame {
            item: None,
            prefix: String::new(),
            scopes: Vec::new(),
            decls: HashMap::new(),
            trusted: false,
        }],
        loops: Vec::new(),
        instances: HashMap::new(),
    };
    for (i, item) in ast.items.iter().enumerate() {
        if let Item::Function(f) = item {
            if l.functions.insert(f.name.as_str(), (f, i)).is_some() {
                return Err(FrontendError::semantic(
                    f.span,
                    format!("function `{}` defined twice", f.name),
                ));
            }
        }
    }
    for (i, item) in ast.items.iter().enumerate() {
        l.item = i;
        match item {
            Item::Const(c) => {
                if l.consts.contains_key(&c.name) || l.globals.contains_key(&c.name) {
                    return Err(FrontendError::semantic(
                        c.span,
                        format!("`{}` declared twice", c.name),
                    ));
                }
                let v = l.const_eval(&c.value)?;
                l.consts.insert(c.name.clone(), v);
            }
            Item::Function(_) => {}
            Item::Stmt(s) => l.stmt(s)?,
        }
    }
    let statements = l.statement_infos(ast);
    let mut p = Program {
        file: opts.file.clone(),
        width: opts.width,
        bound: opts.bound,
        vars: l.vars,
        arrays: l.arrays,
        num_locations: l.num_locs,
        initial: Loc(0),
        exit: l.cur,
        transitions: l.transitions,
        assertions: l.specs,
        sites: l.sites,
        statements,
        outgoing: Vec::new(),
        incoming: Vec::new(),
        sites_at: Vec::new(),
    };
    p.index();
    Ok(p)
}

fn conj(ctx: &[Expr]) -> Option<Expr> {
    ctx.iter()
        .cloned()
        .reduce(|a, b| Expr::bin(BinOp::And, a, b))
}

fn with(ctx: &[Expr], e: Expr) -> Vec<Expr> {
    let mut v = ctx.to_vec();
    v.push(e);
    v
}

impl<'a> Lowerer<'a> {
    fn frame(&self) -> &Frame {
        self.frames.last().expect("frame")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("frame")
    }

    fn new_loc(&mut self) -> Loc {
        let l = Loc(self.num_locs);
        self.num_locs += 1;
        l
    }

    fn fresh_name(&mut self, base: String) -> String {
        let mut name = base.clone();
        let mut k = 2;
        while self.used_names.contains(&name) {
            name = format!("{base}#{k}");
            k += 1;
        }
        self.used_names.insert(name.clone());
        name
    }

    fn new_var(&mut self, name: &str, role: Role) -> VarId {
        let full = format!("{}{}", self.frame().prefix, name);
        let name = self.fresh_name(full);
        self.vars.push(VarDecl {
            name,
            width: self.width,
            role,
        });
        VarId(self.vars.len() as u32 - 1)
    }

    fn new_array(&mut self, name: &str, len: u32, role: Role) -> ArrayId {
        let full = format!("{}{}", self.frame().prefix, name);
        let name = self.fresh_name(full);
        self.arrays.push(ArrayDecl {
            name,
            width: self.width,
            len,
            role,
        });
        ArrayId(self.arrays.len() as u32 - 1)
    }

    fn lookup(&self, name: &str) -> Option<Binding> {
        let f = self.frame();
        for scope in f.scopes.iter().rev() {
            if let Some(b) = scope.get(name) {
                return Some(*b);
            }
        }
        match self.globals.get(name) {
            Some((b, idx)) if f.item.map_or(true, |fi| *idx < fi) => Some(*b),
            _ => None,
        }
    }

    fn undeclared(name: &str, span: Span) -> FrontendError {
        FrontendError::UndeclaredVariable {
            name: name.to_string(),
            line: span.line,
            column: span.column,
        }
    }

    fn edge(&mut self, source: Loc, target: Loc, action: Action, stmt: Option<&ast::Stmt>, trusted: bool) {
        let (line, column) = stmt.map_or((0, 0), |s| (s.span.line, s.span.column));
        let loop_context = stmt.and(self.loops.last().copied());
        self.transitions.push(Transition {
            id: TransId(self.transitions.len() as u32),
            source,
            target,
            action,
            stmt: stmt.map(|s| s.id),
            line,
            column,
            loop_context,
            trusted,
        });
    }

    /// Append a transition from the current location to a fresh one.
    fn emit(&mut self, action: Action, stmt: &ast::Stmt, trusted: bool) {
        let src = self.cur;
        let tgt = self.new_loc();
        self.edge(src, tgt, action, Some(stmt), trusted);
        self.cur = tgt;
    }

    fn structural(&mut self, source: Loc, target: Loc, line: u32, column: u32, action: Action) {
        self.transitions.push(Transition {
            id: TransId(self.transitions.len() as u32),
            source,
            target,
            action,
            stmt: None,
            line,
            column,
            loop_context: None,
            trusted: true,
        });
    }

    fn site(&mut self, key: (usize, u8), span: Span, kind: AssertKind, text: String, predicate: Expr) {
        let next = AssertId(self.specs.len() as u32);
        let id = *self.spec_index.entry(key).or_insert(next);
        if id == next {
            self.specs.push(AssertionSpec {
                id,
                line: span.line,
                column: span.column,
                kind,
                text,
            });
        }
        self.sites.push(AssertionSite {
            assertion: id,
            location: self.cur,
            predicate,
        });
    }

    fn check_literal(&self, v: i64, span: Span) -> LResult<i64> {
        if bv::fits(v, self.width) {
            Ok(v)
        } else {
            Err(FrontendError::semantic(
                span,
                format!("integer literal {v} does not fit in {} bits", self.width),
            ))
        }
    }

    fn const_eval(&self, e: &ast::Expr) -> LResult<i64> {
        let w = self.width;
        Ok(match &e.kind {
            ExprKind::Int(v) => self.check_literal(*v, e.span)?,
            ExprKind::Bool(b) => *b as i64,
            ExprKind::Name(n) => match self.consts.get(n) {
                Some(v) => *v,
                None => {
                    return Err(FrontendError::semantic(
                        e.span,
                        format!("`{n}` is not a constant"),
                    ))
                }
            },
            ExprKind::Index(..) => {
                return Err(FrontendError::semantic(e.span, "array access in constant expression"))
            }
            ExprKind::Unary(op, a) => bv::eval_unop(*op, self.const_eval(a)?, w),
            ExprKind::Binary(op, a, b, _) => {
                bv::eval_binop(*op, self.const_eval(a)?, self.const_eval(b)?, w)
            }
            ExprKind::Cond(c, a, b) => {
                if self.const_eval(c)? != 0 {
                    self.const_eval(a)?
                } else {
                    self.const_eval(b)?
                }
            }
        })
    }

    fn array_of(&self, name: &str, span: Span) -> LResult<ArrayId> {
        match self.lookup(name) {
            Some(Binding::Array(a)) => Ok(a),
            Some(Binding::Var(_)) => Err(FrontendError::semantic(
                span,
                format!("`{name}` is not an array"),
            )),
            None => Err(Self::undeclared(name, span)),
        }
    }

    fn bounds_sites(&mut self, key: usize, span: Span, a: ArrayId, idx_ast: &ast::Expr, idx: &Expr, ctx: &[Expr]) {
        let len = self.arrays[a.0 as usize].len as i64;
        let text = expr_to_string(idx_ast);
        let lower = Expr::implies(conj(ctx), Expr::bin(BinOp::Ge, idx.clone(), Expr::Const(0)));
        self.site((key, 0), span, AssertKind::ArrayBounds, format!("{text} >= 0"), lower);
        let upper = Expr::implies(conj(ctx), Expr::bin(BinOp::Lt, idx.clone(), Expr::Const(len)));
        self.site((key, 1), span, AssertKind::ArrayBounds, format!("{text} < {len}"), upper);
    }

    /// Resolve an expression and place its implicit assertions at the
    /// current location. `ctx` holds the conditions under which it is evaluated.
    fn expr(&mut self, e: &ast::Expr, ctx: &[Expr]) -> LResult<Expr> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Expr::Const(self.check_literal(*v, e.span)?),
            ExprKind::Bool(b) => Expr::Const(*b as i64),
            ExprKind::Name(n) => {
                if let Some(v) = self.consts.get(n) {
                    Expr::Const(*v)
                } else {
                    match self.lookup(n) {
                        Some(Binding::Var(v)) => Expr::Var(v),
                        Some(Binding::Array(_)) => {
                            return Err(FrontendError::semantic(
                                e.span,
                                format!("array `{n}` used as a scalar"),
                            ))
                        }
                        None => return Err(Self::undeclared(n, e.span)),
                    }
                }
            }
            ExprKind::Index(n, i) => {
                let a = self.array_of(n, e.span)?;
                let idx = self.expr(i, ctx)?;
                self.bounds_sites(e.span.start, e.span, a, i, &idx, ctx);
                Expr::Load(a, Box::new(idx))
            }
            ExprKind::Unary(op, a) => Expr::Unary(*op, Box::new(self.expr(a, ctx)?)),
            ExprKind::Binary(op, a, b, op_span) => {
                let la = self.expr(a, ctx)?;
                let lb = match op {
                    BinOp::And => self.expr(b, &with(ctx, la.clone()))?,
                    BinOp::Or => self.expr(b, &with(ctx, Expr::not(la.clone())))?,
                    _ => self.expr(b, ctx)?,
                };
                if matches!(op, BinOp::Div | BinOp::Rem) {
                    let pred = Expr::implies(conj(ctx), Expr::bin(BinOp::Ne, lb.clone(), Expr::Const(0)));
                    let text = format!("{} != 0", expr_to_string(b));
                    self.site((op_span.start, 2), *op_span, AssertKind::DivisionGuard, text, pred);
                }
                Expr::bin(*op, la, lb)
            }
            ExprKind::Cond(c, a, b) => {
                let lc = self.expr(c, ctx)?;
                let la = self.expr(a, &with(ctx, lc.clone()))?;
                let lb = self.expr(b, &with(ctx, Expr::not(lc.clone())))?;
                Expr::Ite(Box::new(lc), Box::new(la), Box::new(lb))
            }
        })
    }

    /// Emit the write of `value` into `target` as a transition of `stmt`.
    fn assign(&mut self, target: Target, value: Expr, stmt: &ast::Stmt, trusted: bool) -> LResult<()> {
        let action = match target {
            Target::Var(v) => Action::Assign { var: v, value },
            Target::LValue(LValue::Var(n, span)) => match self.lookup(n) {
                Some(Binding::Var(v)) => Action::Assign { var: v, value },
                Some(Binding::Array(_)) => {
                    return Err(FrontendError::semantic(
                        *span,
                        format!("cannot assign to array `{n}`"),
                    ))
                }
                None => return Err(Self::undeclared(n, *span)),
            },
            Target::LValue(LValue::Index(n, i, span)) => {
                let a = self.array_of(n, *span)?;
                let index = self.expr(i, &[])?;
                self.bounds_sites(span.start, *span, a, i, &index, &[]);
                Action::Store {
                    array: a,
                    index,
                    value,
                }
            }
        };
        self.emit(action, stmt, trusted);
        Ok(())
    }

    fn in_scope(&mut self, s: &ast::Stmt) -> LResult<()> {
        self.frame_mut().scopes.push(HashMap::new());
        let r = self.stmt(s);
        self.frame_mut().scopes.pop();
        r
    }

    fn declare(&mut self, s: &ast::Stmt, name: &str, input: bool, len: Option<&ast::Expr>) -> LResult<Binding> {
        if let Some(b) = self.frame().decls.get(&s.id).copied() {
            // re-lowering the same declaration in a later loop copy
            self.bind(name, b);
            return Ok(b);
        }
        if self.consts.contains_key(name) {
            return Err(FrontendError::semantic(
                s.span,
                format!("`{name}` shadows a constant"),
            ));
        }
        let top = self.frames.len() == 1 && self.frame().scopes.is_empty();
        let clash = if top {
            self.globals.contains_key(name)
        } else {
            self.frame().scopes.last().is_some_and(|sc| sc.contains_key(name))
        };
        if clash {
            return Err(FrontendError::semantic(
                s.span,
                format!("`{name}` declared twice in the same scope"),
            ));
        }
        if input && self.frames.len() > 1 {
            return Err(FrontendError::semantic(
                s.span,
                "input declarations are only allowed outside functions",
            ));
        }
        let role = if input { Role::Input } else { Role::Local };
        let b = match len {
            Some(len_expr) => {
                let n = self.const_eval(len_expr)?;
                if n < 1 || n > bv::max_value(self.width) {
                    return Err(FrontendError::semantic(
                        len_expr.span,
                        format!("array length {n} out of range"),
                    ));
                }
                Binding::Array(self.new_array(name, n as u32, role))
            }
            None => Binding::Var(self.new_var(name, role)),
        };
        self.frame_mut().decls.insert(s.id, b);
        self.bind(name, b);
        Ok(b)
    }

    fn bind(&mut self, name: &str, b: Binding) {
        let item = self.item;
        let top = self.frames.len() == 1;
        let f = self.frames.last_mut().expect("frame");
        if top && f.scopes.is_empty() {
            self.globals.insert(name.to_string(), (b, item));
        } else {
            f.scopes
                .last_mut()
                .expect("scope")
                .insert(name.to_string(), b);
        }
    }

    fn stmt(&mut self, s: &ast::Stmt) -> LResult<()> {
        let trusted = self.frame().trusted;
        match &s.kind {
            StmtKind::Decl {
                name,
                input,
                len,
                init,
            } => {
                if len.is_some() && init.is_some() {
                    return Err(FrontendError::semantic(s.span, "array initializers are not supported"));
                }
                if *input && init.is_some() {
                    return Err(FrontendError::semantic(s.span, "input variables cannot be initialized"));
                }
                // the initializer is evaluated before the new name is in scope
                match init {
                    Some(Rhs::Expr(e)) => {
                        let v = self.expr(e, &[])?;
                        let Binding::Var(id) = self.declare(s, name, *input, None)? else {
                            unreachable!()
                        };
                        self.assign(Target::Var(id), v, s, trusted)?;
                    }
                    Some(Rhs::Call(c)) => {
                        let Binding::Var(id) = self.declare(s, name, *input, None)? else {
                            unreachable!()
                        };
                        self.call(s, c, Some(Target::Var(id)))?;
                    }
                    None => {
                        self.declare(s, name, *input, len.as_ref())?;
                    }
                }
            }
            StmtKind::Assign { target, value } => match value {
                Rhs::Expr(e) => {
                    let v = self.expr(e, &[])?;
                    self.assign(Target::LValue(target), v, s, trusted)?;
                }
                Rhs::Call(c) => self.call(s, c, Some(Target::LValue(target)))?,
            },
            StmtKind::Call(c) => self.call(s, c, None)?,
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.expr(cond, &[])?;
                let src = self.cur;
                let t = self.new_loc();
                self.edge(src, t, Action::Branch { cond: c.clone(), taken: true }, Some(s), trusted);
                let e = self.new_loc();
                self.edge(src, e, Action::Branch { cond: c, taken: false }, Some(s), trusted);
                self.cur = t;
                self.in_scope(then_branch)?;
                let t_end = self.cur;
                self.cur = e;
                if let Some(eb) = else_branch {
                    self.in_scope(eb)?;
                }
                let e_end = self.cur;
                let join = self.new_loc();
                let (line, col) = (s.span.line, s.span.column);
                self.structural(t_end, join, line, col, Action::Skip);
                self.structural(e_end, join, line, col, Action::Skip);
                self.cur = join;
            }
            StmtKind::While { cond, body } => {
                let mut exits = Vec::new();
                for k in 1..=self.opts.bound {
                    let c = self.expr(cond, &[])?;
                    let src = self.cur;
                    let t = self.new_loc();
                    let e = self.new_loc();
                    self.loops.push(LoopContext {
                        loop_id: s.id,
                        iteration: k,
                    });
                    self.edge(src, t, Action::Branch { cond: c.clone(), taken: true }, Some(s), trusted);
                    self.edge(src, e, Action::Branch { cond: c, taken: false }, Some(s), trusted);
                    exits.push(e);
                    self.cur = t;
                    let r = self.in_scope(body);
                    self.loops.pop();
                    r?;
                }
                let c = self.expr(cond, &[])?;
                let src = self.cur;
                let u = self.new_loc();
                let (line, col) = (s.span.line, s.span.column);
                self.structural(src, u, line, col, Action::Unwind { guard: c });
                exits.push(u);
                let join = self.new_loc();
                for x in exits {
                    self.structural(x, join, line, col, Action::Skip);
                }
                self.cur = join;
            }
            StmtKind::Assert(e) => {
                let v = self.expr(e, &[])?;
                self.site((s.span.start, 3), s.span, AssertKind::Explicit, expr_to_string(e), v);
            }
            StmtKind::Assume(e) => {
                let v = self.expr(e, &[])?;
                self.emit(Action::Assume { cond: v }, s, trusted);
            }
            StmtKind::Return(_) => {
                return Err(FrontendError::semantic(
                    s.span,
                    "`return` is only allowed as the last statement of a function body",
                ))
            }
            StmtKind::Block(b) => {
                self.frame_mut().scopes.push(HashMap::new());
                let r = b.iter().try_for_each(|x| self.stmt(x));
                self.frame_mut().scopes.pop();
                r?;
            }
            StmtKind::Empty => {}
        }
        Ok(())
    }

    fn call(&mut self, s: &ast::Stmt, c: &ast::Call, target: Option<Target>) -> LResult<()> {
        let Some(&(f, fidx)) = self.functions.get(c.callee.as_str()) else {
            return Err(FrontendError::semantic(
                c.span,
                format!("undeclared function `{}`", c.callee),
            ));
        };
        if c.args.len() != f.params.len() {
            return Err(FrontendError::semantic(
                c.span,
                format!(
                    "`{}` expects {} argument(s), got {}",
                    f.name,
                    f.params.len(),
                    c.args.len()
                ),
            ));
        }
        if target.is_some() && !f.returns_value {
            return Err(FrontendError::semantic(
                c.span,
                format!("`{}` does not return a value", f.name),
            ));
        }
        let caller_trusted = self.frame().trusted;
        let mut scalars = Vec::new();
        let mut arrays = Vec::new();
        for (p, a) in f.params.iter().zip(&c.args) {
            if p.is_array {
                match &a.kind {
                    ExprKind::Name(n) => arrays.push((p.name.as_str(), self.array_of(n, a.span)?)),
                    _ => {
                        return Err(FrontendError::semantic(
                            a.span,
                            format!("parameter `{}` expects an array name", p.name),
                        ))
                    }
                }
            } else {
                scalars.push((p.name.as_str(), self.expr(a, &[])?));
            }
        }
        let k = {
            let n = self.instances.entry(f.name.clone()).or_insert(0);
            *n += 1;
            *n
        };
        let trusted = caller_trusted || self.opts.trusted.iter().any(|t| t == &f.name);
        self.frames.push(Frame {
            item: Some(fidx),
            prefix: format!("{}#{}.", f.name, k),
            scopes: vec![HashMap::new()],
            decls: HashMap::new(),
            trusted,
        });
        let mut seen = HashSet::new();
        let mut bindings = Vec::new();
        for p in &f.params {
            if !seen.insert(p.name.as_str()) || self.consts.contains_key(&p.name) {
                return Err(FrontendError::semantic(
                    f.span,
                    format!("invalid parameter name `{}`", p.name),
                ));
            }
        }
        for (name, value) in scalars {
            let v = self.new_var(name, Role::Local);
            self.bind(name, Binding::Var(v));
            bindings.push((v, value));
        }
        for (name, a) in arrays {
            self.bind(name, Binding::Array(a));
        }
        if bindings.is_empty() {
            self.emit(Action::Skip, s, caller_trusted);
        }
        for (var, value) in bindings {
            self.emit(Action::Assign { var, value }, s, caller_trusted);
        }
        let last = f.body.len().checked_sub(1);
        let mut ret: Option<(&ast::Stmt, Option<Expr>)> = None;
        for (i, st) in f.body.iter().enumerate() {
            match &st.kind {
                StmtKind::Return(e) if Some(i) == last => {
                    let v = match e {
                        Some(e) if f.returns_value => Some(self.expr(e, &[])?),
                        None if !f.returns_value => None,
                        _ => {
                            return Err(FrontendError::semantic(
                                st.span,
                                "return value does not match the function's declared type",
                            ))
                        }
                    };
                    ret = Some((st, v));
                }
                _ => self.stmt(st)?,
            }
        }
        self.frames.pop();
        match ret {
            Some((st, Some(v))) => match target {
                Some(t) => self.assign(t, v, st, trusted)?,
                None => self.emit(Action::Skip, st, trusted),
            },
            Some((st, None)) => self.emit(Action::Skip, st, trusted),
            None if f.returns_value => {
                return Err(FrontendError::semantic(
                    f.span,
                    format!("`{}` must end with a return statement", f.name),
                ))
            }
            None => {}
        }
        Ok(())
    }

    fn statement_infos(&self, ast: &ast::Ast) -> BTreeMap<StmtId, StatementInfo> {
        let mut untrusted: HashSet<StmtId> = HashSet::new();
        for t in &self.transitions {
            if let (Some(id), false) = (t.stmt, t.trusted) {
                untrusted.insert(id);
            }
        }
        let mut out = BTreeMap::new();
        let mut visit = |s: &ast::Stmt| {
            let mut info = StatementInfo {
                id: s.id,
                line: s.span.line,
                column: s.span.column,
                trusted: !untrusted.contains(&s.id),
                constants: Vec::new(),
                operators: Vec::new(),
            };
            for e in own_exprs(s) {
                self.tokens(e, &mut info);
            }
            out.insert(s.id, info);
        };
        fn walk(s: &ast::Stmt, f: &mut dyn FnMut(&ast::Stmt)) {
            match &s.kind {
                StmtKind::Block(b) => b.iter().for_each(|x| walk(x, f)),
                StmtKind::Empty => {}
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    f(s);
                    walk(then_branch, f);
                    if let Some(e) = else_branch {
                        walk(e, f);
                    }
                }
                StmtKind::While { body, .. } => {
                    f(s);
                    walk(body, f);
                }
                _ => f(s),
            }
        }
        for item in &ast.items {
            match item {
                Item::Function(func) => func.body.iter().for_each(|s| walk(s, &mut visit)),
                Item::Stmt(s) => walk(s, &mut visit),
                Item::Const(_) => {}
            }
        }
        out
    }

    fn tokens(&self, e: &ast::Expr, info: &mut StatementInfo) {
        match &e.kind {
            ExprKind::Int(v) => info.constants.push(ConstToken {
                span: e.span,
                value: *v,
                name: None,
            }),
            ExprKind::Bool(_) => {}
            ExprKind::Name(n) => {
                if let Some(v) = self.consts.get(n) {
                    info.constants.push(ConstToken {
                        span: e.span,
                        value: *v,
                        name: Some(n.clone()),
                    });
                }
            }
            ExprKind::Index(_, i) | ExprKind::Unary(_, i) => self.tokens(i, info),
            ExprKind::Binary(op, a, b, op_span) => {
                self.tokens(a, info);
                info.operators.push(OpToken {
                    span: *op_span,
                    op: *op,
                });
                self.tokens(b, info);
            }
            ExprKind::Cond(c, a, b) => {
                self.tokens(c, info);
                self.tokens(a, info);
                self.tokens(b, info);
            }
        }
    }
}

/// Expressions belonging to the statement itself, excluding nested statements.
fn own_exprs(s: &ast::Stmt) -> Vec<&ast::Expr> {
    fn rhs(r: &Rhs) -> Vec<&ast::Expr> {
        match r {
            Rhs::Expr(e) => vec![e],
            Rhs::Call(c) => c.args.iter().collect(),
        }
    }
    let mut v: Vec<&ast::Expr> = Vec::new();
    match &s.kind {
        StmtKind::Decl { init: Some(r), .. } => v.extend(rhs(r)),
        StmtKind::Assign { target, value } => {
            if let LValue::Index(_, i, _) = target {
                v.push(i);
            }
            v.extend(rhs(value));
        }
        StmtKind::Call(c) => v.extend(c.args.iter()),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => v.push(cond),
        StmtKind::Assert(e) | StmtKind::Assume(e) | StmtKind::Return(Some(e)) => v.push(e),
        _ => {}
    }
    v
}
