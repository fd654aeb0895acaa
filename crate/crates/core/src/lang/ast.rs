//! Surface syntax tree for MiniC.

use serde::Serialize;

/// Byte range plus 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

/// Source statement id, assigned in textual order by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StmtId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ast {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Const(ConstDecl),
    Function(Function),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub returns_value: bool,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub is_array: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl {
        name: String,
        input: bool,
        len: Option<Expr>,
        init: Option<Rhs>,
    },
    Assign {
        target: LValue,
        value: Rhs,
    },
    Call(Call),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Assert(Expr),
    Assume(Expr),
    Return(Option<Expr>),
    Block(Vec<Stmt>),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub callee: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Var(String, Span),
    Index(String, Box<Expr>, Span),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n, _) | LValue::Index(n, _, _) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Name(String),
    Index(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    /// Binary operation; the extra span covers the operator token.
    Binary(BinOp, Box<Expr>, Box<Expr>, Span),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Ast {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Ast {
        let mut a = self.clone();
        for item in &mut a.items {
            match item {
                Item::Const(c) => {
                    c.span = Span::default();
                    strip_expr(&mut c.value);
                }
                Item::Function(f) => {
                    f.span = Span::default();
                    f.body.iter_mut().for_each(strip_stmt);
                }
                Item::Stmt(s) => strip_stmt(s),
            }
        }
        a
    }
}

fn strip_stmt(s: &mut Stmt) {
    s.span = Span::default();
    match &mut s.kind {
        StmtKind::Decl { len, init, .. } => {
            if let Some(l) = len {
                strip_expr(l);
            }
            if let Some(r) = init {
                strip_rhs(r);
            }
        }
        StmtKind::Assign { target, value } => {
            strip_lvalue(target);
            strip_rhs(value);
        }
        StmtKind::Call(c) => strip_call(c),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            strip_expr(cond);
            strip_stmt(then_branch);
            if let Some(e) = else_branch {
                strip_stmt(e);
            }
        }
        StmtKind::While { cond, body } => {
            strip_expr(cond);
            strip_stmt(body);
        }
        StmtKind::Assert(e) | StmtKind::Assume(e) => strip_expr(e),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                strip_expr(e);
            }
        }
        StmtKind::Block(b) => b.iter_mut().for_each(strip_stmt),
        StmtKind::Empty => {}
    }
}

fn strip_lvalue(l: &mut LValue) {
    match l {
        LValue::Var(_, s) => *s = Span::default(),
        LValue::Index(_, e, s) => {
            *s = Span::default();
            strip_expr(e);
        }
    }
}

fn strip_rhs(r: &mut Rhs) {
    match r {
        Rhs::Expr(e) => strip_expr(e),
        Rhs::Call(c) => strip_call(c),
    }
}

fn strip_call(c: &mut Call) {
    c.span = Span::default();
    c.args.iter_mut().for_each(strip_expr);
}

fn strip_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Name(_) => {}
        ExprKind::Index(_, i) => strip_expr(i),
        ExprKind::Unary(_, a) => strip_expr(a),
        ExprKind::Binary(_, a, b, s) => {
            *s = Span::default();
            strip_expr(a);
            strip_expr(b);
        }
        ExprKind::Cond(c, a, b) => {
            strip_expr(c);
            strip_expr(a);
            strip_expr(b);
        }
    }
}
