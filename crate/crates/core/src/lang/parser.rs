//! Recursive-descent parser for MiniC.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

pub fn parse(source: &str) -> Result<Ast, FrontendError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        next_id: 0,
    };
    let mut items = Vec::new();
    while !p.at(&Tok::Eof) {
        items.push(p.item()?);
    }
    let ast = Ast { items };
    super::check_program(&ast)?;
    Ok(ast)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_id: u32,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = self.peek().span;
        Err(FrontendError::Syntax {
            line: s.line,
            column: s.column,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<Token> {
        if self.at(t) {
            Ok(self.bump())
        } else {
            self.error(format!("expected {what}, found {}", describe(&self.peek().tok)))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Ident(n) => {
                let n = n.clone();
                let s = self.bump().span;
                Ok((n, s))
            }
            other => self.error(format!("expected identifier, found {}", describe(other))),
        }
    }

    fn fresh_id(&mut self) -> StmtId {
        let id = StmtId(self.next_id);
        self.next_id += 1;
        id
    }

    fn join(a: Span, b: Span) -> Span {
        Span {
            start: a.start,
            end: b.end,
            line: a.line,
            column: a.column,
        }
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn item(&mut self) -> PResult<Item> {
        match self.peek().tok {
            Tok::KwConst => {
                let start = self.bump().span;
                self.expect(&Tok::KwInt, "`int`")?;
                let (name, _) = self.ident()?;
                self.expect(&Tok::Assign, "`=`")?;
                let value = self.expr()?;
                let end = self.expect(&Tok::Semi, "`;`")?.span;
                Ok(Item::Const(ConstDecl {
                    name,
                    value,
                    span: Self::join(start, end),
                }))
            }
            Tok::KwVoid => self.function(),
            Tok::KwInt if matches!(self.peek_at(1), Tok::Ident(_)) && self.peek_at(2) == &Tok::LParen => {
                self.function()
            }
            _ => Ok(Item::Stmt(self.stmt()?)),
        }
    }

    fn function(&mut self) -> PResult<Item> {
        let start = self.bump();
        let returns_value = start.tok == Tok::KwInt;
        let (name, _) = self.ident()?;
        self.expect(&Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                self.expect(&Tok::KwInt, "`int`")?;
                let (pname, _) = self.ident()?;
                let is_array = if self.eat(&Tok::LBracket) {
                    self.expect(&Tok::RBracket, "`]`")?;
                    true
                } else {
                    false
                };
                params.push(Param {
                    name: pname,
                    is_array,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen, "`)`")?;
        if !self.at(&Tok::LBrace) {
            return self.error("expected function body");
        }
        let body_stmt = self.stmt()?;
        let body = match body_stmt.kind {
            StmtKind::Block(b) => b,
            _ => unreachable!(),
        };
        Ok(Item::Function(Function {
            name,
            returns_value,
            params,
            body,
            span: Self::join(start.span, self.prev_span()),
        }))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let id = self.fresh_id();
        let start = self.peek().span;
        let kind = match self.peek().tok.clone() {
            Tok::LBrace => {
                self.bump();
                let mut body = Vec::new();
                while !self.at(&Tok::RBrace) {
                    if self.at(&Tok::Eof) {
                        return self.error("unterminated block");
                    }
                    body.push(self.stmt()?);
                }
                self.bump();
                StmtKind::Block(body)
            }
            Tok::Semi => {
                self.bump();
                StmtKind::Empty
            }
            Tok::KwInput => {
                self.bump();
                self.eat(&Tok::KwInt);
                self.decl_rest(true)?
            }
            Tok::KwInt => {
                self.bump();
                self.decl_rest(false)?
            }
            Tok::KwIf => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let then_branch = Box::new(self.stmt()?);
                let else_branch = if self.eat(&Tok::KwElse) {
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::KwWhile => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let body = Box::new(self.stmt()?);
                StmtKind::While { cond, body }
            }
            Tok::KwAssert | Tok::KwAssume => {
                let is_assert = self.bump().tok == Tok::KwAssert;
                self.expect(&Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                if is_assert {
                    StmtKind::Assert(e)
                } else {
                    StmtKind::Assume(e)
                }
            }
            Tok::KwReturn => {
                self.bump();
                let e = if self.at(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Return(e)
            }
            Tok::Ident(_) => {
                if self.peek_at(1) == &Tok::LParen {
                    let call = self.call()?;
                    self.expect(&Tok::Semi, "`;`")?;
                    StmtKind::Call(call)
                } else {
                    let target = self.lvalue()?;
                    self.expect(&Tok::Assign, "`=`")?;
                    let value = self.rhs()?;
                    self.expect(&Tok::Semi, "`;`")?;
                    StmtKind::Assign { target, value }
                }
            }
            other => return self.error(format!("expected statement, found {}", describe(&other))),
        };
        Ok(Stmt {
            id,
            kind,
            span: Self::join(start, self.prev_span()),
        })
    }

    fn decl_rest(&mut self, input: bool) -> PResult<StmtKind> {
        let (name, _) = self.ident()?;
        let len = if self.eat(&Tok::LBracket) {
            let e = self.expr()?;
            self.expect(&Tok::RBracket, "`]`")?;
            Some(e)
        } else {
            None
        };
        let init = if self.eat(&Tok::Assign) {
            Some(self.rhs()?)
        } else {
            None
        };
        self.expect(&Tok::Semi, "`;`")?;
        Ok(StmtKind::Decl {
            name,
            input,
            len,
            init,
        })
    }

    fn rhs(&mut self) -> PResult<Rhs> {
        if matches!(self.peek().tok, Tok::Ident(_)) && self.peek_at(1) == &Tok::LParen {
            Ok(Rhs::Call(self.call()?))
        } else {
            Ok(Rhs::Expr(self.expr()?))
        }
    }

    fn call(&mut self) -> PResult<Call> {
        let (callee, start) = self.ident()?;
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let end = self.expect(&Tok::RParen, "`)`")?.span;
        Ok(Call {
            callee,
            args,
            span: Self::join(start, end),
        })
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let (name, span) = self.ident()?;
        if self.eat(&Tok::LBracket) {
            let idx = self.expr()?;
            let end = self.expect(&Tok::RBracket, "`]`")?.span;
            Ok(LValue::Index(name, Box::new(idx), Self::join(span, end)))
        } else {
            Ok(LValue::Var(name, span))
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.eat(&Tok::Question) {
            let a = self.expr()?;
            self.expect(&Tok::Colon, "`:`")?;
            let b = self.expr()?;
            let span = Self::join(cond.span, b.span);
            return Ok(Expr {
                kind: ExprKind::Cond(Box::new(cond), Box::new(a), Box::new(b)),
                span,
            });
        }
        Ok(cond)
    }

    fn binop(t: &Tok) -> Option<BinOp> {
        Some(match t {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::AndAnd => BinOp::And,
            Tok::OrOr => BinOp::Or,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = Self::binop(&self.peek().tok) {
            if op.precedence() < min_prec {
                break;
            }
            let op_span = self.bump().span;
            let rhs = self.binary(op.precedence() + 1)?;
            let span = Self::join(lhs.span, rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs), op_span),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek().tok {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            _ => return self.primary(),
        };
        let start = self.bump().span;
        let e = self.unary()?;
        let span = Self::join(start, e.span);
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(e)),
            span,
        })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Int(v),
                    span: t.span,
                })
            }
            Tok::KwTrue | Tok::KwFalse => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Bool(t.tok == Tok::KwTrue),
                    span: t.span,
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek_at(1) == &Tok::LParen {
                    return self.error(
                        "calls may only appear as a statement or as the whole right-hand side of an assignment",
                    );
                }
                self.bump();
                if self.eat(&Tok::LBracket) {
                    let idx = self.expr()?;
                    let end = self.expect(&Tok::RBracket, "`]`")?.span;
                    Ok(Expr {
                        kind: ExprKind::Index(name, Box::new(idx)),
                        span: Self::join(t.span, end),
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Name(name),
                        span: t.span,
                    })
                }
            }
            other => self.error(format!("expected expression, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n) => format!("identifier `{n}`"),
        Tok::Int(v) => format!("integer `{v}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}
