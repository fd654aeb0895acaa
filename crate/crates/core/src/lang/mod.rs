//! MiniC frontend: lexing, parsing, pretty-printing and lowering to a
//! transition-system [`Program`].

pub mod ast;
pub mod lexer;
mod lower;
pub mod parser;
pub mod pretty;
pub mod program;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::{Ast, BinOp, Span, StmtId, UnOp};
pub use lower::{lower_to_cfg, LowerOptions};
pub use parser::parse;
pub use pretty::ast_to_string;
pub use program::*;

pub const WIDTHS: [u32; 4] = [4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{line}:{column}: syntax error: {msg}")]
    Syntax { line: u32, column: u32, msg: String },
    #[error("recursive call cycle: {}", cycle.join(" -> "))]
    Recursion { cycle: Vec<String> },
    #[error("{line}:{column}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: u32, column: u32 },
    #[error("unroll bound must be at least 1")]
    UnrollBound,
    #[error("{line}:{column}: {msg}")]
    Semantic { line: u32, column: u32, msg: String },
}

impl FrontendError {
    pub(crate) fn semantic(span: Span, msg: impl Into<String>) -> Self {
        FrontendError::Semantic {
            line: span.line,
            column: span.column,
            msg: msg.into(),
        }
    }
}

/// Parse and lower in one step.
pub fn compile(source: &str, opts: &LowerOptions) -> Result<Program, FrontendError> {
    let ast = parse(source)?;
    lower_to_cfg(&ast, opts)
}

/// Static checks run after parsing: an acyclic call graph, then name
/// resolution and typing by a trial lowering at bound 1. Literal ranges
/// depend on the width and are checked when lowering for real.
pub(crate) fn check_program(ast: &Ast) -> Result<(), FrontendError> {
    check_call_graph(ast)?;
    let widest = LowerOptions {
        width: 32,
        ..LowerOptions::default()
    };
    lower_to_cfg(ast, &widest).map(|_| ())
}

fn check_call_graph(ast: &Ast) -> Result<(), FrontendError> {
    let mut graph: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for item in &ast.items {
        if let ast::Item::Function(f) = item {
            let callees = graph.entry(f.name.as_str()).or_default();
            for s in &f.body {
                collect_callees(s, callees);
            }
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    let mut stack: Vec<&str> = Vec::new();
    fn dfs<'a>(
        f: &'a str,
        graph: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        state: &mut BTreeMap<&'a str, u8>,
        stack: &mut Vec<&'a str>,
    ) -> Result<(), FrontendError> {
        state.insert(f, 1);
        stack.push(f);
        if let Some(callees) = graph.get(f) {
            for &g in callees {
                match state.get(g).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|&x| x == g).unwrap_or(0);
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|s| s.to_string()).collect();
                        cycle.push(g.to_string());
                        return Err(FrontendError::Recursion { cycle });
                    }
                    0 if graph.contains_key(g) => dfs(g, graph, state, stack)?,
                    _ => {}
                }
            }
        }
        stack.pop();
        state.insert(f, 2);
        Ok(())
    }
    let names: Vec<&str> = graph.keys().copied().collect();
    for f in names {
        if state.get(f).copied().unwrap_or(0) == 0 {
            dfs(f, &graph, &mut state, &mut stack)?;
        }
    }
    Ok(())
}

fn collect_callees<'a>(s: &'a ast::Stmt, out: &mut BTreeSet<&'a str>) {
    use ast::{Rhs, StmtKind};
    match &s.kind {
        StmtKind::Decl {
            init: Some(Rhs::Call(c)),
            ..
        }
        | StmtKind::Assign {
            value: Rhs::Call(c),
            ..
        }
        | StmtKind::Call(c) => {
            out.insert(c.callee.as_str());
        }
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => {
            collect_callees(then_branch, out);
            if let Some(e) = else_branch {
                collect_callees(e, out);
            }
        }
        StmtKind::While { body, .. } => collect_callees(body, out),
        StmtKind::Block(b) => b.iter().for_each(|s| collect_callees(s, out)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_cycle_is_rejected() {
        let src = "void f() { g(); }\nvoid g() { h(); }\nvoid h() { f(); }\nf();";
        match parse(src) {
            Err(FrontendError::Recursion { cycle }) => {
                assert_eq!(cycle, vec!["f", "g", "h", "f"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_recursion_is_rejected() {
        let src = "int f(int n) { int r = f(n); return r; }";
        assert!(matches!(parse(src), Err(FrontendError::Recursion { .. })));
    }

    #[test]
    fn undeclared_variable() {
        let err = parse("int x;\nx = y + 1;").unwrap_err();
        assert_eq!(
            err,
            FrontendError::UndeclaredVariable {
                name: "y".into(),
                line: 2,
                column: 5
            }
        );
    }
}
