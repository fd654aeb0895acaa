//! Pretty-printer producing re-parseable MiniC. Binary operands that are
//! themselves binary or conditional expressions are always parenthesized.

use std::fmt::Write as _;

use super::ast::*;

pub fn ast_to_string(ast: &Ast) -> String {
    let mut out = String::new();
    for item in &ast.items {
        match item {
            Item::Const(c) => {
                let _ = writeln!(out, "const int {} = {};", c.name, expr_to_string(&c.value));
            }
            Item::Function(f) => {
                let params: Vec<String> = f
                    .params
                    .iter()
                    .map(|p| {
                        if p.is_array {
                            format!("int {}[]", p.name)
                        } else {
                            format!("int {}", p.name)
                        }
                    })
                    .collect();
                let ret = if f.returns_value { "int" } else { "void" };
                let _ = writeln!(out, "{ret} {}({}) {{", f.name, params.join(", "));
                for s in &f.body {
                    write_stmt(&mut out, s, 1);
                }
                out.push_str("}\n");
            }
            Item::Stmt(s) => write_stmt(&mut out, s, 0),
        }
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn call_to_string(c: &Call) -> String {
    let args: Vec<String> = c.args.iter().map(expr_to_string).collect();
    format!("{}({})", c.callee, args.join(", "))
}

fn rhs_to_string(r: &Rhs) -> String {
    match r {
        Rhs::Expr(e) => expr_to_string(e),
        Rhs::Call(c) => call_to_string(c),
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Decl {
            name,
            input,
            len,
            init,
        } => {
            if *input {
                out.push_str("input ");
            }
            let _ = write!(out, "int {name}");
            if let Some(l) = len {
                let _ = write!(out, "[{}]", expr_to_string(l));
            }
            if let Some(r) = init {
                let _ = write!(out, " = {}", rhs_to_string(r));
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            let lhs = match target {
                LValue::Var(n, _) => n.clone(),
                LValue::Index(n, i, _) => format!("{n}[{}]", expr_to_string(i)),
            };
            let _ = writeln!(out, "{lhs} = {};", rhs_to_string(value));
        }
        StmtKind::Call(c) => {
            let _ = writeln!(out, "{};", call_to_string(c));
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({})", expr_to_string(cond));
            write_stmt(out, then_branch, depth + 1);
            if let Some(e) = else_branch {
                indent(out, depth);
                out.push_str("else\n");
                write_stmt(out, e, depth + 1);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({})", expr_to_string(cond));
            write_stmt(out, body, depth + 1);
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "assert({});", expr_to_string(e));
        }
        StmtKind::Assume(e) => {
            let _ = writeln!(out, "assume({});", expr_to_string(e));
        }
        StmtKind::Return(e) => match e {
            Some(e) => {
                let _ = writeln!(out, "return {};", expr_to_string(e));
            }
            None => out.push_str("return;\n"),
        },
        StmtKind::Block(b) => {
            out.push_str("{\n");
            for s in b {
                write_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Empty => out.push_str(";\n"),
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Index(n, i) => format!("{n}[{}]", expr_to_string(i)),
        ExprKind::Unary(op, a) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            match a.kind {
                ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Name(_) | ExprKind::Index(..) => {
                    format!("{sym}{}", expr_to_string(a))
                }
                _ => format!("{sym}({})", expr_to_string(a)),
            }
        }
        ExprKind::Binary(op, a, b, _) => {
            format!("{} {} {}", operand(a), op.symbol(), operand(b))
        }
        ExprKind::Cond(c, a, b) => {
            format!("{} ? {} : {}", operand(c), operand(a), operand(b))
        }
    }
}

fn operand(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Binary(..) | ExprKind::Cond(..) => format!("({})", expr_to_string(e)),
        _ => expr_to_string(e),
    }
}
