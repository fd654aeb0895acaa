//! Plain DIMACS CNF reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Cnf, Lit, VarMeta};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing problem line")]
    MissingHeader,
}

fn malformed(line: usize, msg: impl Into<String>) -> DimacsError {
    DimacsError::Malformed {
        line,
        msg: msg.into(),
    }
}

/// Parses a `p cnf` file. Clauses may span lines; comments start with `c`.
pub fn parse_cnf(text: &str) -> Result<Cnf, DimacsError> {
    let mut cnf = Cnf::new();
    let mut header = None;
    let mut current = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(malformed(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let vars: usize = parts[2]
                .parse()
                .map_err(|_| malformed(line_no, "bad variable count"))?;
            let clauses: usize = parts[3]
                .parse()
                .map_err(|_| malformed(line_no, "bad clause count"))?;
            for _ in 0..vars {
                cnf.new_var(VarMeta::Aux);
            }
            header = Some(clauses);
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        for tok in t.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| malformed(line_no, format!("bad literal `{tok}`")))?;
            if x == 0 {
                push_clause(&mut cnf, &current);
                current.clear();
            } else {
                let lit = Lit::from_dimacs(x);
                while cnf.var_count() <= lit.var().index() {
                    cnf.new_var(VarMeta::Aux);
                }
                current.push(lit);
            }
        }
    }
    if header.is_none() {
        return Err(DimacsError::MissingHeader);
    }
    if !current.is_empty() {
        push_clause(&mut cnf, &current);
    }
    Ok(cnf)
}

fn push_clause(cnf: &mut Cnf, lits: &[Lit]) {
    // tautologies are dropped; an empty clause is kept verbatim
    if lits.is_empty() {
        cnf.clauses.push(Vec::new());
    } else {
        cnf.add_clause(lits);
    }
}

pub fn write_cnf(cnf: &Cnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", cnf.var_count(), cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multiline_clauses_and_comments() {
        let cnf = parse_cnf("c hi\np cnf 3 2\n1 -2\n 0 2 3 0\n").unwrap();
        assert_eq!(cnf.var_count(), 3);
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(parse_cnf(&write_cnf(&cnf)).unwrap(), cnf);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_cnf("1 2 0\n"), Err(DimacsError::MissingHeader));
        assert!(parse_cnf("p cnf 2 1\n1 x 0\n").is_err());
    }
}
