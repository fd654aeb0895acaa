//! Exhaustive 4-bit agreement between the bit-blasted operators, the
//! interpreter's arithmetic, and a plain integer model written here.

use faultsat_core::bv::{eval_binop, eval_unop};
use faultsat_core::encode::{bv_value, Circuit};
use faultsat_core::lang::{BinOp, UnOp};
use faultsat_core::sat::{Lit, Solver, Status};

const W: u32 = 4;
const LO: i64 = -8;
const HI: i64 = 7;

fn wrap4(v: i64) -> i64 {
    (v + 8).rem_euclid(16) - 8
}

fn model_binop(op: BinOp, a: i64, b: i64) -> i64 {
    let t = |x: bool| x as i64;
    match op {
        BinOp::Add => wrap4(a + b),
        BinOp::Sub => wrap4(a - b),
        BinOp::Mul => wrap4(a * b),
        // signed division truncates toward zero; x/0 is -1 for x >= 0, else 1
        BinOp::Div => match b {
            0 if a >= 0 => -1,
            0 => 1,
            _ => wrap4(a / b),
        },
        BinOp::Rem => match b {
            0 => a,
            -1 => 0,
            _ => a % b,
        },
        BinOp::Lt => t(a < b),
        BinOp::Le => t(a <= b),
        BinOp::Gt => t(a > b),
        BinOp::Ge => t(a >= b),
        BinOp::Eq => t(a == b),
        BinOp::Ne => t(a != b),
        BinOp::And => t(a != 0 && b != 0),
        BinOp::Or => t(a != 0 || b != 0),
    }
}

fn model_unop(op: UnOp, a: i64) -> i64 {
    match op {
        UnOp::Neg => wrap4(-a),
        UnOp::Not => (a == 0) as i64,
    }
}

const BINOPS: [BinOp; 13] = [
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

fn fix(bits: &[Lit], v: i64) -> Vec<Lit> {
    bits.iter()
        .enumerate()
        .map(|(i, &l)| if (v >> i) & 1 == 1 { l } else { !l })
        .collect()
}

#[test]
fn binary_operators_agree_on_all_4_bit_pairs() {
    for op in BINOPS {
        let mut c = Circuit::new();
        let a = c.bv_fresh("a", 0, W);
        let b = c.bv_fresh("b", 0, W);
        let out = c.bv_binop(op, &a, &b);
        let mut s = Solver::new(0);
        s.add_cnf(&c.cnf);
        for x in LO..=HI {
            for y in LO..=HI {
                let want = model_binop(op, x, y);
                assert_eq!(eval_binop(op, x, y, W), want, "interpreter {x} {} {y}", op.symbol());
                let mut assumps = fix(&a, x);
                assumps.extend(fix(&b, y));
                let r = s.solve(&assumps);
                assert_eq!(r.status, Status::Sat);
                assert_eq!(bv_value(&out, &r.model), want, "circuit {x} {} {y}", op.symbol());
                // the output is functionally determined
                for l in fix(&out, want) {
                    let mut flipped = assumps.clone();
                    flipped.push(!l);
                    assert_eq!(s.solve(&flipped).status, Status::Unsat);
                }
            }
        }
    }
}

#[test]
fn unary_operators_agree_on_all_4_bit_values() {
    for op in [UnOp::Neg, UnOp::Not] {
        let mut c = Circuit::new();
        let a = c.bv_fresh("a", 0, W);
        let out = c.bv_unop(op, &a);
        let mut s = Solver::new(0);
        s.add_cnf(&c.cnf);
        for x in LO..=HI {
            let want = model_unop(op, x);
            assert_eq!(eval_unop(op, x, W), want);
            let r = s.solve(&fix(&a, x));
            assert_eq!(r.status, Status::Sat);
            assert_eq!(bv_value(&out, &r.model), want, "{op:?} {x}");
        }
    }
}
