//! Reference two's-complement semantics for MiniC operators at a given width.
//! Values are carried as sign-extended `i64`.

use crate::lang::{BinOp, UnOp};

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Wrap `v` to `width` bits and sign-extend.
pub fn wrap(v: i64, width: u32) -> i64 {
    let shift = 64 - width;
    (v << shift) >> shift
}

pub fn to_unsigned(v: i64, width: u32) -> u64 {
    (v as u64) & mask(width)
}

pub fn from_bits(bits: u64, width: u32) -> i64 {
    wrap(bits as i64, width)
}

pub fn min_value(width: u32) -> i64 {
    -(1i64 << (width - 1))
}

pub fn max_value(width: u32) -> i64 {
    (1i64 << (width - 1)) - 1
}

pub fn fits(v: i64, width: u32) -> bool {
    v >= min_value(width) && v <= max_value(width)
}

fn udiv(a: u64, b: u64, width: u32) -> u64 {
    if b == 0 {
        mask(width)
    } else {
        a / b
    }
}

fn urem(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        a % b
    }
}

/// Signed division truncating toward zero. Division by zero yields -1 for a
/// non-negative dividend and 1 otherwise; `MIN / -1` wraps to `MIN`.
pub fn sdiv(a: i64, b: i64, width: u32) -> i64 {
    let (ua, ub) = (to_unsigned(a.wrapping_abs(), width), to_unsigned(b.wrapping_abs(), width));
    let q = from_bits(udiv(ua, ub, width), width);
    if (a < 0) != (b < 0) {
        wrap(q.wrapping_neg(), width)
    } else {
        q
    }
}

/// Signed remainder taking the sign of the dividend; `x % 0 == x`.
pub fn srem(a: i64, b: i64, width: u32) -> i64 {
    let (ua, ub) = (to_unsigned(a.wrapping_abs(), width), to_unsigned(b.wrapping_abs(), width));
    let r = from_bits(urem(ua, ub), width);
    if a < 0 {
        wrap(r.wrapping_neg(), width)
    } else {
        r
    }
}

pub fn truth(v: i64) -> bool {
    v != 0
}

pub fn eval_unop(op: UnOp, a: i64, width: u32) -> i64 {
    match op {
        UnOp::Neg => wrap(a.wrapping_neg(), width),
        UnOp::Not => (a == 0) as i64,
    }
}

pub fn eval_binop(op: BinOp, a: i64, b: i64, width: u32) -> i64 {
    match op {
        BinOp::Add => wrap(a.wrapping_add(b), width),
        BinOp::Sub => wrap(a.wrapping_sub(b), width),
        BinOp::Mul => wrap(a.wrapping_mul(b), width),
        BinOp::Div => sdiv(a, b, width),
        BinOp::Rem => srem(a, b, width),
        BinOp::Lt => (a < b) as i64,
        BinOp::Le => (a <= b) as i64,
        BinOp::Gt => (a > b) as i64,
        BinOp::Ge => (a >= b) as i64,
        BinOp::Eq => (a == b) as i64,
        BinOp::Ne => (a != b) as i64,
        BinOp::And => (truth(a) && truth(b)) as i64,
        BinOp::Or => (truth(a) || truth(b)) as i64,
    }
}
