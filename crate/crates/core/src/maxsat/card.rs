//! At-most-k constraints.

use crate::sat::{Cnf, Lit, VarMeta};

/// Clauses whose models, projected onto `lits`, are exactly the assignments
/// with at most `k` true literals. Auxiliary variables are allocated in `cnf`
/// but the clauses are returned, not added.
///
/// `k = 1` with at most six literals uses the pairwise encoding; everything
/// else uses a sequential counter.
pub fn encode_at_most_k(cnf: &mut Cnf, lits: &[Lit], k: usize) -> Vec<Vec<Lit>> {
    let n = lits.len();
    if k >= n {
        return Vec::new();
    }
    if k == 0 {
        return lits.iter().map(|&l| vec![!l]).collect();
    }
    if k == 1 && n <= 6 {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(vec![!lits[i], !lits[j]]);
            }
        }
        return out;
    }
    // s[i][j]: at least j+1 of lits[0..=i] are true
    let s: Vec<Vec<Lit>> = (0..n - 1)
        .map(|_| (0..k).map(|_| cnf.new_var(VarMeta::Aux).pos()).collect())
        .collect();
    let mut out = Vec::new();
    out.push(vec![!lits[0], s[0][0]]);
    for j in 1..k {
        out.push(vec![!s[0][j]]);
    }
    for i in 1..n - 1 {
        out.push(vec![!lits[i], s[i][0]]);
        out.push(vec![!s[i - 1][0], s[i][0]]);
        for j in 1..k {
            out.push(vec![!lits[i], !s[i - 1][j - 1], s[i][j]]);
            out.push(vec![!s[i - 1][j], s[i][j]]);
        }
        out.push(vec![!lits[i], !s[i - 1][k - 1]]);
    }
    out.push(vec![!lits[n - 1], !s[n - 2][k - 1]]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, Lit};

    fn check(n: usize, k: usize) {
        let mut cnf = Cnf::new();
        let xs: Vec<Lit> = (0..n).map(|_| cnf.new_var(VarMeta::Aux).pos()).collect();
        let frag = encode_at_most_k(&mut cnf, &xs, k);
        for c in &frag {
            cnf.add_clause(c);
        }
        for mask in 0u32..(1 << n) {
            let assumptions: Vec<Lit> = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| if mask >> i & 1 == 1 { x } else { !x })
                .collect();
            let sat = solve(&cnf, &assumptions, 0).is_sat();
            assert_eq!(sat, mask.count_ones() as usize <= k, "n={n} k={k} mask={mask:b}");
        }
    }

    #[test]
    fn exhaustive_small() {
        for n in 1..=7 {
            for k in 0..=n {
                check(n, k);
            }
        }
    }

    #[test]
    fn trivial_cases() {
        let mut cnf = Cnf::new();
        let xs: Vec<Lit> = (0..4).map(|_| cnf.new_var(VarMeta::Aux).pos()).collect();
        assert!(encode_at_most_k(&mut cnf, &xs, 4).is_empty());
        assert_eq!(
            encode_at_most_k(&mut cnf, &xs[..3], 0),
            vec![vec![!xs[0]], vec![!xs[1]], vec![!xs[2]]]
        );
    }
}
