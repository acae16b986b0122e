//! Multi-index combinatorics for the occupation-number bases of the symmetric
//! tensor powers of `C^d`.
//!
//! The level-`n` occupation basis is `{ e^{va} : |a| = n }` with
//! `e^{va} = sqrt(n!/a!) S_n(e^{ta})`, where `S_n` is the symmetrizer and
//! `e^{ta}` the elementary tensor word.  All square-root normalization
//! factors between the `e^{va}` and `e^{ta}` pictures are concentrated here.

use crate::{C64, CMat, CVec};

/// Occupation multi-index `a = (a_1, ..., a_d)` with `|a| = sum a_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// `a + 1_j`
    pub fn raised(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += 1;
        MultiIndex(v)
    }

    /// `a - 1_j`, or `None` if `a_j = 0`.
    pub fn lowered(&self, j: usize) -> Option<Self> {
        if self.0[j] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[j] -= 1;
        Some(MultiIndex(v))
    }

    /// Componentwise `self <= other`.
    pub fn leq(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise difference; caller guarantees `other <= self`.
    pub fn minus(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn plus(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `a! = prod a_j!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// `x^a` for a complex vector `x`.
    pub fn monomial(&self, x: &CVec) -> C64 {
        self.0
            .iter()
            .enumerate()
            .map(|(j, &a)| x[j].powu(a as u32))
            .product()
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Dimension of the symmetric power: `C(n + d - 1, d - 1)`.
pub fn level_dim(d: usize, n: usize) -> usize {
    binomial(n + d - 1, d - 1) as usize
}

/// All multi-indices of length `d` with `|a| = n`, in colexicographic order:
/// `a < b` iff `a_j < b_j` at the largest index `j` where they differ.
pub fn enumerate_level(d: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(level_dim(d, n));
    let mut cur = vec![0usize; d];
    gen_rec(d, n, d, &mut cur, &mut out);
    out.sort_by(|a, b| {
        for j in (0..d).rev() {
            match a.0[j].cmp(&b.0[j]) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    out
}

fn gen_rec(d: usize, rem: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if pos == 1 {
        cur[d - 1] = rem;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in 0..=rem {
        cur[d - pos] = k;
        gen_rec(d, rem - k, pos - 1, cur, out);
    }
}

/// Coordinates of `z^{tp}` in the level-`p` occupation basis:
/// `<e^{vb}, z^{tp}> = sqrt(p!/b!) z^b`.
pub fn sym_lift(z: &CVec, p: usize) -> CVec {
    let d = z.len();
    let basis = enumerate_level(d, p);
    let pf = factorial(p);
    CVec::from_iterator(
        basis.len(),
        basis
            .iter()
            .map(|b| b.monomial(z) * C64::from((pf / b.factorial()).sqrt())),
    )
}

/// Matrix of the symmetric power `S^{vn}` of a `d x d` matrix `S` in the
/// level-`n` occupation basis.
///
/// Columns are built by the creation-operator recursion
/// `S^{vn} e^{va} = (a!)^{-1/2} prod_j c(S e_j)^{a_j} vacuum` where `c(w)` is
/// the unit (`eps = 1`) creation operator `c(w) e^{vb} = sum_j w_j
/// sqrt(b_j + 1) e^{v(b+1_j)}`.
pub fn sym_power(s: &CMat, n: usize) -> CMat {
    let d = s.ncols();
    let basis = enumerate_level(d, n);
    let dim = basis.len();
    let mut out = CMat::zeros(dim, dim);
    let index = index_map(&basis);
    for (col, alpha) in basis.iter().enumerate() {
        // start from the vacuum of an eps = 1 ladder
        let mut level = 0usize;
        let mut coeffs: Vec<(MultiIndex, C64)> = vec![(MultiIndex::zero(d), C64::from(1.0))];
        for j in 0..d {
            let w: Vec<C64> = (0..d).map(|i| s[(i, j)]).collect();
            for _ in 0..alpha.0[j] {
                coeffs = apply_unit_create(&coeffs, &w);
                level += 1;
            }
        }
        debug_assert_eq!(level, n);
        let norm = alpha.factorial().sqrt();
        for (beta, c) in coeffs {
            let row = index[&beta];
            out[(row, col)] += c / norm;
        }
    }
    out
}

fn apply_unit_create(coeffs: &[(MultiIndex, C64)], w: &[C64]) -> Vec<(MultiIndex, C64)> {
    use std::collections::HashMap;
    let mut acc: HashMap<MultiIndex, C64> = HashMap::new();
    for (beta, c) in coeffs {
        for (j, &wj) in w.iter().enumerate() {
            if wj == C64::from(0.0) {
                continue;
            }
            let amp = *c * wj * C64::from(((beta.0[j] + 1) as f64).sqrt());
            *acc.entry(beta.raised(j)).or_insert(C64::from(0.0)) += amp;
        }
    }
    acc.into_iter().collect()
}

/// Position lookup for an enumerated level.
pub fn index_map(basis: &[MultiIndex]) -> std::collections::HashMap<MultiIndex, usize> {
    basis
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect()
}

/// Conversion factor between a kernel entry and the coefficient of the
/// monomial `conj(z)^g z^b` in the symbol: `c_{g,b} = A_{g,b} *
/// sqrt(p! q! / (b! g!))`.
pub fn kernel_to_monomial_factor(p: usize, q: usize, beta: &MultiIndex, gamma: &MultiIndex) -> f64 {
    (factorial(p) * factorial(q) / (beta.factorial() * gamma.factorial())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_sizes() {
        assert_eq!(level_dim(2, 0), 1);
        assert_eq!(level_dim(2, 1), 2);
        assert_eq!(level_dim(2, 2), 3);
        // brute-force count of |a| = 3 over d = 3
        assert_eq!(enumerate_level(3, 3).len(), 10);
        assert_eq!(level_dim(3, 3), 10);
        assert_eq!(enumerate_level(1, 7).len(), 1);
    }

    #[test]
    fn colex_order_is_deterministic_and_graded() {
        let lvl = enumerate_level(2, 2);
        assert_eq!(
            lvl,
            vec![
                MultiIndex(vec![2, 0]),
                MultiIndex(vec![1, 1]),
                MultiIndex(vec![0, 2]),
            ]
        );
    }

    #[test]
    fn sym_power_identity_and_diagonal() {
        let s = CMat::identity(2, 2);
        let m = sym_power(&s, 3);
        assert!((m - CMat::identity(4, 4)).norm() < 1e-12);

        // Gamma(diag(s, 1)) e^{v(2,0)} = s^2 e^{v(2,0)}
        let mut d = CMat::identity(2, 2);
        d[(0, 0)] = C64::from(0.5);
        let m = sym_power(&d, 2);
        let basis = enumerate_level(2, 2);
        let i20 = basis.iter().position(|a| a.0 == vec![2, 0]).unwrap();
        assert!((m[(i20, i20)] - C64::from(0.25)).norm() < 1e-14);
    }
}
