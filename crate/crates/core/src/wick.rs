//! Polynomial symbols `b(z) = <z^{tq}, K z^{tp}>` and their Wick
//! quantization, contractions, Poisson brackets and composition.
//!
//! Kernels are stored directly in the occupation bases of the symmetric
//! levels, never as full tensors; the full-tensor route exists only as a test
//! oracle.  The occupation-basis matrix elements of `b^{Wick}` are
//!
//! ```text
//! <e^{vg'}, b^{Wick} e^{va}> =
//!     eps^{(p+q)/2} sqrt(p! q!) sqrt(g'! a!)
//!     sum_{b <= a, |b| = p} K_{g,b} / (b! g! (a - b)!),   g = g' - (a - b),
//! ```
//!
//! which reduces to the definition `sqrt(n!(n+q-p)!)/(n-p)! eps^{(p+q)/2}
//! (K v I)` after carrying out the symmetrization combinatorics.

use std::collections::BTreeMap;

use crate::comb::{
    enumerate_level, factorial, index_map, kernel_to_monomial_factor, level_dim, sym_lift,
    sym_power, MultiIndex,
};
use crate::error::{FockError, Result};
use crate::fock::{expm_i_hermitian, op_norm, weyl, FockOperator, Space};
use crate::{C64, CMat, CVec};

/// A `(p, q)`-homogeneous polynomial symbol, stored as its kernel matrix
/// from `Sym^p(C^d)` to `Sym^q(C^d)` in the occupation bases.
#[derive(Debug, Clone)]
pub struct PolynomialSymbol {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub kernel: CMat,
}

impl PolynomialSymbol {
    pub fn new(d: usize, p: usize, q: usize, kernel: CMat) -> Result<Self> {
        let (rows, cols) = (level_dim(d, q), level_dim(d, p));
        if kernel.nrows() != rows || kernel.ncols() != cols {
            return Err(FockError::DimensionMismatch {
                expected: rows * cols,
                got: kernel.nrows() * kernel.ncols(),
            });
        }
        Ok(PolynomialSymbol { d, p, q, kernel })
    }

    /// The constant symbol `c`.
    pub fn constant(d: usize, c: C64) -> Self {
        PolynomialSymbol {
            d,
            p: 0,
            q: 0,
            kernel: CMat::from_element(1, 1, c),
        }
    }

    /// `b(z) = <xi, z>`, quantizing to `a(xi)`.
    pub fn annihilation(xi: &CVec) -> Self {
        let d = xi.len();
        PolynomialSymbol {
            d,
            p: 1,
            q: 0,
            kernel: CMat::from_fn(1, d, |_, j| xi[j].conj()),
        }
    }

    /// `b(z) = <z, eta>`, quantizing to `a*(eta)`.
    pub fn creation(eta: &CVec) -> Self {
        let d = eta.len();
        PolynomialSymbol {
            d,
            p: 0,
            q: 1,
            kernel: CMat::from_fn(d, 1, |i, _| eta[i]),
        }
    }

    /// `b(z) = |z|^{2p}`, the identity kernel on `Sym^p`.
    pub fn norm_power(d: usize, p: usize) -> Self {
        let k = level_dim(d, p);
        PolynomialSymbol {
            d,
            p,
            q: p,
            kernel: CMat::identity(k, k),
        }
    }

    /// Matrix-unit symbol `<z^{tq}, e^{vg}><e^{vb}, z^{tp}>`.
    pub fn matrix_unit(d: usize, gamma: &MultiIndex, beta: &MultiIndex) -> Self {
        let p = beta.total();
        let q = gamma.total();
        let bp = enumerate_level(d, p);
        let bq = enumerate_level(d, q);
        let ib = bp.iter().position(|a| a == beta).expect("beta in level");
        let ig = bq.iter().position(|a| a == gamma).expect("gamma in level");
        let mut kernel = CMat::zeros(bq.len(), bp.len());
        kernel[(ig, ib)] = C64::from(1.0);
        PolynomialSymbol { d, p, q, kernel }
    }

    /// Symbol norm `|b|_{P_{p,q}}`, the operator norm of the kernel.
    pub fn norm(&self) -> f64 {
        op_norm(&self.kernel)
    }

    /// The conjugate symbol `conj(b)`, with kernel the adjoint and `(p, q)`
    /// swapped.
    pub fn conj(&self) -> Self {
        PolynomialSymbol {
            d: self.d,
            p: self.q,
            q: self.p,
            kernel: self.kernel.adjoint(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        PolynomialSymbol {
            kernel: self.kernel.clone() * c,
            ..self.clone()
        }
    }

    /// `b(z) = <z^{tq}, K z^{tp}>` via the symmetric-power lift of `z`.
    pub fn evaluate(&self, z: &CVec) -> C64 {
        let lp = sym_lift(z, self.p);
        let lq = sym_lift(z, self.q);
        lq.dotc(&(&self.kernel * lp))
    }

    /// Monomial coefficients `c_{g,b}` of `sum c_{g,b} conj(z)^g z^b`.
    pub fn monomial_coeffs(&self) -> Vec<(MultiIndex, MultiIndex, C64)> {
        let bp = enumerate_level(self.d, self.p);
        let bq = enumerate_level(self.d, self.q);
        let mut out = Vec::new();
        for (ig, g) in bq.iter().enumerate() {
            for (ib, b) in bp.iter().enumerate() {
                let a = self.kernel[(ig, ib)];
                if a != C64::from(0.0) {
                    out.push((
                        g.clone(),
                        b.clone(),
                        a * C64::from(kernel_to_monomial_factor(self.p, self.q, b, g)),
                    ));
                }
            }
        }
        out
    }

    /// Rebuild a symbol from monomial coefficients of a `(p, q)`-homogeneous
    /// polynomial.
    pub fn from_monomials(
        d: usize,
        p: usize,
        q: usize,
        coeffs: &BTreeMap<(MultiIndex, MultiIndex), C64>,
    ) -> Self {
        let bp = enumerate_level(d, p);
        let bq = enumerate_level(d, q);
        let ip = index_map(&bp);
        let iq = index_map(&bq);
        let mut kernel = CMat::zeros(bq.len(), bp.len());
        for ((g, b), c) in coeffs {
            kernel[(iq[g], ip[b])] = c / C64::from(kernel_to_monomial_factor(p, q, b, g));
        }
        PolynomialSymbol { d, p, q, kernel }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.kernel.norm() <= tol
    }
}

/// A finite sum of homogeneous symbols, at most one per `(p, q)`.
#[derive(Debug, Clone)]
pub struct CompoundSymbol {
    pub d: usize,
    pub terms: BTreeMap<(usize, usize), PolynomialSymbol>,
}

impl CompoundSymbol {
    pub fn zero(d: usize) -> Self {
        CompoundSymbol {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_term(b: PolynomialSymbol) -> Self {
        let d = b.d;
        let mut terms = BTreeMap::new();
        terms.insert((b.p, b.q), b);
        CompoundSymbol { d, terms }
    }

    pub fn add_term(&mut self, b: PolynomialSymbol) {
        assert_eq!(b.d, self.d, "one-particle dimension mismatch");
        match self.terms.entry((b.p, b.q)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(b);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let cur = e.get_mut();
                cur.kernel += &b.kernel;
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for b in other.terms.values() {
            out.add_term(b.clone());
        }
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        CompoundSymbol {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(&k, b)| (k, b.scaled(c)))
                .collect(),
        }
    }

    pub fn evaluate(&self, z: &CVec) -> C64 {
        self.terms.values().map(|b| b.evaluate(z)).sum()
    }

    /// Drop terms with negligible kernels.
    pub fn pruned(&self, tol: f64) -> Self {
        CompoundSymbol {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(_, b)| !b.is_zero(tol))
                .map(|(&k, b)| (k, b.clone()))
                .collect(),
        }
    }

    /// Largest `p + q` among the terms.
    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|&(p, q)| p + q).max().unwrap_or(0)
    }
}

/// Wick quantization of a homogeneous symbol; blocks whose target level
/// exceeds `n_max` are dropped.
pub fn wick_quantize(b: &PolynomialSymbol, space: &Space) -> Result<FockOperator> {
    if b.d != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: b.d,
        });
    }
    if b.p > space.n_max || b.q > space.n_max {
        return Err(FockError::DegreeExceedsTruncation {
            p: b.p,
            q: b.q,
            n_max: space.n_max,
        });
    }
    let (p, q) = (b.p, b.q);
    let basis_p = enumerate_level(space.d, p);
    let basis_q = enumerate_level(space.d, q);
    let pref = space.eps.powf((p + q) as f64 / 2.0) * (factorial(p) * factorial(q)).sqrt();
    let mut op = FockOperator::zero(space);
    for (col, n, alpha) in space.basis_iter() {
        if n < p || n + q < p || n + q - p > space.n_max {
            continue;
        }
        let a_fact = alpha.factorial();
        for (ib, beta) in basis_p.iter().enumerate() {
            if !beta.leq(alpha) {
                continue;
            }
            let tau = alpha.minus(beta);
            let tau_fact = tau.factorial();
            for (ig, gamma) in basis_q.iter().enumerate() {
                let kval = b.kernel[(ig, ib)];
                if kval == C64::from(0.0) {
                    continue;
                }
                let gp = gamma.plus(&tau);
                let row = space.global_index(&gp).expect("target level in range");
                let amp = pref * (gp.factorial() * a_fact).sqrt()
                    / ((beta.factorial() * gamma.factorial()).sqrt() * tau_fact);
                op.mat[(row, col)] += kval * C64::from(amp);
            }
        }
    }
    Ok(op)
}

/// Wick quantization of a compound symbol.
pub fn wick_quantize_compound(b: &CompoundSymbol, space: &Space) -> Result<FockOperator> {
    let mut op = FockOperator::zero(space);
    for term in b.terms.values() {
        op.mat += wick_quantize(term, space)?.mat;
    }
    Ok(op)
}

/// The contraction `d_z^k b1 . d_zbar^k b2` of Proposition-style symbolic
/// calculus; belongs to `P_{p1+p2-k, q1+q2-k}`.
pub fn contract(b1: &PolynomialSymbol, b2: &PolynomialSymbol, k: usize) -> Result<PolynomialSymbol> {
    let max = b1.p.min(b2.q);
    if k > max {
        return Err(FockError::ContractionOrder { k, max });
    }
    let d = b1.d;
    let (pp, qq) = (b1.p + b2.p - k, b1.q + b2.q - k);
    let kappas = enumerate_level(d, k);
    let kf = factorial(k);
    let m1 = b1.monomial_coeffs();
    let m2 = b2.monomial_coeffs();
    let mut acc: BTreeMap<(MultiIndex, MultiIndex), C64> = BTreeMap::new();
    for (g1, be1, c1) in &m1 {
        for (g2, be2, c2) in &m2 {
            for kappa in &kappas {
                if !kappa.leq(be1) || !kappa.leq(g2) {
                    continue;
                }
                let factor = kf / kappa.factorial()
                    * (be1.factorial() / be1.minus(kappa).factorial())
                    * (g2.factorial() / g2.minus(kappa).factorial());
                let gamma = g1.plus(g2).minus(kappa);
                let beta = be1.minus(kappa).plus(be2);
                *acc.entry((gamma, beta)).or_insert(C64::from(0.0)) +=
                    c1 * c2 * C64::from(factor);
            }
        }
    }
    Ok(PolynomialSymbol::from_monomials(d, pp, qq, &acc))
}

/// Multiple Poisson bracket `{b1, b2}^{(k)} = d_z^k b1 . d_zbar^k b2 -
/// d_z^k b2 . d_zbar^k b1` (zero symbol when both contractions are empty).
pub fn poisson_bracket(
    b1: &PolynomialSymbol,
    b2: &PolynomialSymbol,
    k: usize,
) -> Result<PolynomialSymbol> {
    let d = b1.d;
    let (pp, qq) = (
        (b1.p + b2.p).checked_sub(k),
        (b1.q + b2.q).checked_sub(k),
    );
    let (pp, qq) = match (pp, qq) {
        (Some(pp), Some(qq)) => (pp, qq),
        _ => return Ok(PolynomialSymbol::constant(d, C64::from(0.0))),
    };
    let mut kernel = CMat::zeros(level_dim(d, qq), level_dim(d, pp));
    if k <= b1.p.min(b2.q) {
        kernel += &contract(b1, b2, k)?.kernel;
    }
    if k <= b2.p.min(b1.q) {
        kernel -= &contract(b2, b1, k)?.kernel;
    }
    PolynomialSymbol::new(d, pp, qq, kernel)
}

/// First-order Poisson bracket of compound symbols.
pub fn poisson_bracket_compound(b1: &CompoundSymbol, b2: &CompoundSymbol) -> Result<CompoundSymbol> {
    let mut out = CompoundSymbol::zero(b1.d);
    for t1 in b1.terms.values() {
        for t2 in b2.terms.values() {
            out.add_term(poisson_bracket(t1, t2, 1)?);
        }
    }
    Ok(out.pruned(0.0))
}

/// Symbol of the operator product: `b1^{Wick} b2^{Wick} = (sum_k eps^k / k!
/// d_z^k b1 . d_zbar^k b2)^{Wick}`.
pub fn compose(b1: &PolynomialSymbol, b2: &PolynomialSymbol, eps: f64) -> Result<CompoundSymbol> {
    let mut out = CompoundSymbol::zero(b1.d);
    for k in 0..=b1.p.min(b2.q) {
        let c = contract(b1, b2, k)?;
        out.add_term(c.scaled(C64::from(eps.powi(k as i32) / factorial(k))));
    }
    Ok(out)
}

/// Symbol of the commutator: `[b1^{Wick}, b2^{Wick}] = (sum_{k>=1} eps^k / k!
/// {b1, b2}^{(k)})^{Wick}`.
pub fn commutator_symbol(
    b1: &PolynomialSymbol,
    b2: &PolynomialSymbol,
    eps: f64,
) -> Result<CompoundSymbol> {
    let kmax = (b1.p.min(b2.q)).max(b2.p.min(b1.q));
    let mut out = CompoundSymbol::zero(b1.d);
    for k in 1..=kmax {
        let br = poisson_bracket(b1, b2, k)?;
        out.add_term(br.scaled(C64::from(eps.powi(k as i32) / factorial(k))));
    }
    Ok(out.pruned(0.0))
}

/// Operator norm of `<N>^{-q/2} b^{Wick} <N>^{-p/2}` on the truncated space,
/// with `<N> = (1 + N^2)^{1/2}`; bounded by `|b|_{P_{p,q}}`.
pub fn number_estimate_check(b: &PolynomialSymbol, space: &Space) -> Result<f64> {
    let w = wick_quantize(b, space)?;
    let mut m = w.mat;
    for (i, n, _) in space.basis_iter() {
        let jn = (1.0 + (space.eps * n as f64).powi(2)).sqrt();
        let lw = jn.powf(-(b.q as f64) / 2.0);
        let rw = jn.powf(-(b.p as f64) / 2.0);
        for jcol in 0..m.ncols() {
            m[(i, jcol)] *= C64::from(lw);
        }
        for irow in 0..m.nrows() {
            m[(irow, i)] *= C64::from(rw);
        }
    }
    Ok(op_norm(&m))
}

/// Symbol of `b(e^{-itA} z)`: kernel `(e^{itA})^{vq} K (e^{-itA})^{vp}`.
pub fn conjugate_free(b: &PolynomialSymbol, a_mat: &CMat, t: f64) -> PolynomialSymbol {
    let u_plus = expm_i_hermitian(a_mat, t);
    let u_minus = expm_i_hermitian(a_mat, -t);
    let left = sym_power(&u_plus, b.q);
    let right = sym_power(&u_minus, b.p);
    PolynomialSymbol {
        d: b.d,
        p: b.p,
        q: b.q,
        kernel: left * &b.kernel * right,
    }
}

/// Termwise [`conjugate_free`] on a compound symbol.
pub fn conjugate_free_compound(b: &CompoundSymbol, a_mat: &CMat, t: f64) -> CompoundSymbol {
    CompoundSymbol {
        d: b.d,
        terms: b
            .terms
            .iter()
            .map(|(&k, t_)| (k, conjugate_free(t_, a_mat, t)))
            .collect(),
    }
}

/// Weyl quantization of a finite Fourier sum `b(z) = sum_k c_k
/// e^{2 pi i S(z, xi_k)}`: the operator `sum_k c_k W(sqrt(2) pi xi_k)`.
pub fn weyl_quantize_fourier(terms: &[(C64, CVec)], space: &Space) -> Result<FockOperator> {
    let mut op = FockOperator::zero(space);
    for (c, xi) in terms {
        let w = weyl(space, &(xi * C64::from(2.0f64.sqrt() * std::f64::consts::PI)))?;
        op.mat += w.mat * *c;
    }
    Ok(op)
}

/// Weyl quantization of the quadratic symbol `<z, B z>`: the
/// symmetric-ordering quantizer `dGamma(B) + (eps/2) tr(B) I`.
pub fn weyl_quantize_quadratic(b_mat: &CMat, space: &Space) -> Result<FockOperator> {
    let mut op = crate::fock::dgamma(space, b_mat)?;
    let shift = C64::from(space.eps / 2.0) * b_mat.trace();
    for i in 0..op.mat.nrows() {
        op.mat[(i, i)] += shift;
    }
    Ok(op)
}

/// Seeded random symbol with complex Gaussian kernel entries.
pub fn random_symbol(
    d: usize,
    p: usize,
    q: usize,
    rng: &mut impl rand::Rng,
) -> PolynomialSymbol {
    let kernel = CMat::from_fn(level_dim(d, q), level_dim(d, p), |_, _| gaussian_c64(rng));
    PolynomialSymbol { d, p, q, kernel }
}

/// Seeded random Hermitian kernel on `Sym^j(C^d)`, optionally normalized to
/// unit operator norm.
pub fn random_hermitian_kernel(
    d: usize,
    j: usize,
    normalize: bool,
    rng: &mut impl rand::Rng,
) -> PolynomialSymbol {
    let k = level_dim(d, j);
    let g = CMat::from_fn(k, k, |_, _| gaussian_c64(rng));
    let mut kernel = (&g + g.adjoint()) * C64::from(0.5);
    if normalize {
        let norm = op_norm(&kernel);
        if norm > 0.0 {
            kernel /= C64::from(norm);
        }
    }
    PolynomialSymbol { d, p: j, q: j, kernel }
}

pub fn gaussian_c64(rng: &mut impl rand::Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Box-Muller standard normal.
pub fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{a_dag_general, a_general, build_space, number_operator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(d: usize, n_max: usize, eps: f64) -> Space {
        build_space(d, n_max, eps).unwrap()
    }

    #[test]
    fn ladder_symbols_quantize_to_ladder_operators() {
        let sp = space(2, 4, 0.3);
        let xi = CVec::from_vec(vec![C64::new(0.4, -0.7), C64::new(1.1, 0.2)]);
        let wa = wick_quantize(&PolynomialSymbol::annihilation(&xi), &sp).unwrap();
        let wc = wick_quantize(&PolynomialSymbol::creation(&xi), &sp).unwrap();
        assert!((wa.mat.clone() - a_general(&sp, &xi).unwrap().mat).norm() < 1e-12);
        assert!((wc.mat.clone() - a_dag_general(&sp, &xi).unwrap().mat).norm() < 1e-12);
    }

    #[test]
    fn norm_squared_quantizes_to_number_operator() {
        let sp = space(3, 3, 0.25);
        let b = PolynomialSymbol::norm_power(3, 1);
        let w = wick_quantize(&b, &sp).unwrap();
        assert!((w.mat.clone() - number_operator(&sp).mat).norm() < 1e-12);
    }

    #[test]
    fn evaluate_matches_monomial_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_symbol(2, 2, 3, &mut rng);
        let z = CVec::from_vec(vec![C64::new(0.3, -0.9), C64::new(-0.5, 0.45)]);
        let direct = b.evaluate(&z);
        let mut via_monomials = C64::from(0.0);
        for (g, be, c) in b.monomial_coeffs() {
            let zb: C64 = z.iter().zip(&be.0).map(|(zi, &k)| zi.powu(k as u32)).product();
            let zg: C64 = z
                .iter()
                .zip(&g.0)
                .map(|(zi, &k)| zi.conj().powu(k as u32))
                .product();
            via_monomials += c * zg * zb;
        }
        assert!((direct - via_monomials).norm() < 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn monomial_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = random_symbol(3, 2, 1, &mut rng);
        let coeffs: BTreeMap<_, _> = b
            .monomial_coeffs()
            .into_iter()
            .map(|(g, be, c)| ((g, be), c))
            .collect();
        let back = PolynomialSymbol::from_monomials(3, 2, 1, &coeffs);
        assert!((b.kernel.clone() - back.kernel).norm() < 1e-12);
    }

    #[test]
    fn composition_reproduces_operator_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sp = space(2, 6, 0.2);
        let b1 = random_symbol(2, 2, 1, &mut rng);
        let b2 = random_symbol(2, 1, 2, &mut rng);
        let prod = wick_quantize(&b1, &sp).unwrap().mul(&wick_quantize(&b2, &sp).unwrap());
        let comp = wick_quantize_compound(&compose(&b1, &b2, sp.eps).unwrap(), &sp).unwrap();
        // Truncation effects live in the top levels only; compare below them.
        let keep = sp.dim_through_level(sp.n_max - 3);
        let diff = (prod.mat - comp.mat).view((0, 0), (keep, keep)).norm();
        assert!(diff < 1e-10, "diff = {diff:e}");
    }

    #[test]
    fn commutator_symbol_reproduces_operator_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = space(2, 7, 0.35);
        let b1 = random_hermitian_kernel(2, 2, false, &mut rng);
        let b2 = random_hermitian_kernel(2, 1, false, &mut rng);
        let comm = wick_quantize(&b1, &sp)
            .unwrap()
            .commutator(&wick_quantize(&b2, &sp).unwrap());
        let sym = wick_quantize_compound(&commutator_symbol(&b1, &b2, sp.eps).unwrap(), &sp).unwrap();
        let keep = sp.dim_through_level(sp.n_max - 3);
        let diff = (comm.mat - sym.mat).view((0, 0), (keep, keep)).norm();
        assert!(diff < 1e-10, "diff = {diff:e}");
    }

    #[test]
    fn contraction_order_is_checked() {
        let b1 = PolynomialSymbol::norm_power(2, 1);
        let b2 = PolynomialSymbol::norm_power(2, 1);
        assert!(matches!(
            contract(&b1, &b2, 2),
            Err(FockError::ContractionOrder { .. })
        ));
    }

    #[test]
    fn conjugate_free_matches_operator_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sp = space(2, 5, 0.4);
        let b = random_symbol(2, 1, 2, &mut rng);
        let a_mat = {
            let g = CMat::from_fn(2, 2, |_, _| gaussian_c64(&mut rng));
            (&g + g.adjoint()) * C64::from(0.5)
        };
        let t = 0.37;
        // e^{it dGamma(A)/eps} b^{Wick} e^{-it dGamma(A)/eps} = (b o e^{-itA})^{Wick}
        let h = crate::fock::dgamma(&sp, &a_mat).unwrap();
        let u = FockOperator {
            space: sp.clone(),
            mat: expm_i_hermitian(&h.mat, t / sp.eps),
        };
        let lhs = u.mul(&wick_quantize(&b, &sp).unwrap()).mul(&u.adjoint());
        let rhs = wick_quantize(&conjugate_free(&b, &a_mat, t), &sp).unwrap();
        assert!((lhs.mat - rhs.mat).norm() < 1e-9);
    }

    #[test]
    fn number_estimate_bounded_by_symbol_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sp = space(2, 8, 0.5);
        let b = random_symbol(2, 2, 2, &mut rng);
        let bound = number_estimate_check(&b, &sp).unwrap();
        assert!(bound <= b.norm() * (1.0 + 1e-10), "{bound} vs {}", b.norm());
    }

    #[test]
    fn quadratic_weyl_minus_wick_is_trace_shift() {
        let sp = space(3, 4, 0.3);
        let weylq = weyl_quantize_quadratic(&CMat::identity(3, 3), &sp).unwrap();
        let wickq = wick_quantize(&PolynomialSymbol::norm_power(3, 1), &sp).unwrap();
        let diff = weylq.mat - wickq.mat;
        let expect = CMat::identity(sp.dim(), sp.dim()) * C64::from(1.5 * sp.eps);
        assert!((diff - expect).norm() < 1e-12);
    }
}
