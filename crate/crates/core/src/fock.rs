//! Truncated symmetric Fock space over `C^d` with `eps`-dependent CCR.
//!
//! Operators that raise the level beyond `n_max` drop the overflow rows, so
//! algebraic identities are exact only on a guard band of levels; every test
//! states its guard band explicitly.

use std::collections::HashMap;
use std::sync::Arc;

use crate::comb::{enumerate_level, factorial, level_dim, sym_power, MultiIndex};
use crate::error::{FockError, Result};
use crate::{C64, CMat, CVec};

/// Default cap on the total basis size.
pub const DEFAULT_DIM_CAP: usize = 20_000;

/// Truncated Fock space `oplus_{n <= n_max} Sym^n(C^d)` with parameter `eps`.
#[derive(Debug)]
pub struct FockSpace {
    pub d: usize,
    pub n_max: usize,
    pub eps: f64,
    levels: Vec<Vec<MultiIndex>>,
    offsets: Vec<usize>,
    index: HashMap<MultiIndex, usize>,
    dim: usize,
}

/// Shared handle; spaces are immutable after construction.
pub type Space = Arc<FockSpace>;

impl FockSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation basis of one level, graded-colexicographic.
    pub fn level(&self, n: usize) -> &[MultiIndex] {
        &self.levels[n]
    }

    /// Global index of the first basis vector of level `n`.
    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Global basis index of a multi-index, if within truncation.
    pub fn global_index(&self, a: &MultiIndex) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// Iterate `(global_index, level, multi_index)`.
    pub fn basis_iter(&self) -> impl Iterator<Item = (usize, usize, &MultiIndex)> {
        self.levels.iter().enumerate().flat_map(move |(n, lvl)| {
            let off = self.offsets[n];
            lvl.iter().enumerate().map(move |(i, a)| (off + i, n, a))
        })
    }

    /// Total dimension of levels `0..=n`.
    pub fn dim_through_level(&self, n: usize) -> usize {
        self.offsets[n] + self.levels[n].len()
    }
}

/// Build a truncated Fock space with the default basis-size cap.
pub fn build_space(d: usize, n_max: usize, eps: f64) -> Result<Space> {
    build_space_with_cap(d, n_max, eps, DEFAULT_DIM_CAP)
}

pub fn build_space_with_cap(d: usize, n_max: usize, eps: f64, cap: usize) -> Result<Space> {
    if d < 1 {
        return Err(FockError::BadDimension(d));
    }
    if !(eps > 0.0) {
        return Err(FockError::NonPositiveEps(eps));
    }
    let total: usize = (0..=n_max).map(|n| level_dim(d, n)).sum();
    if total > cap {
        return Err(FockError::CapacityExceeded {
            required: total,
            cap,
            bytes_mb: (total * total * 16) as f64 / 1.0e6,
        });
    }
    let mut levels = Vec::with_capacity(n_max + 1);
    let mut offsets = Vec::with_capacity(n_max + 1);
    let mut index = HashMap::new();
    let mut off = 0usize;
    for n in 0..=n_max {
        let lvl = enumerate_level(d, n);
        offsets.push(off);
        for (i, a) in lvl.iter().enumerate() {
            index.insert(a.clone(), off + i);
        }
        off += lvl.len();
        levels.push(lvl);
    }
    Ok(Arc::new(FockSpace {
        d,
        n_max,
        eps,
        levels,
        offsets,
        index,
        dim: off,
    }))
}

/// Vector of the truncated Fock space in the occupation basis.
#[derive(Debug, Clone)]
pub struct FockVector {
    pub space: Space,
    pub coeffs: CVec,
}

impl FockVector {
    pub fn zero(space: &Space) -> Self {
        FockVector {
            space: space.clone(),
            coeffs: CVec::zeros(space.dim()),
        }
    }

    pub fn vacuum(space: &Space) -> Self {
        let mut v = Self::zero(space);
        v.coeffs[0] = C64::from(1.0);
        v
    }

    /// Basis vector `e^{va}`.
    pub fn basis_state(space: &Space, a: &MultiIndex) -> Result<Self> {
        let idx = space.global_index(a).ok_or_else(|| {
            FockError::Invalid(format!("multi-index {:?} outside truncation", a.0))
        })?;
        let mut v = Self::zero(space);
        v.coeffs[idx] = C64::from(1.0);
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `<self, other>`, anti-linear in `self`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.coeffs.dotc(&other.coeffs)
    }
}

/// Dense operator on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub space: Space,
    pub mat: CMat,
}

impl FockOperator {
    pub fn zero(space: &Space) -> Self {
        FockOperator {
            space: space.clone(),
            mat: CMat::zeros(space.dim(), space.dim()),
        }
    }

    pub fn identity(space: &Space) -> Self {
        FockOperator {
            space: space.clone(),
            mat: CMat::identity(space.dim(), space.dim()),
        }
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        FockVector {
            space: self.space.clone(),
            coeffs: &self.mat * &v.coeffs,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: &self.mat * &other.mat,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: self.mat.clone() * c,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        FockOperator {
            space: self.space.clone(),
            mat: &self.mat - &other.mat,
        }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm()
    }

    /// Operator 2-norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.mat)
    }

    /// Frobenius norm of the sub-block acting between levels `<= n_hi`.
    pub fn restricted_norm(&self, n_hi: usize) -> f64 {
        let k = self.space.dim_through_level(n_hi);
        self.mat.view((0, 0), (k, k)).norm()
    }
}

pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

/// `exp(i * scale * H)` for Hermitian `H`, by eigendecomposition.
pub fn expm_i_hermitian(h: &CMat, scale: f64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut core = CMat::zeros(n, n);
    for k in 0..n {
        core[(k, k)] = (C64::i() * scale * eig.eigenvalues[k]).exp();
    }
    &eig.eigenvectors * core * eig.eigenvectors.adjoint()
}

/// `f` applied to a Hermitian matrix through its spectrum.
pub fn apply_spectral(h: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut core = CMat::zeros(n, n);
    for k in 0..n {
        core[(k, k)] = f(eig.eigenvalues[k]);
    }
    &eig.eigenvectors * core * eig.eigenvectors.adjoint()
}

/// Creation operator `a*(e_j)`: `a*(e_j) e^{va} = sqrt(eps (a_j + 1))
/// e^{v(a+1_j)}`, rows above `n_max` dropped.
pub fn create(space: &Space, j: usize) -> Result<FockOperator> {
    if j >= space.d {
        return Err(FockError::BadModeIndex { index: j, d: space.d });
    }
    let mut op = FockOperator::zero(space);
    for (col, n, a) in space.basis_iter() {
        if n == space.n_max {
            continue;
        }
        let up = a.raised(j);
        let row = space.global_index(&up).expect("raised index within truncation");
        op.mat[(row, col)] = C64::from((space.eps * (a.0[j] + 1) as f64).sqrt());
    }
    Ok(op)
}

/// Annihilation operator `a(e_j)`, the adjoint of [`create`].
pub fn annihilate(space: &Space, j: usize) -> Result<FockOperator> {
    Ok(create(space, j)?.adjoint())
}

/// `a(xi) = sum_j conj(xi_j) a(e_j)` (anti-linear in `xi`).
pub fn a_general(space: &Space, xi: &CVec) -> Result<FockOperator> {
    check_dim(space, xi)?;
    let mut op = FockOperator::zero(space);
    for (col, _, a) in space.basis_iter() {
        for j in 0..space.d {
            if let Some(down) = a.lowered(j) {
                let row = space.global_index(&down).expect("lowered index present");
                op.mat[(row, col)] +=
                    xi[j].conj() * C64::from((space.eps * a.0[j] as f64).sqrt());
            }
        }
    }
    Ok(op)
}

/// `a*(xi)`, linear in `xi`.
pub fn a_dag_general(space: &Space, xi: &CVec) -> Result<FockOperator> {
    Ok(a_general(space, xi)?.adjoint())
}

/// Field operator `Phi(xi) = (a*(xi) + a(xi)) / sqrt(2)`.
pub fn field_phi(space: &Space, xi: &CVec) -> Result<FockOperator> {
    let a = a_general(space, xi)?;
    let mut op = a.adjoint();
    op.mat += &a.mat;
    op.mat /= C64::from(2.0f64.sqrt());
    Ok(op)
}

/// `Pi(xi) = Phi(i xi)`.
pub fn field_pi(space: &Space, xi: &CVec) -> Result<FockOperator> {
    field_phi(space, &(xi * C64::i()))
}

/// Weyl operator `W(xi) = exp(i Phi(xi))`; exactly unitary on the truncated
/// space since the truncated `Phi` is Hermitian.
pub fn weyl(space: &Space, xi: &CVec) -> Result<FockOperator> {
    let phi = field_phi(space, xi)?;
    Ok(FockOperator {
        space: space.clone(),
        mat: expm_i_hermitian(&phi.mat, 1.0),
    })
}

/// Number operator, diagonal with eigenvalue `eps * n` at level `n`.
pub fn number_operator(space: &Space) -> FockOperator {
    let mut op = FockOperator::zero(space);
    for (i, n, _) in space.basis_iter() {
        op.mat[(i, i)] = C64::from(space.eps * n as f64);
    }
    op
}

/// Second quantization `dGamma(A) = sum_{jk} A_{jk} a*(e_j) a(e_k)` of a
/// Hermitian one-particle operator; level-preserving.
pub fn dgamma(space: &Space, a_mat: &CMat) -> Result<FockOperator> {
    if a_mat.nrows() != space.d || a_mat.ncols() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: a_mat.nrows(),
        });
    }
    let dev = (a_mat - a_mat.adjoint()).norm();
    if dev > 1e-12 {
        return Err(FockError::NonHermitianKernel(dev));
    }
    let mut op = FockOperator::zero(space);
    for (col, _, alpha) in space.basis_iter() {
        for k in 0..space.d {
            if alpha.0[k] == 0 {
                continue;
            }
            let low = alpha.lowered(k).unwrap();
            for j in 0..space.d {
                if a_mat[(j, k)] == C64::from(0.0) {
                    continue;
                }
                let target = low.raised(j);
                let row = space.global_index(&target).expect("level-preserving");
                let amp = space.eps
                    * ((alpha.0[k] as f64) * ((low.0[j] + 1) as f64)).sqrt();
                op.mat[(row, col)] += a_mat[(j, k)] * C64::from(amp);
            }
        }
    }
    Ok(op)
}

/// `Gamma(S)`, acting as the symmetric power `S^{vn}` on level `n`.
pub fn gamma_op(space: &Space, s: &CMat) -> Result<FockOperator> {
    if s.nrows() != space.d || s.ncols() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: s.nrows(),
        });
    }
    let mut op = FockOperator::zero(space);
    for n in 0..=space.n_max {
        let block = sym_power(s, n);
        let off = space.offset(n);
        let k = block.nrows();
        op.mat.view_mut((off, off), (k, k)).copy_from(&block);
    }
    Ok(op)
}

/// Cap for the full-tensor oracle (`d^n` coefficients).
pub const ORACLE_TENSOR_CAP: usize = 1 << 20;

/// Symmetrizer oracle: project a full rank-`n` tensor (row-major over words
/// `[0, d)^n`) onto `Sym^n` and express it in the occupation basis.
///
/// Reference implementation for property tests only.
pub fn sym_from_full(d: usize, n: usize, full: &CVec) -> Result<CVec> {
    let size = d.checked_pow(n as u32).filter(|&s| s <= ORACLE_TENSOR_CAP);
    let size = size.ok_or(FockError::CapacityExceeded {
        required: usize::MAX,
        cap: ORACLE_TENSOR_CAP,
        bytes_mb: f64::INFINITY,
    })?;
    if full.len() != size {
        return Err(FockError::DimensionMismatch {
            expected: size,
            got: full.len(),
        });
    }
    let basis = enumerate_level(d, n);
    let idx = crate::comb::index_map(&basis);
    let mut occ = CVec::zeros(basis.len());
    for (w, content) in words(d, n) {
        occ[idx[&content]] += full[w];
    }
    let nf = factorial(n);
    for (i, a) in basis.iter().enumerate() {
        occ[i] *= C64::from((a.factorial() / nf).sqrt());
    }
    Ok(occ)
}

/// Inverse embedding of [`sym_from_full`]: occupation coordinates to the full
/// symmetric tensor.
pub fn full_from_sym(d: usize, n: usize, occ: &CVec) -> Result<CVec> {
    let size = d.pow(n as u32);
    let basis = enumerate_level(d, n);
    if occ.len() != basis.len() {
        return Err(FockError::DimensionMismatch {
            expected: basis.len(),
            got: occ.len(),
        });
    }
    let idx = crate::comb::index_map(&basis);
    let nf = factorial(n);
    let mut full = CVec::zeros(size);
    for (w, content) in words(d, n) {
        let i = idx[&content];
        full[w] = occ[i] * C64::from((content.factorial() / nf).sqrt());
    }
    Ok(full)
}

/// All words of `[0, d)^n` with their occupation content, row-major order.
pub fn words(d: usize, n: usize) -> impl Iterator<Item = (usize, MultiIndex)> {
    let size = d.pow(n as u32);
    (0..size).map(move |w| {
        let mut content = vec![0usize; d];
        let mut rest = w;
        for _ in 0..n {
            content[rest % d] += 1;
            rest /= d;
        }
        (w, MultiIndex(content))
    })
}

fn check_dim(space: &Space, xi: &CVec) -> Result<()> {
    if xi.len() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: xi.len(),
        });
    }
    if xi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(FockError::Invalid("non-finite vector entry".into()));
    }
    Ok(())
}
