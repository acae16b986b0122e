//! Mean-field quantum Hamiltonian `H = dGamma(A) + Q^{Wick}`, its unitary
//! evolution at time scale `t / eps`, interaction picture, expectations,
//! characteristic functions, and spectral functions of Wick observables.
//!
//! `H` commutes with the number operator because every interaction term is
//! `(j, j)`-homogeneous, so the propagator is assembled per level from small
//! Hermitian eigendecompositions and is exactly unitary.

use crate::error::{FockError, Result};
use crate::fock::{apply_spectral, dgamma, expm_i_hermitian, weyl, FockOperator, Space};
use crate::states::DensityMatrix;
use crate::wick::{wick_quantize, CompoundSymbol, PolynomialSymbol};
use crate::{C64, CMat, CVec};

/// Assembled quantum Hamiltonian with its number-conserving block structure.
#[derive(Debug, Clone)]
pub struct QuantumHamiltonian {
    pub space: Space,
    pub a_mat: CMat,
    pub q: CompoundSymbol,
    pub h_op: FockOperator,
}

/// `H = dGamma(A) + sum_j Q_j^{Wick}` with Hermitian `(j, j)` kernels.
pub fn build_hamiltonian(
    a_mat: &CMat,
    q_terms: &[PolynomialSymbol],
    space: &Space,
) -> Result<QuantumHamiltonian> {
    let mut h_op = dgamma(space, a_mat)?;
    let mut q = CompoundSymbol::zero(space.d);
    for term in q_terms {
        if term.p != term.q {
            return Err(FockError::Invalid(format!(
                "interaction term must be (j, j)-homogeneous, got ({}, {})",
                term.p, term.q
            )));
        }
        let dev = (&term.kernel - term.kernel.adjoint()).norm();
        if dev > 1e-12 {
            return Err(FockError::NonHermitianKernel(dev));
        }
        h_op.mat += wick_quantize(term, space)?.mat;
        q.add_term(term.clone());
    }
    let dev = h_op.hermitian_deviation();
    if dev > 1e-12 {
        return Err(FockError::NonHermitianKernel(dev));
    }
    Ok(QuantumHamiltonian {
        space: space.clone(),
        a_mat: a_mat.clone(),
        q,
        h_op,
    })
}

/// The propagator `exp(-i (t / eps) H)`, assembled level by level.
pub fn propagator(h: &QuantumHamiltonian, t: f64) -> FockOperator {
    let space = &h.space;
    let mut u = FockOperator::zero(space);
    for n in 0..=space.n_max {
        let off = space.offset(n);
        let k = space.level(n).len();
        let block = h.h_op.mat.view((off, off), (k, k)).into_owned();
        let ub = expm_i_hermitian(&block, -t / space.eps);
        u.mat.view_mut((off, off), (k, k)).copy_from(&ub);
    }
    u
}

/// `rho(t) = e^{-i t H / eps} rho e^{i t H / eps}`.
pub fn evolve(rho: &DensityMatrix, h: &QuantumHamiltonian, t: f64) -> DensityMatrix {
    let u = propagator(h, t);
    DensityMatrix {
        space: rho.space.clone(),
        mat: &u.mat * &rho.mat * u.mat.adjoint(),
        trunc_deficit: rho.trunc_deficit,
    }
}

/// Interaction picture `rho~(t) = e^{i t dGamma(A)/eps} rho(t)
/// e^{-i t dGamma(A)/eps}`.
pub fn interaction_picture(
    rho: &DensityMatrix,
    h: &QuantumHamiltonian,
    t: f64,
) -> Result<DensityMatrix> {
    let evolved = evolve(rho, h, t);
    let d_op = dgamma(&h.space, &h.a_mat)?;
    let rot = expm_i_hermitian(&d_op.mat, t / h.space.eps);
    Ok(DensityMatrix {
        space: evolved.space.clone(),
        mat: &rot * &evolved.mat * rot.adjoint(),
        trunc_deficit: evolved.trunc_deficit,
    })
}

/// `Tr[rho O]`.
pub fn expectation(rho: &DensityMatrix, op: &FockOperator) -> C64 {
    rho.expectation(op)
}

/// `Tr[rho W(sqrt(2) pi xi)]`, the quantum characteristic function.
pub fn characteristic_fn(rho: &DensityMatrix, xi: &CVec) -> Result<C64> {
    let w = weyl(
        &rho.space,
        &(xi * C64::from(2.0f64.sqrt() * std::f64::consts::PI)),
    )?;
    Ok(rho.expectation(&w))
}

/// `Tr[rho f(b^{Wick})]` for a Hermitian-quantizing symbol, by spectral
/// calculus.
pub fn function_of_wick(
    rho: &DensityMatrix,
    b: &PolynomialSymbol,
    f: impl Fn(f64) -> C64,
) -> Result<C64> {
    if b.p != b.q {
        return Err(FockError::Invalid(
            "function_of_wick needs a (p, p)-homogeneous symbol".into(),
        ));
    }
    let op = wick_quantize(b, &rho.space)?;
    let dev = op.hermitian_deviation();
    if dev > 1e-10 {
        return Err(FockError::NonHermitianKernel(dev));
    }
    let fo = apply_spectral(&op.mat, f);
    Ok((&rho.mat * fo).trace())
}
