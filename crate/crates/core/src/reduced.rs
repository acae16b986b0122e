//! Reduced density matrices `gamma^{(p)}` from states (via Wick moments)
//! and their asymptotic counterparts from Wigner measures, with the
//! trace-norm comparison used on the BBGKY side.
//!
//! Assembly goes through moments of matrix-unit symbols, which is uniform
//! across mixed-level states; a literal partial-trace oracle exists in the
//! tests for single-level states.

use crate::comb::{enumerate_level, level_dim};
use crate::error::{FockError, Result};
use crate::states::DensityMatrix;
use crate::wick::{wick_quantize, CompoundSymbol, PolynomialSymbol};
use crate::wigner::{integrate_symbol, moment, WignerMeasure};
use crate::{C64, CMat};

/// The `p`-particle reduced matrix on `Sym^p(C^d)` in the occupation basis.
#[derive(Debug, Clone)]
pub struct ReducedMatrix {
    pub p: usize,
    pub mat: CMat,
    /// Set when the normalizing moment vanishes and the reduced matrix is
    /// `gamma^{(p)} = 0`.
    pub zero: bool,
}

impl ReducedMatrix {
    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Hermiticity / positivity / trace defect (0 for the zero-flag case).
    pub fn validate(&self) -> f64 {
        if self.zero {
            return self.mat.norm();
        }
        let herm = (&self.mat - self.mat.adjoint()).norm();
        let eig = nalgebra::SymmetricEigen::new((&self.mat + self.mat.adjoint()) * C64::from(0.5));
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        herm.max((-min_eig).max(0.0))
            .max((self.trace() - C64::from(1.0)).norm())
    }
}

/// `gamma^{(p)}` of a state: entries are normalized Wick moments of
/// matrix-unit symbols, `<e^{vb}, gamma^{(p)} e^{vg}> = Tr[rho] /
/// Tr[rho (|z|^{2p})^{Wick}] Tr[rho (unit_{g b})^{Wick}]`.
pub fn reduced_matrix(rho: &DensityMatrix, p: usize) -> Result<ReducedMatrix> {
    let space = &rho.space;
    let d = space.d;
    let k = level_dim(d, p);
    if p == 0 {
        return Ok(ReducedMatrix {
            p,
            mat: CMat::from_element(1, 1, C64::from(1.0)),
            zero: false,
        });
    }
    let norm_op = wick_quantize(&PolynomialSymbol::norm_power(d, p), space)?;
    let denom = rho.expectation(&norm_op);
    if denom.norm() < 1e-14 {
        return Ok(ReducedMatrix {
            p,
            mat: CMat::zeros(k, k),
            zero: true,
        });
    }
    let scale = rho.trace() / denom;
    let basis = enumerate_level(d, p);
    let mut mat = CMat::zeros(k, k);
    for (ib, beta) in basis.iter().enumerate() {
        for (ig, gamma) in basis.iter().enumerate() {
            let unit = PolynomialSymbol::matrix_unit(d, gamma, beta);
            let op = wick_quantize(&unit, space)?;
            mat[(ib, ig)] = scale * rho.expectation(&op);
        }
    }
    Ok(ReducedMatrix { p, mat, zero: false })
}

/// Asymptotic `gamma^{(p)}_0 = (int |z|^{2p} dmu)^{-1} int |z^{tp}><z^{tp}|
/// dmu(z)`, entrywise by the measure's exact integration rules.
pub fn asymptotic_reduced(mu: &WignerMeasure, p: usize) -> Result<ReducedMatrix> {
    let d = mu.dim();
    let k = level_dim(d, p);
    if p == 0 {
        return Ok(ReducedMatrix {
            p,
            mat: CMat::from_element(1, 1, C64::from(1.0)),
            zero: false,
        });
    }
    let m_p = moment(mu, p)?;
    if m_p.abs() < 1e-14 {
        return Err(FockError::ZeroNormalization(
            "measure moment of |z|^{2p} vanished",
        ));
    }
    let basis = enumerate_level(d, p);
    let mut mat = CMat::zeros(k, k);
    for (ib, beta) in basis.iter().enumerate() {
        for (ig, gamma) in basis.iter().enumerate() {
            // The matrix-unit symbol evaluates exactly to
            // <e^{vb}, z^{tp}><z^{tp}, e^{vg}>.
            let unit = CompoundSymbol::from_term(PolynomialSymbol::matrix_unit(d, gamma, beta));
            mat[(ib, ig)] = integrate_symbol(mu, &unit)? / C64::from(m_p);
        }
    }
    Ok(ReducedMatrix { p, mat, zero: false })
}

/// Trace distance `|g1 - g2|_1`, the sum of singular values of the
/// difference.
pub fn trace_distance(g1: &ReducedMatrix, g2: &ReducedMatrix) -> Result<f64> {
    if g1.mat.nrows() != g2.mat.nrows() {
        return Err(FockError::DimensionMismatch {
            expected: g1.mat.nrows(),
            got: g2.mat.nrows(),
        });
    }
    let diff = &g1.mat - &g2.mat;
    Ok(diff.svd(false, false).singular_values.iter().sum())
}
