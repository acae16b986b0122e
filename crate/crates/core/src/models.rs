//! Concrete model builders: seeded generic two-body interactions, the
//! lowest-Landau-level (LLL) Bargmann truncation, and the bosonized
//! Hartree-von Neumann system on a periodic grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comb::{enumerate_level, factorial};
use crate::error::{FockError, Result};
use crate::flow::{integrate, ClassicalHamiltonian, FlowConfig};
use crate::fock::{sym_from_full, Space};
use crate::qdyn::{build_hamiltonian, QuantumHamiltonian};
use crate::wick::{gaussian_c64, random_hermitian_kernel, PolynomialSymbol};
use crate::{C64, CMat, CVec};

/// Generic two-body model: seeded Gaussian-Hermitian `A` and a normalized
/// Hermitian pair kernel.
#[derive(Debug, Clone)]
pub struct TwoBodyModel {
    pub d: usize,
    pub seed: u64,
    pub a_mat: CMat,
    pub q2: PolynomialSymbol,
}

impl TwoBodyModel {
    pub fn new(d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMat::from_fn(d, d, |_, _| gaussian_c64(&mut rng));
        let a_mat = (&g + g.adjoint()) * C64::from(0.5);
        let q2 = random_hermitian_kernel(d, 2, true, &mut rng);
        TwoBodyModel { d, seed, a_mat, q2 }
    }

    pub fn classical(&self) -> Result<ClassicalHamiltonian> {
        ClassicalHamiltonian::new(self.a_mat.clone(), vec![self.q2.clone()])
    }

    pub fn quantum(&self, space: &Space) -> Result<QuantumHamiltonian> {
        build_hamiltonian(&self.a_mat, std::slice::from_ref(&self.q2), space)
    }
}

/// Kernel of the LLL interaction `Q_p(f) = int |u|^{2p} L(dzeta)` in the
/// orthonormal monomial basis `e_k = zeta^k / sqrt(h^k k!)`, `k < M`.
///
/// Between occupation multi-indices `a'` and `a` on `Sym^p` the closed form
/// is `delta_{J', J} pi h J! p! / (p^{J+1} sqrt(a'! a!) sqrt(w!(a') w!(a)))`
/// with `J = sum_k k a_k` the total angular momentum and
/// `w!(a) = prod_k (k!)^{a_k}`.
pub fn lll_kernel(p: usize, h_param: f64, m_trunc: usize) -> Result<PolynomialSymbol> {
    if !(h_param > 0.0) || m_trunc == 0 || p < 2 {
        return Err(FockError::Invalid(
            "LLL kernel needs h > 0, M >= 1, p >= 2".into(),
        ));
    }
    if p * (m_trunc - 1) > 160 {
        return Err(FockError::CapacityExceeded {
            required: p * (m_trunc - 1),
            cap: 160,
            bytes_mb: 0.0,
        });
    }
    let basis = enumerate_level(m_trunc, p);
    let k = basis.len();
    let pf = factorial(p);
    let mut kernel = CMat::zeros(k, k);
    for (ia, a) in basis.iter().enumerate() {
        let j_a: usize = a.0.iter().enumerate().map(|(m, &c)| m * c).sum();
        for (ib, b) in basis.iter().enumerate() {
            let j_b: usize = b.0.iter().enumerate().map(|(m, &c)| m * c).sum();
            if j_a != j_b {
                continue;
            }
            let wfac: f64 = a
                .0
                .iter()
                .enumerate()
                .chain(b.0.iter().enumerate())
                .map(|(m, &c)| factorial(m).powi(c as i32))
                .product();
            let val = std::f64::consts::PI * h_param * factorial(j_a) * pf
                / ((p as f64).powi(j_a as i32 + 1)
                    * (a.factorial() * b.factorial()).sqrt()
                    * wfac.sqrt());
            kernel[(ia, ib)] = C64::from(val);
        }
    }
    PolynomialSymbol::new(m_trunc, p, p, kernel)
}

/// LLL model: magnetic parameter `h`, monomial truncation `M`, and
/// coefficients `alpha_p >= 0` for `p = 2..`.
#[derive(Debug, Clone)]
pub struct LLLModel {
    pub h_param: f64,
    pub m_trunc: usize,
    pub alphas: Vec<(usize, f64)>,
}

impl LLLModel {
    pub fn classical(&self) -> Result<ClassicalHamiltonian> {
        let mut terms = Vec::new();
        for &(p, alpha) in &self.alphas {
            if alpha < 0.0 {
                return Err(FockError::Invalid("LLL alphas must be >= 0".into()));
            }
            terms.push(lll_kernel(p, self.h_param, self.m_trunc)?.scaled(C64::from(alpha)));
        }
        // Free part: the angular-momentum multiplier h k on mode k.
        let a_mat = CMat::from_fn(self.m_trunc, self.m_trunc, |i, j| {
            if i == j {
                C64::from(self.h_param * i as f64)
            } else {
                C64::from(0.0)
            }
        });
        ClassicalHamiltonian::new(a_mat, terms)
    }
}

/// Bosonized Hartree-von Neumann system: phase space `Z = C^{m x m}` with
/// the Hilbert-Schmidt inner product, flattened column-major to `C^{m^2}`.
#[derive(Debug, Clone)]
pub struct HvNModel {
    pub m: usize,
    pub a_mat: CMat,
    /// `V` sampled at periodic grid distances `0..m`.
    pub v_table: Vec<f64>,
    pub dx: f64,
}

impl HvNModel {
    pub fn new(m: usize, a_mat: CMat, v_table: Vec<f64>, dx: f64) -> Result<Self> {
        if a_mat.nrows() != m || a_mat.ncols() != m || v_table.len() != m {
            return Err(FockError::DimensionMismatch {
                expected: m,
                got: a_mat.nrows().max(v_table.len()),
            });
        }
        let dev = (&a_mat - a_mat.adjoint()).norm();
        if dev > 1e-12 {
            return Err(FockError::NonHermitianKernel(dev));
        }
        Ok(HvNModel { m, a_mat, v_table, dx })
    }

    /// Seeded instance with Gaussian-Hermitian `A` and a smooth even
    /// potential on the periodic grid.
    pub fn seeded(m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let a_mat = (&g + g.adjoint()) * C64::from(0.5);
        let v_table = (0..m)
            .map(|k| {
                let frac = periodic_distance(k, 0, m) as f64 / m as f64;
                (-(4.0 * frac).powi(2)).exp()
            })
            .collect();
        HvNModel { m, a_mat, v_table, dx: 1.0 }
    }

    /// `V(x_i - x_j)` through the periodic distance table; even by
    /// construction.
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v_table[periodic_distance(i, j, self.m)]
    }

    /// `(V * n)_i = sum_j V(x_i - x_j) n_j dx`.
    fn convolve(&self, n: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| self.v_at(i, j) * n[j] * self.dx)
                    .sum()
            })
            .collect()
    }
}

fn periodic_distance(i: usize, j: usize, m: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(m - d)
}

/// Generator of the Hartree-von Neumann equation: `i d omega/dt =
/// rhs(omega) = [A, omega] + (V * n^1) omega - omega (V * n^2)` with
/// `n^1 = diag(omega omega*)`, `n^2 = diag(omega* omega)`.
pub fn hvn_flow_rhs(model: &HvNModel, omega: &CMat) -> CMat {
    let m = model.m;
    let n1: Vec<f64> = (0..m)
        .map(|i| omega.row(i).iter().map(|c| c.norm_sqr()).sum())
        .collect();
    let n2: Vec<f64> = (0..m)
        .map(|j| omega.column(j).iter().map(|c| c.norm_sqr()).sum())
        .collect();
    let v1 = model.convolve(&n1);
    let v2 = model.convolve(&n2);
    let mut rhs = &model.a_mat * omega - omega * &model.a_mat;
    for i in 0..m {
        for j in 0..m {
            rhs[(i, j)] += C64::from(v1[i] - v2[j]) * omega[(i, j)];
        }
    }
    rhs
}

/// Integrate the Hartree-von Neumann flow `F_t(omega_0)`.
pub fn hvn_flow(model: &HvNModel, omega0: &CMat, t: f64, cfg: &FlowConfig) -> Result<CMat> {
    let m = model.m;
    let y0 = flatten(omega0);
    let rhs = |_s: f64, y: &CVec| -> CVec {
        let omega = unflatten(y, m);
        flatten(&(hvn_flow_rhs(model, &omega) * (-C64::i())))
    };
    let y = integrate(&rhs, &y0, t, cfg)?;
    Ok(unflatten(&y, m))
}

pub fn flatten(omega: &CMat) -> CVec {
    CVec::from_vec(omega.as_slice().to_vec())
}

pub fn unflatten(y: &CVec, m: usize) -> CMat {
    CMat::from_column_slice(m, m, y.as_slice())
}

/// The bosonized classical Hamiltonian on `C^{m^2}`: free part the
/// Liouvillian `L_A omega = [A, omega]` and pair kernel the diagonal
/// multiplier `(dx/2) (V(x_1 - x_2) - V(y_1 - y_2))` on `Sym^2(C^{m^2})`.
pub fn hvn_bosonize(model: &HvNModel) -> Result<ClassicalHamiltonian> {
    let m = model.m;
    let d = m * m;
    // vec([A, X]) = (I (x) A - A^T (x) I) vec(X) for column-major vec.
    let mut liouville = CMat::zeros(d, d);
    for col in 0..m {
        for r in 0..m {
            for c in 0..m {
                liouville[(col * m + r, col * m + c)] += model.a_mat[(r, c)];
            }
        }
    }
    for c1 in 0..m {
        for c2 in 0..m {
            for r in 0..m {
                liouville[(c2 * m + r, c1 * m + r)] -= model.a_mat[(c1, c2)];
            }
        }
    }
    let basis = enumerate_level(d, 2);
    let mut kernel = CMat::zeros(basis.len(), basis.len());
    for (i, alpha) in basis.iter().enumerate() {
        let modes: Vec<usize> = alpha
            .0
            .iter()
            .enumerate()
            .flat_map(|(mode, &c)| std::iter::repeat(mode).take(c))
            .collect();
        let (mu, nu) = (modes[0], modes[1]);
        let (x1, y1) = (mu % m, mu / m);
        let (x2, y2) = (nu % m, nu / m);
        let w = 0.5 * model.dx * (model.v_at(x1, x2) - model.v_at(y1, y2));
        kernel[(i, i)] = C64::from(w);
    }
    let q2 = PolynomialSymbol::new(d, 2, 2, kernel)?;
    ClassicalHamiltonian::new(liouville, vec![q2])
}

/// The `P_{k,k}` observable symbol `b_B(omega) = <omega^{tk}, (B (x) I)
/// omega^{tk}>` for an operator `B` on `(C^m)^{tk}` acting on the `x`
/// (left) grid slots.
pub fn hvn_observable(model: &HvNModel, b_on_k: &CMat, k: usize) -> Result<PolynomialSymbol> {
    let m = model.m;
    let d = m * m;
    let mk = m.pow(k as u32);
    if b_on_k.nrows() != mk || b_on_k.ncols() != mk {
        return Err(FockError::DimensionMismatch {
            expected: mk,
            got: b_on_k.nrows(),
        });
    }
    let size = d.checked_pow(k as u32).filter(|&s| s <= crate::fock::ORACLE_TENSOR_CAP);
    if size.is_none() {
        return Err(FockError::CapacityExceeded {
            required: usize::MAX,
            cap: crate::fock::ORACLE_TENSOR_CAP,
            bytes_mb: f64::INFINITY,
        });
    }
    // Build the kernel on Sym^k(C^d) by symmetrizing the full-tensor action
    // of B (x) I: a mode of C^d is a pair (x, y) = (mode % m, mode / m); B
    // permutes only the x parts.
    let basis = enumerate_level(d, k);
    let mut kernel = CMat::zeros(basis.len(), basis.len());
    for (col, _alpha) in basis.iter().enumerate() {
        let mut occ = CVec::zeros(basis.len());
        occ[col] = C64::from(1.0);
        let full = crate::fock::full_from_sym(d, k, &occ)?;
        // Apply B (x) I slotwise on the x digits.
        let mut out = CVec::zeros(full.len());
        for (w, coeff) in full.iter().enumerate() {
            if *coeff == C64::from(0.0) {
                continue;
            }
            // Decompose the word into x and y digit strings.
            let mut rest = w;
            let mut xs = vec![0usize; k];
            let mut ys = vec![0usize; k];
            for slot in 0..k {
                let mode = rest % d;
                rest /= d;
                xs[slot] = mode % m;
                ys[slot] = mode / m;
            }
            let x_in: usize = xs.iter().rev().fold(0, |acc, &x| acc * m + x);
            for x_out in 0..mk {
                let amp = b_on_k[(x_out, x_in)];
                if amp == C64::from(0.0) {
                    continue;
                }
                let mut digits = x_out;
                let mut word = 0usize;
                let mut stride = 1usize;
                for slot in 0..k {
                    let x = digits % m;
                    digits /= m;
                    word += (ys[slot] * m + x) * stride;
                    stride *= d;
                }
                out[word] += amp * coeff;
            }
        }
        let occ_out = sym_from_full(d, k, &out)?;
        kernel.set_column(col, &occ_out);
    }
    PolynomialSymbol::new(d, k, k, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner;

    #[test]
    fn lll_p2_ground_element_matches_quadrature_oracle() {
        let h = 0.7;
        let q = lll_kernel(2, h, 3).unwrap();
        let basis = enumerate_level(3, 2);
        let ground = basis.iter().position(|a| a.0 == vec![2, 0, 0]).unwrap();
        let expect = std::f64::consts::PI * h / 2.0;
        assert!((q.kernel[(ground, ground)] - C64::from(expect)).norm() < 1e-12);

        // Full quadratic-form oracle: Q_2(f) = int |f|^4 e^{-2 |zeta|^2 / h}
        // by Cartesian quadrature, against the kernel evaluation.
        let coeffs = CVec::from_vec(vec![
            C64::new(0.6, -0.2),
            C64::new(-0.3, 0.4),
            C64::new(0.2, 0.1),
        ]);
        let direct = q.evaluate(&coeffs).re;
        let n = 600;
        let r_max = (8.0 * h / 2.0f64).sqrt().max(3.0);
        let step = 2.0 * r_max / n as f64;
        let mut oracle = 0.0f64;
        for ix in 0..n {
            let x = -r_max + (ix as f64 + 0.5) * step;
            for iy in 0..n {
                let y = -r_max + (iy as f64 + 0.5) * step;
                let zeta = C64::new(x, y);
                let mut f = C64::from(0.0);
                for (kk, c) in coeffs.iter().enumerate() {
                    f += c * zeta.powu(kk as u32)
                        / C64::from((h.powi(kk as i32) * factorial(kk)).sqrt());
                }
                oracle += f.norm_sqr().powi(2) * (-2.0 * (x * x + y * y) / h).exp();
            }
        }
        oracle *= step * step;
        assert!(
            (direct - oracle).abs() < 1e-4 * oracle,
            "kernel {direct} vs quadrature {oracle}"
        );
    }

    #[test]
    fn lll_kernel_structure() {
        let q = lll_kernel(2, 0.5, 4).unwrap();
        let basis = enumerate_level(4, 2);
        for (i, a) in basis.iter().enumerate() {
            let ja: usize = a.0.iter().enumerate().map(|(m, &c)| m * c).sum();
            for (j, b) in basis.iter().enumerate() {
                let jb: usize = b.0.iter().enumerate().map(|(m, &c)| m * c).sum();
                if ja != jb {
                    assert_eq!(q.kernel[(i, j)], C64::from(0.0));
                }
            }
        }
        assert!((q.kernel.clone() - q.kernel.adjoint()).norm() < 1e-14);
        let eig = nalgebra::SymmetricEigen::new(q.kernel.clone());
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn lll_galerkin_rhs_matches_grad_q() {
        let model = LLLModel {
            h_param: 0.6,
            m_trunc: 3,
            alphas: vec![(2, 0.8)],
        };
        let h = model.classical().unwrap();
        let z = CVec::from_vec(vec![
            C64::new(0.4, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(0.3, -0.3),
        ]);
        // (d_zbar Q)_j = 2 <e_j v z, Qt_2 z v z> for the quadratic kernel;
        // verify against the generic monomial gradient.
        let g = h.grad_q(&z);
        // Finite-difference referee on the real/imaginary parts.
        let step = 1e-6;
        for j in 0..3 {
            let mut dq = C64::from(0.0);
            for dir in [C64::from(1.0), C64::i()] {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += dir * C64::from(step);
                zm[j] -= dir * C64::from(step);
                let diff = (h.q_value(&zp) - h.q_value(&zm)).re / (2.0 * step);
                dq += if dir.im == 0.0 {
                    C64::from(0.5 * diff)
                } else {
                    C64::i() * C64::from(0.5 * diff)
                };
            }
            assert!((dq - g[j]).norm() < 1e-5, "mode {j}");
        }
    }

    #[test]
    fn hvn_rhs_reduces_to_commutator_without_potential() {
        let m = 3;
        let mut model = HvNModel::seeded(m, 5);
        model.v_table = vec![0.0; m];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let rhs = hvn_flow_rhs(&model, &omega);
        let comm = &model.a_mat * &omega - &omega * &model.a_mat;
        assert!((rhs - comm).norm() < 1e-13);
    }

    #[test]
    fn hvn_flow_preserves_star_symmetry_and_norm() {
        let m = 3;
        let model = HvNModel::seeded(m, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let omega0 = (&g + g.adjoint()) * C64::from(0.5);
        let cfg = FlowConfig::default();
        let t = 0.4;
        let f_omega = hvn_flow(&model, &omega0, t, &cfg).unwrap();
        let f_adj = hvn_flow(&model, &omega0.adjoint(), t, &cfg).unwrap();
        assert!((f_adj - f_omega.adjoint()).norm() < 1e-8);
        assert!((f_omega.norm() - omega0.norm()).abs() < 1e-8);
    }

    #[test]
    fn hvn_density_solves_hartree_von_neumann() {
        let m = 3;
        let model = HvNModel::seeded(m, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        // omega_0 = sqrt(rho_0) Hermitian PSD.
        let omega0 = {
            let herm = (&g + g.adjoint()) * C64::from(0.5);
            let eig = nalgebra::SymmetricEigen::new(herm);
            let mut core = CMat::zeros(m, m);
            for i in 0..m {
                core[(i, i)] = C64::from(eig.eigenvalues[i].abs().sqrt());
            }
            &eig.eigenvectors * core * eig.eigenvectors.adjoint()
        };
        let cfg = FlowConfig::default();
        let t = 0.3;
        let omega_t = hvn_flow(&model, &omega0, t, &cfg).unwrap();
        let rho_t = &omega_t * omega_t.adjoint();
        // Residual of i d rho/dt = [A + diag(V * n_rho), rho] by central
        // difference in t.
        let dt = 1e-5;
        let rho_p = {
            let o = hvn_flow(&model, &omega0, t + dt, &cfg).unwrap();
            &o * o.adjoint()
        };
        let rho_m = {
            let o = hvn_flow(&model, &omega0, t - dt, &cfg).unwrap();
            &o * o.adjoint()
        };
        let drho = (rho_p - rho_m) * C64::from(1.0 / (2.0 * dt));
        let n_rho: Vec<f64> = (0..m).map(|i| rho_t[(i, i)].re).collect();
        let v_eff = model.convolve(&n_rho);
        let mut gen = model.a_mat.clone();
        for i in 0..m {
            gen[(i, i)] += C64::from(v_eff[i]);
        }
        let commutator = &gen * &rho_t - &rho_t * &gen;
        let residual = (drho * C64::i() - commutator).norm();
        assert!(residual < 1e-6, "residual {residual:e}");
    }

    #[test]
    fn hvn_bosonized_gradient_matches_direct_rhs() {
        let m = 3;
        let model = HvNModel::seeded(m, 11);
        let h = hvn_bosonize(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let omega = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let y = flatten(&omega);
        // Full rhs: A-part + interaction gradient must equal the direct
        // Hartree-von Neumann generator.
        let linear = unflatten(&hvn_liouville_apply(&h, &y), m);
        let nonlinear = unflatten(&h.grad_q(&y), m);
        let direct = hvn_flow_rhs(&model, &omega);
        assert!(((linear + nonlinear) - direct).norm() < 1e-10);
    }

    fn hvn_liouville_apply(h: &ClassicalHamiltonian, y: &CVec) -> CVec {
        &h.a_mat * y
    }

    #[test]
    fn hvn_observable_identity_and_rank_one() {
        let m = 2;
        let model = HvNModel::seeded(m, 13);
        let ident = hvn_observable(&model, &CMat::identity(m, m), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let omega = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let y = flatten(&omega);
        let got = ident.evaluate(&y);
        assert!((got - C64::from(omega.norm_squared())).norm() < 1e-12);

        let b = CMat::from_fn(m, m, |_, _| gaussian_c64(&mut rng));
        let b = (&b + b.adjoint()) * C64::from(0.5);
        let sym = hvn_observable(&model, &b, 1).unwrap();
        let direct = (&b * &omega * omega.adjoint()).trace();
        assert!((sym.evaluate(&y) - direct).norm() < 1e-12);
    }

    #[test]
    fn two_body_model_integrates_with_measures() {
        let model = TwoBodyModel::new(2, 42);
        let h = model.classical().unwrap();
        let phi = {
            let v = CVec::from_vec(vec![C64::new(0.6, 0.2), C64::new(-0.3, 0.4)]);
            let n = v.norm();
            v / C64::from(n)
        };
        let mu = wigner::WignerMeasure::CircleDirac { phi };
        let moved = wigner::pushforward(&mu, &h, 0.3).unwrap();
        assert!((wigner::moment(&moved, 1).unwrap() - 1.0).abs() < 1e-8);
    }
}
