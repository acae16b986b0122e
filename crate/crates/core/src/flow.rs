//! Classical Hamiltonian `h(z) = <z, A z> + Q(z)`, the Hartree-type flow
//! `F_t`, and polynomial approximants of `b o F_t` by iterated Poisson
//! brackets with the gauge-rotated interaction.
//!
//! The ODE is integrated in the gauge-rotated frame `w_t = e^{itA} z_t`,
//! which removes the linear part exactly; norm and energy conservation are
//! checked by the callers, never enforced by projection.

use nalgebra::DVector;

use crate::comb::MultiIndex;
use crate::error::{FockError, Result};
use crate::wick::{
    conjugate_free_compound, poisson_bracket_compound, CompoundSymbol, PolynomialSymbol,
};
use crate::{C64, CMat, CVec};

/// `h(z) = <z, A z> + sum_j Q_j(z)` with Hermitian kernels `Q_j` on `Sym^j`,
/// `j = 2..=r`.
#[derive(Debug, Clone)]
pub struct ClassicalHamiltonian {
    pub d: usize,
    pub a_mat: CMat,
    pub q_terms: Vec<PolynomialSymbol>,
    a_vals: DVector<f64>,
    a_vecs: CMat,
    grad_terms: Vec<(MultiIndex, MultiIndex, C64)>,
}

impl ClassicalHamiltonian {
    pub fn new(a_mat: CMat, q_terms: Vec<PolynomialSymbol>) -> Result<Self> {
        let d = a_mat.nrows();
        if a_mat.ncols() != d {
            return Err(FockError::DimensionMismatch {
                expected: d,
                got: a_mat.ncols(),
            });
        }
        let dev = (&a_mat - a_mat.adjoint()).norm();
        if dev > 1e-12 {
            return Err(FockError::NonHermitianKernel(dev));
        }
        for q in &q_terms {
            if q.d != d {
                return Err(FockError::DimensionMismatch { expected: d, got: q.d });
            }
            if q.p != q.q || q.p < 2 {
                return Err(FockError::Invalid(format!(
                    "interaction term must be (j, j)-homogeneous with j >= 2, got ({}, {})",
                    q.p, q.q
                )));
            }
            let qdev = (&q.kernel - q.kernel.adjoint()).norm();
            if qdev > 1e-12 {
                return Err(FockError::NonHermitianKernel(qdev));
            }
        }
        let eig = nalgebra::SymmetricEigen::new(a_mat.clone());
        let grad_terms = q_terms
            .iter()
            .flat_map(|q| q.monomial_coeffs())
            .collect();
        Ok(ClassicalHamiltonian {
            d,
            a_mat,
            q_terms,
            a_vals: eig.eigenvalues,
            a_vecs: eig.eigenvectors,
            grad_terms,
        })
    }

    /// Free Hamiltonian `<z, A z>`.
    pub fn free(a_mat: CMat) -> Result<Self> {
        Self::new(a_mat, Vec::new())
    }

    /// Highest interaction degree `r` (2 when there is no interaction).
    pub fn r(&self) -> usize {
        self.q_terms.iter().map(|q| q.p).max().unwrap_or(2)
    }

    /// `|Q| = max_j |Q_j|_{P_{j,j}}`.
    pub fn norm_q(&self) -> f64 {
        self.q_terms.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// The interaction as a compound symbol.
    pub fn q_symbol(&self) -> CompoundSymbol {
        let mut s = CompoundSymbol::zero(self.d);
        for q in &self.q_terms {
            s.add_term(q.clone());
        }
        s
    }

    pub fn q_value(&self, z: &CVec) -> C64 {
        self.q_terms.iter().map(|q| q.evaluate(z)).sum()
    }

    /// Total energy `h(z)`; real for Hermitian kernels.
    pub fn energy(&self, z: &CVec) -> f64 {
        (z.dotc(&(&self.a_mat * z)) + self.q_value(z)).re
    }

    /// `e^{-itA} z` through the cached eigendecomposition of `A`.
    pub fn rotate(&self, z: &CVec, t: f64) -> CVec {
        let mut w = self.a_vecs.adjoint() * z;
        for k in 0..self.d {
            w[k] *= (-C64::i() * t * self.a_vals[k]).exp();
        }
        &self.a_vecs * w
    }

    /// `d_zbar Q(z)` from the precomputed monomial expansion.
    pub fn grad_q(&self, z: &CVec) -> CVec {
        let mut v = CVec::zeros(self.d);
        for (gamma, beta, c) in &self.grad_terms {
            let zb: C64 = z
                .iter()
                .zip(&beta.0)
                .filter(|(_, &k)| k > 0)
                .map(|(zi, &k)| zi.powu(k as u32))
                .product();
            for j in 0..self.d {
                let gj = gamma.0[j];
                if gj == 0 {
                    continue;
                }
                let mut zg = C64::from(1.0);
                for (i, &k) in gamma.0.iter().enumerate() {
                    let k = if i == j { k - 1 } else { k };
                    if k > 0 {
                        zg *= z[i].conj().powu(k as u32);
                    }
                }
                v[j] += c * C64::from(gj as f64) * zg * zb;
            }
        }
        v
    }
}

/// Standalone form of [`ClassicalHamiltonian::grad_q`].
pub fn grad_q(h: &ClassicalHamiltonian, z: &CVec) -> CVec {
    h.grad_q(z)
}

/// Step-size control for the embedded Runge-Kutta pair.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 0.1,
        }
    }
}

/// A point `z_t = F_t(z_0)` on a flow trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub z: CVec,
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integration of `dy/ds = rhs(s, y)` from `s = 0` to `s = t`.
pub fn integrate(
    rhs: &dyn Fn(f64, &CVec) -> CVec,
    y0: &CVec,
    t: f64,
    cfg: &FlowConfig,
) -> Result<CVec> {
    if t == 0.0 {
        return Ok(y0.clone());
    }
    let dir = t.signum();
    let mut s = 0.0f64;
    let mut y = y0.clone();
    let mut h = (cfg.max_step.min(t.abs() / 4.0)).max(1e-8) * dir;
    let min_step = 1e-14 * t.abs().max(1.0);
    while (t - s) * dir > 0.0 {
        if (s + h - t) * dir > 0.0 {
            h = t - s;
        }
        let mut k: Vec<CVec> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = DP_A[i][j.min(5)];
                if j < 6 && a != 0.0 {
                    yi += kj * C64::from(h * a);
                }
            }
            k.push(rhs(s + DP_C[i] * h, &yi));
        }
        let mut y5 = y.clone();
        let mut err = CVec::zeros(y.len());
        for i in 0..7 {
            if DP_B5[i] != 0.0 {
                y5 += &k[i] * C64::from(h * DP_B5[i]);
            }
            let db = DP_B5[i] - DP_B4[i];
            if db != 0.0 {
                err += &k[i] * C64::from(h * db);
            }
        }
        let scale = cfg.abs_tol + cfg.rel_tol * y.norm().max(y5.norm());
        let e = err.norm() / scale;
        if e <= 1.0 {
            s += h;
            y = y5;
        }
        let factor = if e > 0.0 {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).clamp(-cfg.max_step, cfg.max_step);
        if h.abs() < min_step {
            return Err(FockError::Invalid(format!(
                "step size underflow at s = {s:e}"
            )));
        }
    }
    Ok(y)
}

/// The Hartree-type flow `z_t = F_t(z_0)` solving
/// `i dz/dt = A z + d_zbar Q(z)`, integrated in the rotated frame
/// `w_t = e^{itA} z_t` with `dw/dt = -i e^{itA} (d_zbar Q)(e^{-itA} w)`.
pub fn flow(
    h: &ClassicalHamiltonian,
    z0: &CVec,
    t: f64,
    cfg: &FlowConfig,
) -> Result<TrajectoryPoint> {
    if z0.len() != h.d {
        return Err(FockError::DimensionMismatch {
            expected: h.d,
            got: z0.len(),
        });
    }
    let w = if h.q_terms.is_empty() {
        z0.clone()
    } else {
        let rhs = |s: f64, w: &CVec| -> CVec {
            let z = h.rotate(w, s);
            let g = h.grad_q(&z);
            h.rotate(&g, -s) * (-C64::i())
        };
        integrate(&rhs, z0, t, cfg)?
    };
    Ok(TrajectoryPoint {
        t,
        z: h.rotate(&w, t),
    })
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, order 8.
const GL8_X: [f64; 8] = [
    0.019855071751231884,
    0.101666761293186630,
    0.237233795041835507,
    0.408282678752175098,
    0.591717321247824902,
    0.762766204958164493,
    0.898333238706813370,
    0.980144928248768116,
];
const GL8_W: [f64; 8] = [
    0.050614268145188130,
    0.111190517226687235,
    0.156853322938943644,
    0.181341891689180991,
    0.181341891689180991,
    0.156853322938943644,
    0.111190517226687235,
    0.050614268145188130,
];

/// Hard cap on the approximant order `K`; costs grow geometrically with it.
pub const MAX_APPROX_ORDER: usize = 6;

/// The polynomial approximant `b^K(t, .) = sum_{k=0}^{K-1} b_k(t, .)` of
/// `b o F_t`, with `b_k` the `k`-fold nested first-order Poisson bracket
/// `i^k int_{0 <= t_k <= ... <= t_1 <= t} {Q_{t_k}, {..., {Q_{t_1}, b_t}}}`
/// computed by nested Gauss-Legendre quadrature on the ordered simplex.
pub fn approx_polynomial(
    b: &CompoundSymbol,
    h: &ClassicalHamiltonian,
    t: f64,
    big_k: usize,
) -> Result<CompoundSymbol> {
    if big_k < 1 || big_k > MAX_APPROX_ORDER {
        return Err(FockError::Invalid(format!(
            "approximant order K = {big_k} outside 1..={MAX_APPROX_ORDER}"
        )));
    }
    let b_t = conjugate_free_compound(b, &h.a_mat, t);
    let q_sym = h.q_symbol();
    let mut total = b_t.clone();
    for k in 1..big_k {
        let integral = simplex_bracket(&b_t, &q_sym, h, k, t)?;
        total = total.add(&integral.scaled(C64::i().powu(k as u32)));
    }
    Ok(total.pruned(0.0))
}

fn simplex_bracket(
    inner: &CompoundSymbol,
    q_sym: &CompoundSymbol,
    h: &ClassicalHamiltonian,
    levels: usize,
    upper: f64,
) -> Result<CompoundSymbol> {
    if levels == 0 {
        return Ok(inner.clone());
    }
    let mut acc = CompoundSymbol::zero(inner.d);
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        let s = upper * x;
        let q_s = conjugate_free_compound(q_sym, &h.a_mat, s);
        let bracket = poisson_bracket_compound(&q_s, inner)?;
        let deeper = simplex_bracket(&bracket, q_sym, h, levels - 1, s)?;
        acc = acc.add(&deeper.scaled(C64::from(w * upper)));
    }
    Ok(acc)
}

/// Closed-form remainder bound of the `K`-th approximant on the ball
/// `|z| <= R`: `<R>^{p+q} 2^{(p+q)/(2(r-1))} (p+q) |b| [4 r^3 |Q| <R>^{2(r-1)}
/// |t|]^K`, summed over the homogeneous terms of `b`.
pub fn remainder_bound(
    b: &CompoundSymbol,
    h: &ClassicalHamiltonian,
    radius: f64,
    t: f64,
    big_k: usize,
) -> f64 {
    let r = h.r() as f64;
    let jr = (1.0 + radius * radius).sqrt();
    let bracket = 4.0 * r.powi(3) * h.norm_q() * jr.powf(2.0 * (r - 1.0)) * t.abs();
    b.terms
        .values()
        .map(|term| {
            let deg = (term.p + term.q) as f64;
            if deg == 0.0 {
                return 0.0;
            }
            jr.powf(deg)
                * 2.0f64.powf(deg / (2.0 * (r - 1.0)))
                * deg
                * term.norm()
                * bracket.powi(big_k as i32)
        })
        .sum()
}

/// The convergence time `T_delta = delta / (4 r^3 |Q| <R>^{r-1})` below which
/// the approximant series contracts.
pub fn t_delta(h: &ClassicalHamiltonian, radius: f64, delta: f64) -> f64 {
    let r = h.r() as f64;
    let jr = (1.0 + radius * radius).sqrt();
    delta / (4.0 * r.powi(3) * h.norm_q() * jr.powf(r - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::{random_hermitian_kernel, gaussian_c64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(d: usize, seed: u64) -> ClassicalHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMat::from_fn(d, d, |_, _| gaussian_c64(&mut rng));
        let a = (&g + g.adjoint()) * C64::from(0.5);
        let q = random_hermitian_kernel(d, 2, true, &mut rng);
        ClassicalHamiltonian::new(a, vec![q]).unwrap()
    }

    fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> CVec {
        let z = CVec::from_fn(d, |_, _| gaussian_c64(rng));
        let n = z.norm();
        z / C64::from(n)
    }

    #[test]
    fn grad_matches_finite_difference() {
        let h = random_model(2, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let z = random_unit(2, &mut rng);
        let g = h.grad_q(&z);
        // Treating z and zbar as independent, d_zbar Q is probed by
        // perturbing only the conjugate coordinate in the monomial sum.
        let step = 1e-6;
        for j in 0..2 {
            let mut num = C64::from(0.0);
            for dir in [C64::from(1.0), C64::i()] {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += dir * C64::from(step);
                zm[j] -= dir * C64::from(step);
                let dq = (h.q_value(&zp) - h.q_value(&zm)) / C64::from(2.0 * step);
                // d/dx = d_z + d_zbar, d/dy = i(d_z - d_zbar)
                num += match dir.im == 0.0 {
                    true => dq * C64::from(0.5),
                    false => dq * C64::i() * C64::from(0.5),
                };
            }
            assert!((num - g[j]).norm() < 1e-6, "mode {j}: {num} vs {}", g[j]);
        }
    }

    #[test]
    fn free_flow_is_rotation() {
        let h = ClassicalHamiltonian::free(CMat::from_diagonal_element(2, 2, C64::from(1.5)))
            .unwrap();
        let z0 = CVec::from_vec(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7)]);
        let p = flow(&h, &z0, 0.8, &FlowConfig::default()).unwrap();
        let expect = z0 * (-C64::i() * 1.5 * 0.8).exp();
        assert!((p.z - expect).norm() < 1e-12);
    }

    #[test]
    fn norm_energy_and_gauge_conservation() {
        let h = random_model(2, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let cfg = FlowConfig::default();
        for _ in 0..4 {
            let z0 = random_unit(2, &mut rng);
            let p = flow(&h, &z0, 1.0, &cfg).unwrap();
            assert!((p.z.norm() - 1.0).abs() < 1e-8);
            assert!((h.energy(&p.z) - h.energy(&z0)).abs() < 1e-8 * (1.0 + h.energy(&z0).abs()));
            let theta = C64::new(0.0, 0.9).exp();
            let rotated = flow(&h, &(&z0 * theta), 1.0, &cfg).unwrap();
            assert!((rotated.z - &p.z * theta).norm() < 1e-8);
        }
    }

    #[test]
    fn semigroup_property() {
        let h = random_model(2, 41);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfg = FlowConfig::default();
        let z0 = random_unit(2, &mut rng);
        let (t, s) = (0.37, 0.22);
        let direct = flow(&h, &z0, t + s, &cfg).unwrap();
        let mid = flow(&h, &z0, s, &cfg).unwrap();
        let chained = flow(&h, &mid.z, t, &cfg).unwrap();
        assert!((direct.z - chained.z).norm() < 1e-7);
    }

    #[test]
    fn first_approximant_is_rotated_symbol() {
        let h = random_model(2, 51);
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let b = CompoundSymbol::from_term(random_hermitian_kernel(2, 1, false, &mut rng));
        let t = 0.3;
        let approx = approx_polynomial(&b, &h, t, 1).unwrap();
        let direct = conjugate_free_compound(&b, &h.a_mat, t);
        let z = random_unit(2, &mut rng);
        assert!((approx.evaluate(&z) - direct.evaluate(&z)).norm() < 1e-12);
    }

    #[test]
    fn time_independent_first_correction() {
        // A = 0, so Q_s = Q and b_1(t) = i t {Q, b}.
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let q = random_hermitian_kernel(2, 2, true, &mut rng);
        let h = ClassicalHamiltonian::new(CMat::zeros(2, 2), vec![q.clone()]).unwrap();
        let b = CompoundSymbol::from_term(random_hermitian_kernel(2, 1, false, &mut rng));
        let t = 0.45;
        let approx = approx_polynomial(&b, &h, t, 2).unwrap();
        let bracket = poisson_bracket_compound(&CompoundSymbol::from_term(q), &b).unwrap();
        let expect = b.add(&bracket.scaled(C64::i() * t));
        let z = random_unit(2, &mut rng);
        assert!((approx.evaluate(&z) - expect.evaluate(&z)).norm() < 1e-10);
    }

    #[test]
    fn approximants_converge_to_flow_within_bound() {
        let h = random_model(2, 71);
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let b = CompoundSymbol::from_term(random_hermitian_kernel(2, 1, false, &mut rng));
        let t = 0.5 * t_delta(&h, 1.0, 0.5);
        let cfg = FlowConfig::default();
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let approx = approx_polynomial(&b, &h, t, k).unwrap();
            let mut worst = 0.0f64;
            for _ in 0..12 {
                let z = random_unit(2, &mut rng);
                let zt = flow(&h, &z, t, &cfg).unwrap().z;
                let err = (b.evaluate(&zt) - approx.evaluate(&z)).norm();
                worst = worst.max(err);
            }
            assert!(
                worst <= remainder_bound(&b, &h, 1.0, t, k),
                "K = {k}: {worst:e} above bound"
            );
            assert!(worst <= prev * 1.5, "K = {k} regressed");
            prev = worst;
        }
    }
}
