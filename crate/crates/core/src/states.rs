//! Factories for the state families: coherent, Hermite, tensor, Gibbs,
//! and number-localized cutoffs.
//!
//! Families with unbounded number support (coherent, Gibbs) enforce an
//! explicit tail-weight budget against the truncation and record the actual
//! deficit on the state instead of silently renormalizing it away.

use crate::comb::{factorial, MultiIndex};
use crate::error::{FockError, Result};
use crate::fock::{build_space, weyl, FockOperator, FockVector, Space};
use crate::wigner::WignerMeasure;
use crate::{C64, CMat, CVec};

/// Default tail-weight budget for truncating unbounded-support families.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-10;

/// A normal state on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub space: Space,
    pub mat: CMat,
    /// Probability mass of the ideal state beyond the truncation.
    pub trunc_deficit: f64,
}

impl DensityMatrix {
    /// Rank-one state from a normalized vector.
    pub fn pure(v: &FockVector, trunc_deficit: f64) -> Self {
        let n = v.norm();
        let c = &v.coeffs / C64::from(n);
        DensityMatrix {
            space: v.space.clone(),
            mat: &c * c.adjoint(),
            trunc_deficit,
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `Tr[rho O]`.
    pub fn expectation(&self, op: &FockOperator) -> C64 {
        (&self.mat * &op.mat).trace()
    }

    /// Weight of the state on one level of the truncated space.
    pub fn level_weight(&self, n: usize) -> f64 {
        let off = self.space.offset(n);
        (0..self.space.level(n).len())
            .map(|i| self.mat[(off + i, off + i)].re)
            .sum()
    }

    /// Hermiticity, positivity and normalization checks; returns the worst
    /// violation magnitude.
    pub fn validate(&self) -> f64 {
        let herm = (&self.mat - self.mat.adjoint()).norm();
        let eig = nalgebra::SymmetricEigen::new(
            (&self.mat + self.mat.adjoint()) * C64::from(0.5),
        );
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let tr = (self.trace() - C64::from(1.0)).norm();
        herm.max((-min_eig).max(0.0)).max(tr)
    }
}

/// Smallest `n_max` whose tail of the given level-weight series stays within
/// `budget`; the series is summed in the caller-provided closure.
fn poisson_required_n(lambda: f64, budget: f64) -> usize {
    let mut cum = 0.0f64;
    let mut term = (-lambda).exp();
    for n in 0..100_000usize {
        cum += term;
        if 1.0 - cum <= budget {
            return n;
        }
        term *= lambda / (n + 1) as f64;
    }
    usize::MAX
}

/// Coherent state `|E(xi)><E(xi)|` with `E(xi) = W(sqrt(2)/(i eps) xi)
/// Omega`, built through the Weyl operator; the Poisson tail beyond `n_max`
/// must fit in `tail_budget`.
pub fn coherent_state(space: &Space, xi: &CVec, tail_budget: f64) -> Result<DensityMatrix> {
    if xi.len() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: xi.len(),
        });
    }
    let lambda = xi.norm_squared() / space.eps;
    let mut cum = 0.0f64;
    let mut term = (-lambda).exp();
    for n in 0..=space.n_max {
        cum += term;
        term *= lambda / (n + 1) as f64;
    }
    let deficit = (1.0 - cum).max(0.0);
    if deficit > tail_budget {
        return Err(FockError::TailBudget {
            deficit,
            budget: tail_budget,
            required: poisson_required_n(lambda, tail_budget),
        });
    }
    let arg = xi * (C64::from(2.0f64.sqrt()) / (C64::i() * space.eps));
    let w = weyl(space, &arg)?;
    let e = w.apply(&FockVector::vacuum(space));
    Ok(DensityMatrix::pure(&e, deficit))
}

/// Hermite state `|phi^{vN}><phi^{vN}|`; requires `eps = 1/N` and a unit
/// `phi`.
pub fn hermite_state(space: &Space, phi: &CVec, n_particles: usize) -> Result<DensityMatrix> {
    if phi.len() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: phi.len(),
        });
    }
    if (phi.norm() - 1.0).abs() > 1e-12 {
        return Err(FockError::Invalid("Hermite state needs a unit vector".into()));
    }
    if n_particles > space.n_max {
        return Err(FockError::DegreeExceedsTruncation {
            p: n_particles,
            q: n_particles,
            n_max: space.n_max,
        });
    }
    let expected_eps = 1.0 / n_particles as f64;
    if (space.eps - expected_eps).abs() > 1e-12 * expected_eps {
        return Err(FockError::EpsMismatch {
            space_eps: space.eps,
            required: expected_eps,
        });
    }
    let mut v = FockVector::zero(space);
    let nf = factorial(n_particles);
    for (i, alpha) in space.level(n_particles).iter().enumerate() {
        let coeff: C64 = phi
            .iter()
            .zip(&alpha.0)
            .map(|(x, &k)| x.powu(k as u32))
            .product();
        v.coeffs[space.offset(n_particles) + i] =
            coeff * C64::from((nf / alpha.factorial()).sqrt());
    }
    Ok(DensityMatrix::pure(&v, 0.0))
}

/// Specification of a tensor state.
#[derive(Debug, Clone)]
pub enum TensorSpec {
    /// `(lambda . E)^N |Omega><Omega|`: the diagonal mixture
    /// `sum_{|alpha| = N} N!/alpha! lambda^alpha |e^{v alpha}><e^{v alpha}|`.
    Lambda { lambda: Vec<f64>, n_particles: usize },
    /// `E^{(N_1..N_k)}|Omega><Omega|`: the occupation-basis projector.
    Occupation(Vec<usize>),
}

pub fn tensor_state(space: &Space, spec: &TensorSpec) -> Result<DensityMatrix> {
    match spec {
        TensorSpec::Occupation(counts) => {
            if counts.len() > space.d {
                return Err(FockError::DimensionMismatch {
                    expected: space.d,
                    got: counts.len(),
                });
            }
            let mut alpha = counts.clone();
            alpha.resize(space.d, 0);
            let v = FockVector::basis_state(space, &MultiIndex(alpha))?;
            Ok(DensityMatrix::pure(&v, 0.0))
        }
        TensorSpec::Lambda { lambda, n_particles } => {
            if lambda.len() > space.d {
                return Err(FockError::DimensionMismatch {
                    expected: space.d,
                    got: lambda.len(),
                });
            }
            let total: f64 = lambda.iter().sum();
            if (total - 1.0).abs() > 1e-12 || lambda.iter().any(|&l| l < 0.0) {
                return Err(FockError::ZeroNormalization(
                    "tensor weights must be nonnegative and sum to 1",
                ));
            }
            let n = *n_particles;
            if n > space.n_max {
                return Err(FockError::DegreeExceedsTruncation { p: n, q: n, n_max: space.n_max });
            }
            let mut lam = lambda.clone();
            lam.resize(space.d, 0.0);
            let mut mat = CMat::zeros(space.dim(), space.dim());
            let nf = factorial(n);
            for (i, alpha) in space.level(n).iter().enumerate() {
                let weight: f64 = alpha
                    .0
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| lam[j].powi(k as i32))
                    .product::<f64>()
                    * nf
                    / alpha.factorial();
                let g = space.offset(n) + i;
                mat[(g, g)] = C64::from(weight);
            }
            Ok(DensityMatrix {
                space: space.clone(),
                mat,
                trunc_deficit: 0.0,
            })
        }
    }
}

/// Quasi-free Gibbs state `Gamma(diag sigma) / Tr`, `sigma_i = nu_i /
/// (nu_i + eps)`; diagonal in the occupation basis.  Normalization uses the
/// truncated trace; the deficit against `prod 1/(1 - sigma_i)` is recorded.
pub fn gibbs_state(space: &Space, nu: &[f64], tail_budget: f64) -> Result<DensityMatrix> {
    if nu.len() != space.d {
        return Err(FockError::DimensionMismatch {
            expected: space.d,
            got: nu.len(),
        });
    }
    if nu.iter().any(|&v| v < 0.0) {
        return Err(FockError::Invalid("Gibbs nu parameters must be >= 0".into()));
    }
    let sigma: Vec<f64> = nu.iter().map(|&v| v / (v + space.eps)).collect();
    let full_trace: f64 = sigma.iter().map(|&s| 1.0 / (1.0 - s)).product();
    let mut mat = CMat::zeros(space.dim(), space.dim());
    let mut trunc_trace = 0.0f64;
    for (i, _, alpha) in space.basis_iter() {
        let w: f64 = sigma
            .iter()
            .zip(&alpha.0)
            .map(|(&s, &k)| s.powi(k as i32))
            .product();
        mat[(i, i)] = C64::from(w);
        trunc_trace += w;
    }
    let deficit = ((full_trace - trunc_trace) / full_trace).max(0.0);
    if deficit > tail_budget {
        return Err(FockError::TailBudget {
            deficit,
            budget: tail_budget,
            required: gibbs_required_n(&sigma, tail_budget, full_trace),
        });
    }
    mat /= C64::from(trunc_trace);
    Ok(DensityMatrix {
        space: space.clone(),
        mat,
        trunc_deficit: deficit,
    })
}

fn gibbs_required_n(sigma: &[f64], budget: f64, full_trace: f64) -> usize {
    // Accumulate level sums sum_{|alpha| = n} sigma^alpha until the tail of
    // the product geometric series fits in the budget.  The per-level sums
    // satisfy a mode-by-mode convolution computed by dynamic programming.
    let mut cum = 0.0f64;
    for n in 0..100_000usize {
        cum += level_sum(sigma, n);
        if (full_trace - cum) / full_trace <= budget {
            return n;
        }
    }
    usize::MAX
}

/// `sum_{|alpha| = n} sigma^alpha` by dynamic programming over modes.
fn level_sum(sigma: &[f64], n: usize) -> f64 {
    let mut dp = vec![0.0f64; n + 1];
    dp[0] = 1.0;
    for &s in sigma {
        let mut next = vec![0.0f64; n + 1];
        for k in 0..=n {
            if dp[k] == 0.0 {
                continue;
            }
            let mut pw = 1.0;
            for j in k..=n {
                next[j] += dp[k] * pw;
                pw *= s;
            }
        }
        dp = next;
    }
    dp[n]
}

/// Piecewise-cubic smooth step: 1 on `[0, 1/2]`, 0 on `[1, inf)`.
pub fn default_chi(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let s = (x - 0.5) / 0.5;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Number-localized cutoff `chi(N/R^2) rho chi(N/R^2)`, renormalized.
pub fn localize(
    rho: &DensityMatrix,
    chi: &dyn Fn(f64) -> f64,
    radius_sq: f64,
) -> Result<DensityMatrix> {
    let space = &rho.space;
    let mut weights = vec![0.0f64; space.dim()];
    for (i, n, _) in space.basis_iter() {
        weights[i] = chi(space.eps * n as f64 / radius_sq);
    }
    let mut mat = rho.mat.clone();
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            mat[(i, j)] *= C64::from(weights[i] * weights[j]);
        }
    }
    let tr = mat.trace().re;
    if tr <= 1e-300 {
        return Err(FockError::ZeroNormalization(
            "localization annihilated the state",
        ));
    }
    mat /= C64::from(tr);
    Ok(DensityMatrix {
        space: space.clone(),
        mat,
        trunc_deficit: rho.trunc_deficit,
    })
}

/// Kind of a generated state family along an `eps` schedule.
#[derive(Debug, Clone)]
pub enum StateKind {
    Coherent { xi: CVec },
    Hermite { phi: CVec },
    Tensor { lambda: Vec<f64> },
    Gibbs { nu: Vec<f64> },
}

/// A family `eps -> rho_eps` with its predicted limiting Wigner measure.
#[derive(Debug, Clone)]
pub struct StateFamily {
    pub kind: StateKind,
    pub tail_budget: f64,
}

impl StateFamily {
    pub fn new(kind: StateKind) -> Self {
        StateFamily {
            kind,
            tail_budget: DEFAULT_TAIL_BUDGET,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            StateKind::Coherent { xi } => xi.len(),
            StateKind::Hermite { phi } => phi.len(),
            StateKind::Tensor { lambda } => lambda.len(),
            StateKind::Gibbs { nu } => nu.len(),
        }
    }

    /// Build the space and the state at one `eps`.  For Hermite and tensor
    /// families `eps` must be `1/N` for an integer `N <= n_max`.
    pub fn generate(&self, eps: f64, n_max: usize) -> Result<(Space, DensityMatrix)> {
        let space = build_space(self.dim(), n_max, eps)?;
        let rho = match &self.kind {
            StateKind::Coherent { xi } => coherent_state(&space, xi, self.tail_budget)?,
            StateKind::Hermite { phi } => {
                let n = (1.0 / eps).round() as usize;
                hermite_state(&space, phi, n)?
            }
            StateKind::Tensor { lambda } => {
                let n = (1.0 / eps).round() as usize;
                if ((n as f64) * eps - 1.0).abs() > 1e-12 {
                    return Err(FockError::EpsMismatch {
                        space_eps: eps,
                        required: 1.0 / n as f64,
                    });
                }
                tensor_state(
                    &space,
                    &TensorSpec::Lambda {
                        lambda: lambda.clone(),
                        n_particles: n,
                    },
                )?
            }
            StateKind::Gibbs { nu } => gibbs_state(&space, nu, self.tail_budget)?,
        };
        Ok((space, rho))
    }

    /// The predicted limiting Wigner measure of the family.
    pub fn predicted_measure(&self) -> WignerMeasure {
        match &self.kind {
            StateKind::Coherent { xi } => WignerMeasure::Dirac { xi: xi.clone() },
            StateKind::Hermite { phi } => WignerMeasure::CircleDirac { phi: phi.clone() },
            StateKind::Tensor { lambda } => WignerMeasure::ProductOrthogonal {
                d: lambda.len(),
                components: lambda
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l > 0.0)
                    .map(|(i, &l)| {
                        (
                            WignerMeasure::CircleDirac {
                                phi: CVec::from_element(1, C64::from(l.sqrt())),
                            },
                            vec![i],
                        )
                    })
                    .collect(),
            },
            StateKind::Gibbs { nu } => WignerMeasure::DiagonalGaussian {
                rates: nu.iter().map(|&v| if v > 0.0 { 1.0 / v } else { f64::INFINITY }).collect(),
            },
        }
    }
}
