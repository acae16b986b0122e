//! Convergence studies along an `eps` schedule: quantum expectations of
//! evolved states against classical integrals of the pushed-forward limit
//! measure, one row per `(eps, t)` grid cell.

use crate::error::Result;
use crate::flow::ClassicalHamiltonian;
use crate::qdyn::{build_hamiltonian, evolve};
use crate::states::StateFamily;
use crate::wick::{wick_quantize_compound, CompoundSymbol, PolynomialSymbol};
use crate::wigner::{integrate_symbol, pushforward};
use crate::C64;

/// How the truncation level is chosen for each `eps`.
#[derive(Debug, Clone, Copy)]
pub enum NMaxPolicy {
    Fixed(usize),
    /// Smallest level whose family tail fits the budget, capped.
    Adaptive { budget: f64, cap: usize },
}

/// One `(eps, t, observable)` cell of a study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub eps: f64,
    pub t: f64,
    pub observable: usize,
    pub quantum: C64,
    pub classical: C64,
    pub abs_error: f64,
    pub n_max_used: usize,
    pub trunc_deficit: f64,
}

/// Truncation level required by a family at one `eps` under a policy.
pub fn required_n_max(family: &StateFamily, eps: f64, policy: &NMaxPolicy) -> usize {
    match policy {
        NMaxPolicy::Fixed(n) => *n,
        NMaxPolicy::Adaptive { budget, cap } => {
            // The state factory enforces the family's own tail budget, so the
            // adaptive search must satisfy whichever bound is stricter.
            let budget = budget.min(family.tail_budget);
            let needed = match &family.kind {
                crate::states::StateKind::Hermite { .. }
                | crate::states::StateKind::Tensor { .. } => (1.0 / eps).round() as usize,
                crate::states::StateKind::Coherent { xi } => {
                    tail_search(|n| poisson_tail(xi.norm_squared() / eps, n), budget, *cap)
                }
                crate::states::StateKind::Gibbs { nu } => {
                    tail_search(|n| gibbs_tail(nu, eps, n), budget, *cap)
                }
            };
            needed.min(*cap)
        }
    }
}

fn tail_search(tail: impl Fn(usize) -> f64, budget: f64, cap: usize) -> usize {
    for n in 0..=cap {
        if tail(n) <= budget {
            return n;
        }
    }
    cap
}

fn poisson_tail(lambda: f64, n_max: usize) -> f64 {
    let mut cum = 0.0;
    let mut term = (-lambda).exp();
    for n in 0..=n_max {
        cum += term;
        term *= lambda / (n + 1) as f64;
    }
    (1.0 - cum).max(0.0)
}

fn gibbs_tail(nu: &[f64], eps: f64, n_max: usize) -> f64 {
    let sigma: Vec<f64> = nu.iter().map(|&v| v / (v + eps)).collect();
    let full: f64 = sigma.iter().map(|&s| 1.0 / (1.0 - s)).product();
    let mut cum = 0.0;
    for n in 0..=n_max {
        cum += level_sum(&sigma, n);
    }
    ((full - cum) / full).max(0.0)
}

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

/// Run the study: for each `(eps, t, observable)` compute
/// `Tr[rho_eps(t) b^{Wick}]`, the classical value `int b d((F_t)_* mu_0)`,
/// and the absolute error.
pub fn convergence_study(
    family: &StateFamily,
    h_class: &ClassicalHamiltonian,
    observables: &[CompoundSymbol],
    times: &[f64],
    eps_schedule: &[f64],
    policy: &NMaxPolicy,
) -> Result<Vec<StudyRow>> {
    let q_terms: Vec<PolynomialSymbol> = h_class.q_terms.clone();
    let mu0 = family.predicted_measure();
    let mut rows = Vec::new();
    for &eps in eps_schedule {
        let n_max = required_n_max(family, eps, policy);
        let (space, rho) = family.generate(eps, n_max)?;
        let h_quant = build_hamiltonian(&h_class.a_mat, &q_terms, &space)?;
        for &t in times {
            let rho_t = evolve(&rho, &h_quant, t);
            let mu_t = pushforward(&mu0, h_class, t)?;
            for (k, b) in observables.iter().enumerate() {
                let b_op = wick_quantize_compound(b, &space)?;
                let quantum = rho_t.expectation(&b_op);
                let classical = integrate_symbol(&mu_t, b)?;
                rows.push(StudyRow {
                    eps,
                    t,
                    observable: k,
                    quantum,
                    classical,
                    abs_error: (quantum - classical).norm(),
                    n_max_used: n_max,
                    trunc_deficit: rho.trunc_deficit,
                });
            }
        }
    }
    Ok(rows)
}
