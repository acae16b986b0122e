//! Subcommand implementations: each produces CSV rows, sorted
//! deterministically, with floats printed at 17 significant digits.

use std::fs;

use fockmf::error::FockError;
use fockmf::flow::{approx_polynomial, flow, remainder_bound, ClassicalHamiltonian, FlowConfig};
use fockmf::models::{HvNModel, LLLModel, TwoBodyModel};
use fockmf::reduced::{asymptotic_reduced, reduced_matrix, trace_distance, ReducedMatrix};
use fockmf::states::{StateFamily, StateKind};
use fockmf::study::{convergence_study, NMaxPolicy};
use fockmf::qdyn::evolve;
use fockmf::wick::{wick_quantize, CompoundSymbol, PolynomialSymbol};
use fockmf::wigner::{moment, pushforward};
use fockmf::{C64, CVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelSpec, ObsSpec, PolicySpec, StateSpec};

/// Failure modes, in exit-code order.
#[derive(Debug)]
pub enum CmdError {
    /// A numerical invariant or bound was violated (exit 1).
    Violation(String),
    /// The configuration does not describe a runnable experiment (exit 2).
    Config(String),
    /// The run would exceed a basis or tail-budget capacity limit (exit 3).
    Capacity(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Violation(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Capacity(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Violation(m) | CmdError::Config(m) | CmdError::Capacity(m) => m,
        }
    }
}

pub fn from_fock(e: FockError) -> CmdError {
    match e {
        FockError::CapacityExceeded { .. } | FockError::TailBudget { .. } => {
            CmdError::Capacity(e.to_string())
        }
        other => CmdError::Config(other.to_string()),
    }
}

type Result<T> = std::result::Result<T, CmdError>;

/// One float at 17 significant digits, locale-free.
pub fn csv_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &str, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CmdError::Config(format!("cannot write `{path}`: {e}")))
}

pub fn build_classical(model: &ModelSpec) -> Result<ClassicalHamiltonian> {
    match model {
        ModelSpec::TwoBody { d, seed } => TwoBodyModel::new(*d, *seed).classical(),
        ModelSpec::Lll {
            h,
            modes,
            interactions,
        } => LLLModel {
            h_param: *h,
            m_trunc: *modes,
            alphas: interactions.clone(),
        }
        .classical(),
        ModelSpec::Hvn { m, seed } => fockmf::models::hvn_bosonize(&HvNModel::seeded(*m, *seed)),
    }
    .map_err(from_fock)
}

pub fn build_family(state: &StateSpec, tail_budget: f64) -> StateFamily {
    let kind = match state {
        StateSpec::Coherent(v) => StateKind::Coherent {
            xi: CVec::from_vec(v.clone()),
        },
        StateSpec::Hermite(v) => StateKind::Hermite {
            phi: CVec::from_vec(v.clone()),
        },
        StateSpec::Tensor(w) => StateKind::Tensor { lambda: w.clone() },
        StateSpec::Gibbs(w) => StateKind::Gibbs { nu: w.clone() },
    };
    let mut family = StateFamily::new(kind);
    family.tail_budget = tail_budget;
    family
}

pub fn build_observable(obs: &ObsSpec, d: usize) -> Result<CompoundSymbol> {
    let sym = match obs {
        ObsSpec::NormPower(k) => PolynomialSymbol::norm_power(d, *k),
        ObsSpec::ModeNumber(j) => {
            if *j >= d {
                return Err(CmdError::Config(format!(
                    "mode_number:{j} out of range for d = {d}"
                )));
            }
            let gamma = fockmf::comb::MultiIndex(
                (0..d).map(|i| usize::from(i == *j)).collect(),
            );
            PolynomialSymbol::matrix_unit(d, &gamma, &gamma)
        }
    };
    Ok(CompoundSymbol::from_term(sym))
}

fn policy(cfg: &ExperimentConfig) -> NMaxPolicy {
    match &cfg.policy {
        PolicySpec::Fixed(n) => NMaxPolicy::Fixed(*n),
        PolicySpec::Adaptive { budget, cap } => NMaxPolicy::Adaptive {
            budget: *budget,
            cap: *cap,
        },
    }
}

/// `propagate`: quantum expectations along the evolution against classical
/// integrals of the pushed-forward measure, one row per grid cell.
pub fn cmd_propagate(cfg: &ExperimentConfig, out: &str) -> Result<()> {
    let h = build_classical(&cfg.model)?;
    let family = build_family(&cfg.state, cfg.tail_budget);
    let d = cfg.model.dim();
    let observables: Vec<CompoundSymbol> = cfg
        .observables
        .iter()
        .map(|o| build_observable(o, d))
        .collect::<Result<_>>()?;
    if observables.is_empty() {
        return Err(CmdError::Config("propagate needs at least one observable".into()));
    }
    let pol = policy(cfg);
    let mut cells: Vec<std::result::Result<Vec<_>, FockError>> = Vec::new();
    cfg.eps_schedule
        .par_iter()
        .map(|&eps| convergence_study(&family, &h, &observables, &cfg.times, &[eps], &pol))
        .collect_into_vec(&mut cells);
    let mut rows = Vec::new();
    for cell in cells {
        let study_rows = cell.map_err(from_fock)?;
        for r in study_rows {
            rows.push((
                r.eps,
                r.t,
                r.observable,
                format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_f(r.eps),
                    csv_f(r.t),
                    r.observable,
                    csv_f(r.quantum.re),
                    csv_f(r.quantum.im),
                    csv_f(r.classical.re),
                    csv_f(r.classical.im),
                    csv_f(r.abs_error),
                    r.n_max_used,
                    csv_f(r.trunc_deficit),
                ),
            ));
        }
    }
    rows.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    let body: Vec<String> = rows.into_iter().map(|r| r.3).collect();
    write_csv(
        out,
        "eps,t,observable_id,quantum_re,quantum_im,classical_re,classical_im,abs_error,n_max_used,trunc_deficit",
        &body,
    )
}

fn reduced_pair(
    cfg: &ExperimentConfig,
    h: &ClassicalHamiltonian,
    family: &StateFamily,
    eps: f64,
    t: f64,
    p: usize,
) -> std::result::Result<f64, FockError> {
    let n_max = fockmf::study::required_n_max(family, eps, &match &cfg.policy {
        PolicySpec::Fixed(n) => NMaxPolicy::Fixed(*n),
        PolicySpec::Adaptive { budget, cap } => NMaxPolicy::Adaptive {
            budget: *budget,
            cap: *cap,
        },
    });
    let (space, rho) = family.generate(eps, n_max)?;
    let q_terms: Vec<PolynomialSymbol> = h.q_terms.clone();
    let hq = fockmf::qdyn::build_hamiltonian(&h.a_mat, &q_terms, &space)?;
    let rho_t = evolve(&rho, &hq, t);
    let gamma_eps = reduced_matrix(&rho_t, p)?;
    let mu_t = pushforward(&family.predicted_measure(), h, t)?;
    let gamma_0: ReducedMatrix = asymptotic_reduced(&mu_t, p)?;
    trace_distance(&gamma_eps, &gamma_0)
}

/// `bbgky`: trace distances between evolved reduced density matrices and
/// their classical limits, rows `(eps, t, p, distance)`.
pub fn cmd_bbgky(cfg: &ExperimentConfig, out: &str) -> Result<()> {
    let h = build_classical(&cfg.model)?;
    let family = build_family(&cfg.state, cfg.tail_budget);
    let mut grid: Vec<(f64, f64, usize)> = Vec::new();
    for &eps in &cfg.eps_schedule {
        for &t in &cfg.times {
            for &p in &cfg.bbgky_orders {
                grid.push((eps, t, p));
            }
        }
    }
    let results: Vec<std::result::Result<f64, FockError>> = grid
        .par_iter()
        .map(|&(eps, t, p)| reduced_pair(cfg, &h, &family, eps, t, p))
        .collect();
    let mut rows = Vec::new();
    for ((eps, t, p), dist) in grid.into_iter().zip(results) {
        let dist = dist.map_err(from_fock)?;
        rows.push((
            eps,
            t,
            p,
            format!("{},{},{},{}", csv_f(eps), csv_f(t), p, csv_f(dist)),
        ));
    }
    rows.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    let body: Vec<String> = rows.into_iter().map(|r| r.3).collect();
    write_csv(out, "eps,t,p,trace_distance", &body)
}

/// `gibbs-moments`: moments `Tr[rho_G (|z|^{2k})^{Wick}]` of a Gibbs family
/// against the moments of its limiting Gaussian measure, up to `k = 4`.
pub fn cmd_gibbs_moments(cfg: &ExperimentConfig, out: &str) -> Result<()> {
    let StateSpec::Gibbs(_) = &cfg.state else {
        return Err(CmdError::Config(
            "gibbs-moments requires state.family = gibbs".into(),
        ));
    };
    let family = build_family(&cfg.state, cfg.tail_budget);
    let mu = family.predicted_measure();
    let d = cfg.state.dim();
    let pol = policy(cfg);
    let mut rows = Vec::new();
    for &eps in &cfg.eps_schedule {
        let n_max = fockmf::study::required_n_max(&family, eps, &pol);
        let (space, rho) = family.generate(eps, n_max).map_err(from_fock)?;
        for k in 0..=4usize {
            let op = wick_quantize(&PolynomialSymbol::norm_power(d, k), &space)
                .map_err(from_fock)?;
            let quantum = rho.expectation(&op);
            let classical = moment(&mu, k).map_err(from_fock)?;
            rows.push(format!(
                "{},{},{},{},{}",
                csv_f(eps),
                k,
                csv_f(quantum.re),
                csv_f(classical),
                csv_f((quantum - C64::from(classical)).norm()),
            ));
        }
    }
    write_csv(out, "eps,k,quantum_re,classical,abs_error", &rows)
}

/// `approx-bound`: empirical error of the polynomial approximants of
/// `b o F_t` against the closed-form remainder bound on the unit ball.
/// Rows `(t, K, max_error, bound)`; a row with `max_error > bound` is a
/// violation.
pub fn cmd_approx_bound(cfg: &ExperimentConfig, out: &str) -> Result<()> {
    let h = build_classical(&cfg.model)?;
    let d = cfg.model.dim();
    let obs = cfg
        .observables
        .first()
        .cloned()
        .unwrap_or(ObsSpec::NormPower(1));
    let b = build_observable(&obs, d)?;
    let fcfg = FlowConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Deterministic sample of points in the unit ball: Gaussian direction,
    // radius uniform in volume.
    let samples: Vec<CVec> = (0..32)
        .map(|_| {
            let g = CVec::from_fn(d, |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let norm = g.norm().max(1e-12);
            let radius = rng.gen::<f64>().powf(1.0 / (2.0 * d as f64));
            g * C64::from(radius / norm)
        })
        .collect();
    let mut rows = Vec::new();
    let mut violated = false;
    for &t in &cfg.times {
        // Reference values b(F_t(z)) at the sample points.
        let reference: Vec<C64> = samples
            .iter()
            .map(|z| flow(&h, z, t, &fcfg).map(|zt| b.evaluate(&zt.z)))
            .collect::<std::result::Result<_, _>>()
            .map_err(from_fock)?;
        for big_k in 1..=4usize {
            let approx = approx_polynomial(&b, &h, t, big_k).map_err(from_fock)?;
            let max_error = samples
                .iter()
                .zip(&reference)
                .map(|(z, &r)| (approx.evaluate(z) - r).norm())
                .fold(0.0f64, f64::max);
            let bound = remainder_bound(&b, &h, 1.0, t, big_k);
            if max_error > bound {
                violated = true;
            }
            rows.push(format!(
                "{},{},{},{}",
                csv_f(t),
                big_k,
                csv_f(max_error),
                csv_f(bound)
            ));
        }
    }
    write_csv(out, "t,K,max_error,bound", &rows)?;
    if violated {
        return Err(CmdError::Violation(
            "empirical approximant error exceeded the remainder bound".into(),
        ));
    }
    Ok(())
}
