//! The `check` subcommand: named invariant suites over small spaces, each
//! printing its max residual and failing on any violation.

use fockmf::flow::{flow, FlowConfig};
use fockmf::fock::{a_dag_general, a_general, build_space, weyl};
use fockmf::models::TwoBodyModel;
use fockmf::states::{coherent_state, gibbs_state, tensor_state, TensorSpec};
use fockmf::wick::{
    compose, random_hermitian_kernel, random_symbol, wick_quantize, weyl_quantize_quadratic,
    PolynomialSymbol,
};
use fockmf::{C64, CMat, CVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{from_fock, CmdError};

/// One named residual with its tolerance.
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        self.residual <= self.tolerance
    }
}

type Result<T> = std::result::Result<T, CmdError>;

/// Run one suite, print per-check residuals, return the results.
pub fn cmd_check(suite: &str, seed: u64) -> Result<Vec<CheckResult>> {
    let results = match suite {
        "ccr" => suite_ccr(seed)?,
        "wick" => suite_wick(seed)?,
        "weyl" => suite_weyl(seed)?,
        "flow" => suite_flow(seed)?,
        "states" => suite_states()?,
        other => {
            return Err(CmdError::Config(format!(
                "unknown check suite `{other}` (expected ccr, wick, weyl, flow or states)"
            )))
        }
    };
    for r in &results {
        let status = if r.ok() { "ok" } else { "FAIL" };
        println!(
            "{status}  {name}  max residual {res:.3e} (tolerance {tol:.1e})",
            name = r.name,
            res = r.residual,
            tol = r.tolerance
        );
    }
    if results.iter().any(|r| !r.ok()) {
        return Err(CmdError::Violation(format!("check suite `{suite}` failed")));
    }
    Ok(results)
}

fn suite_ccr(seed: u64) -> Result<Vec<CheckResult>> {
    let space = build_space(2, 8, 0.1).map_err(from_fock)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let xi1 = CVec::from_fn(2, |_, _| fockmf::wick::gaussian_c64(&mut rng));
        let xi2 = CVec::from_fn(2, |_, _| fockmf::wick::gaussian_c64(&mut rng));
        let lhs = a_general(&space, &xi1)
            .map_err(from_fock)?
            .commutator(&a_dag_general(&space, &xi2).map_err(from_fock)?);
        let scalar = C64::from(space.eps) * xi1.dotc(&xi2);
        let mut diff = lhs;
        for i in 0..diff.mat.nrows() {
            diff.mat[(i, i)] -= scalar;
        }
        // Ignore the top level, where the truncation cuts the commutator.
        worst = worst.max(diff.restricted_norm(space.n_max - 1));
    }
    Ok(vec![CheckResult {
        name: "ccr-commutator",
        residual: worst,
        tolerance: 1e-12,
    }])
}

fn suite_wick(seed: u64) -> Result<Vec<CheckResult>> {
    let space = build_space(2, 10, 0.25).map_err(from_fock)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let b1 = random_symbol(2, 2, 1, &mut rng);
        let b2 = random_symbol(2, 1, 2, &mut rng);
        let prod = wick_quantize(&b1, &space)
            .map_err(from_fock)?
            .mul(&wick_quantize(&b2, &space).map_err(from_fock)?);
        let comp = compose(&b1, &b2, space.eps).map_err(from_fock)?;
        let comp_op =
            fockmf::wick::wick_quantize_compound(&comp, &space).map_err(from_fock)?;
        let diff = prod.sub(&comp_op);
        worst = worst.max(diff.restricted_norm(space.n_max - 3));
    }
    Ok(vec![CheckResult {
        name: "wick-composition",
        residual: worst,
        tolerance: 1e-12,
    }])
}

fn suite_weyl(seed: u64) -> Result<Vec<CheckResult>> {
    let space = build_space(2, 12, 0.2).map_err(from_fock)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = CVec::from_fn(2, |_, _| fockmf::wick::gaussian_c64(&mut rng) * C64::from(0.3));
    let w = weyl(&space, &xi).map_err(from_fock)?;
    let unitarity = (w.mat.adjoint() * &w.mat - CMat::identity(space.dim(), space.dim())).norm();

    let bmat = random_hermitian_kernel(2, 1, false, &mut rng).kernel.clone();
    let weylq = weyl_quantize_quadratic(&bmat, &space).map_err(from_fock)?;
    let wickq = wick_quantize(
        &PolynomialSymbol {
            d: 2,
            p: 1,
            q: 1,
            kernel: bmat.clone(),
        },
        &space,
    )
    .map_err(from_fock)?;
    let shift = C64::from(0.5 * space.eps * bmat.trace().re);
    let mut diff = weylq.sub(&wickq);
    for i in 0..diff.mat.nrows() {
        diff.mat[(i, i)] -= shift;
    }
    Ok(vec![
        CheckResult {
            name: "weyl-unitarity",
            residual: unitarity,
            tolerance: 1e-10,
        },
        CheckResult {
            name: "weyl-wick-trace-shift",
            residual: diff.op_norm(),
            tolerance: 1e-10,
        },
    ])
}

fn suite_flow(seed: u64) -> Result<Vec<CheckResult>> {
    let model = TwoBodyModel::new(3, seed);
    let h = model.classical().map_err(from_fock)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let z0 = CVec::from_fn(3, |_, _| fockmf::wick::gaussian_c64(&mut rng) * C64::from(0.5));
    let cfg = FlowConfig::default();
    let z1 = flow(&h, &z0, 1.0, &cfg).map_err(from_fock)?.z;
    let norm_drift = (z1.norm() - z0.norm()).abs();
    let energy_drift = (h.energy(&z1) - h.energy(&z0)).abs();
    let back = flow(&h, &z1, -1.0, &cfg).map_err(from_fock)?.z;
    let reversibility = (back - &z0).norm();
    Ok(vec![
        CheckResult {
            name: "flow-norm-conservation",
            residual: norm_drift,
            tolerance: 1e-8,
        },
        CheckResult {
            name: "flow-energy-conservation",
            residual: energy_drift,
            tolerance: 1e-8,
        },
        CheckResult {
            name: "flow-reversibility",
            residual: reversibility,
            tolerance: 1e-7,
        },
    ])
}

fn suite_states() -> Result<Vec<CheckResult>> {
    let space = build_space(2, 40, 0.1).map_err(from_fock)?;
    let xi = CVec::from_vec(vec![C64::new(0.4, 0.1), C64::new(-0.2, 0.3)]);
    let coh = coherent_state(&space, &xi, 1e-8).map_err(from_fock)?;
    let space_n = build_space(2, 8, 1.0 / 8.0).map_err(from_fock)?;
    let tens = tensor_state(
        &space_n,
        &TensorSpec::Lambda {
            lambda: vec![0.7, 0.3],
            n_particles: 8,
        },
    )
    .map_err(from_fock)?;
    let gib = gibbs_state(&space, &[0.1, 0.05], 1e-8).map_err(from_fock)?;
    Ok(vec![
        CheckResult {
            name: "state-coherent",
            residual: coh.validate(),
            tolerance: 1e-10,
        },
        CheckResult {
            name: "state-tensor",
            residual: tens.validate(),
            tolerance: 1e-10,
        },
        CheckResult {
            name: "state-gibbs",
            residual: gib.validate(),
            tolerance: 1e-10,
        },
    ])
}
