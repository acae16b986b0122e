//! Symbolic Wigner measures with exact polynomial integration rules, their
//! pushforward under the classical flow, moments and characteristic
//! functions.
//!
//! Measures are never represented as sample clouds; every supported variant
//! integrates polynomial symbols exactly (circle and torus quadratures are
//! exact for trigonometric polynomials of the occurring degree).  A seeded
//! Monte Carlo fallback exists only for Gaussian pushforwards, which have no
//! closed integration rule here.

use crate::error::{FockError, Result};
use crate::flow::{flow, ClassicalHamiltonian, FlowConfig};
use crate::comb::MultiIndex;
use crate::wick::{gaussian, CompoundSymbol, PolynomialSymbol};
use crate::{C64, CVec};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A Wigner measure on `C^d` in one of the supported families.
#[derive(Debug, Clone)]
pub enum WignerMeasure {
    /// Point mass at `xi`.
    Dirac { xi: CVec },
    /// Circle average `1/2pi int delta_{e^{i theta} phi} d theta`.
    CircleDirac { phi: CVec },
    /// Product of measures living on disjoint coordinate subsets of `C^d`.
    ProductOrthogonal {
        d: usize,
        components: Vec<(WignerMeasure, Vec<usize>)>,
    },
    /// `prod_i (l_i / pi) e^{-l_i |z_i|^2} L(dz_i)` with rates `l_i > 0`.
    DiagonalGaussian { rates: Vec<f64> },
    /// Lazy `(F_t)_* base` for bases without a pointwise atom description.
    Pushforward {
        base: Box<WignerMeasure>,
        h: ClassicalHamiltonian,
        t: f64,
    },
}

impl WignerMeasure {
    /// Ambient phase-space dimension.
    pub fn dim(&self) -> usize {
        match self {
            WignerMeasure::Dirac { xi } => xi.len(),
            WignerMeasure::CircleDirac { phi } => phi.len(),
            WignerMeasure::ProductOrthogonal { d, .. } => *d,
            WignerMeasure::DiagonalGaussian { rates } => rates.len(),
            WignerMeasure::Pushforward { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WignerMeasure::DiagonalGaussian { rates } => {
                if rates.iter().any(|&l| !(l > 0.0)) {
                    return Err(FockError::Invalid("Gaussian rates must be > 0".into()));
                }
            }
            WignerMeasure::ProductOrthogonal { d, components } => {
                let mut seen = vec![false; *d];
                for (mu, subset) in components {
                    if mu.dim() != subset.len() {
                        return Err(FockError::DimensionMismatch {
                            expected: subset.len(),
                            got: mu.dim(),
                        });
                    }
                    for &i in subset {
                        if i >= *d || seen[i] {
                            return Err(FockError::Invalid(
                                "product components must use disjoint in-range modes".into(),
                            ));
                        }
                        seen[i] = true;
                    }
                    mu.validate()?;
                }
            }
            WignerMeasure::Pushforward { base, .. } => base.validate()?,
            _ => {}
        }
        Ok(())
    }

    /// Integral of one monomial `conj(z)^gamma z^beta`, for variants with
    /// closed rules.
    fn integrate_monomial(&self, gamma: &MultiIndex, beta: &MultiIndex) -> Result<C64> {
        match self {
            WignerMeasure::Dirac { xi } => Ok(xi
                .iter()
                .zip(&gamma.0)
                .map(|(x, &k)| x.conj().powu(k as u32))
                .product::<C64>()
                * xi.iter()
                    .zip(&beta.0)
                    .map(|(x, &k)| x.powu(k as u32))
                    .product::<C64>()),
            WignerMeasure::CircleDirac { phi } => {
                if gamma.total() != beta.total() {
                    return Ok(C64::from(0.0));
                }
                WignerMeasure::Dirac { xi: phi.clone() }.integrate_monomial(gamma, beta)
            }
            WignerMeasure::DiagonalGaussian { rates } => {
                let mut out = C64::from(1.0);
                for (i, &l) in rates.iter().enumerate() {
                    let (g, b) = (gamma.0[i], beta.0[i]);
                    if g != b {
                        return Ok(C64::from(0.0));
                    }
                    out *= C64::from(crate::comb::factorial(g) / l.powi(g as i32));
                }
                Ok(out)
            }
            WignerMeasure::ProductOrthogonal { d, components } => {
                let mut covered = vec![false; *d];
                let mut out = C64::from(1.0);
                for (mu, subset) in components {
                    let sub_g = MultiIndex(subset.iter().map(|&i| gamma.0[i]).collect());
                    let sub_b = MultiIndex(subset.iter().map(|&i| beta.0[i]).collect());
                    out *= mu.integrate_monomial(&sub_g, &sub_b)?;
                    for &i in subset {
                        covered[i] = true;
                    }
                }
                for i in 0..*d {
                    if !covered[i] && (gamma.0[i] > 0 || beta.0[i] > 0) {
                        return Ok(C64::from(0.0));
                    }
                }
                Ok(out)
            }
            WignerMeasure::Pushforward { .. } => Err(FockError::UnsupportedMeasure(
                "pushforward has no closed monomial rule".into(),
            )),
        }
    }
}

/// `int b(z) dmu(z)` by the variant's exact integration rule.
pub fn integrate_symbol(mu: &WignerMeasure, b: &CompoundSymbol) -> Result<C64> {
    match mu {
        WignerMeasure::Pushforward { base, h, t } => integrate_pushforward(base, h, *t, b),
        _ => {
            let mut out = C64::from(0.0);
            for term in b.terms.values() {
                for (gamma, beta, c) in term.monomial_coeffs() {
                    out += c * mu.integrate_monomial(&gamma, &beta)?;
                }
            }
            Ok(out)
        }
    }
}

fn integrate_pushforward(
    base: &WignerMeasure,
    h: &ClassicalHamiltonian,
    t: f64,
    b: &CompoundSymbol,
) -> Result<C64> {
    let cfg = FlowConfig::default();
    match base {
        WignerMeasure::Dirac { xi } => {
            let zt = flow(h, xi, t, &cfg)?.z;
            Ok(b.evaluate(&zt))
        }
        WignerMeasure::CircleDirac { phi } => {
            // Gauge equivariance collapses the circle to one trajectory.
            let zt = flow(h, phi, t, &cfg)?.z;
            integrate_symbol(&WignerMeasure::CircleDirac { phi: zt }, b)
        }
        WignerMeasure::ProductOrthogonal { d, components } => {
            let atoms: Option<Vec<(&CVec, &Vec<usize>)>> = components
                .iter()
                .map(|(mu, subset)| match mu {
                    WignerMeasure::CircleDirac { phi } => Some((phi, subset)),
                    _ => None,
                })
                .collect();
            let atoms = atoms.ok_or_else(|| {
                FockError::UnsupportedMeasure(
                    "pushforward integration needs atom or circle components".into(),
                )
            })?;
            let m = b.max_degree() + 2;
            let k = atoms.len();
            let mut total = C64::from(0.0);
            let mut counter = vec![0usize; k];
            loop {
                let mut z = CVec::zeros(*d);
                for (c, (phi, subset)) in counter.iter().zip(&atoms) {
                    let phase = (C64::i() * (TAU * *c as f64 / m as f64)).exp();
                    for (slot, &i) in subset.iter().enumerate() {
                        z[i] = phase * phi[slot];
                    }
                }
                let zt = flow(h, &z, t, &cfg)?.z;
                total += b.evaluate(&zt);
                let mut lvl = 0;
                loop {
                    if lvl == k {
                        return Ok(total / C64::from(m.pow(k as u32) as f64));
                    }
                    counter[lvl] += 1;
                    if counter[lvl] < m {
                        break;
                    }
                    counter[lvl] = 0;
                    lvl += 1;
                }
            }
        }
        _ => Err(FockError::UnsupportedMeasure(
            "Gaussian pushforward has no exact rule; use the Monte Carlo fallback".into(),
        )),
    }
}

/// Seeded Monte Carlo estimate of `int b d((F_t)_* mu)` for a diagonal
/// Gaussian base; fallback for the combination without an exact rule.
pub fn integrate_symbol_mc(
    base_rates: &[f64],
    h: &ClassicalHamiltonian,
    t: f64,
    b: &CompoundSymbol,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<C64> {
    let cfg = FlowConfig::default();
    let mut acc = C64::from(0.0);
    for _ in 0..samples {
        let z = CVec::from_fn(base_rates.len(), |i, _| {
            let s = (0.5 / base_rates[i]).sqrt();
            C64::new(s * gaussian(rng), s * gaussian(rng))
        });
        let zt = flow(h, &z, t, &cfg)?.z;
        acc += b.evaluate(&zt);
    }
    Ok(acc / C64::from(samples as f64))
}

/// `int |z|^{2 alpha} dmu`.
pub fn moment(mu: &WignerMeasure, alpha: usize) -> Result<f64> {
    let b = CompoundSymbol::from_term(PolynomialSymbol::norm_power(mu.dim(), alpha));
    Ok(integrate_symbol(mu, &b)?.re)
}

/// Characteristic function `F(mu)(xi) = int e^{2 pi i S(z, xi)} dmu(z)`,
/// with `S = Re<., .>`; the sign is pinned jointly with `characteristic_fn`
/// by the coherent-state test.
pub fn characteristic(mu: &WignerMeasure, xi: &CVec) -> Result<C64> {
    match mu {
        WignerMeasure::Dirac { xi: z } => Ok(phase_at(z, xi)),
        WignerMeasure::CircleDirac { phi } => {
            // Converged circle quadrature; the integrand is entire in
            // e^{i theta}, so doubling until agreement is cheap.
            let mut m = 64usize;
            let mut prev = circle_characteristic(phi, xi, m);
            loop {
                m *= 2;
                let cur = circle_characteristic(phi, xi, m);
                if (cur - prev).norm() < 1e-13 || m >= 1 << 14 {
                    return Ok(cur);
                }
                prev = cur;
            }
        }
        WignerMeasure::DiagonalGaussian { rates } => {
            let s: f64 = rates
                .iter()
                .enumerate()
                .map(|(i, &l)| xi[i].norm_sqr() / l)
                .sum();
            Ok(C64::from((-std::f64::consts::PI.powi(2) * s).exp()))
        }
        WignerMeasure::ProductOrthogonal { components, .. } => {
            let mut out = C64::from(1.0);
            for (comp, subset) in components {
                let sub = CVec::from_fn(subset.len(), |k, _| xi[subset[k]]);
                out *= characteristic(comp, &sub)?;
            }
            Ok(out)
        }
        WignerMeasure::Pushforward { .. } => Err(FockError::UnsupportedMeasure(
            "characteristic of an unresolved pushforward".into(),
        )),
    }
}

fn phase_at(z: &CVec, xi: &CVec) -> C64 {
    (C64::i() * (TAU * crate::s_form(z, xi))).exp()
}

fn circle_characteristic(phi: &CVec, xi: &CVec, m: usize) -> C64 {
    let mut acc = C64::from(0.0);
    for k in 0..m {
        let z = phi * (C64::i() * (TAU * k as f64 / m as f64)).exp();
        acc += phase_at(&z, xi);
    }
    acc / C64::from(m as f64)
}

/// `(F_t)_* mu`; Dirac and circle atoms are transported eagerly through the
/// flow (gauge equivariance for circles), other bases stay lazy.
pub fn pushforward(
    mu: &WignerMeasure,
    h: &ClassicalHamiltonian,
    t: f64,
) -> Result<WignerMeasure> {
    if t == 0.0 {
        return Ok(mu.clone());
    }
    let cfg = FlowConfig::default();
    Ok(match mu {
        WignerMeasure::Dirac { xi } => WignerMeasure::Dirac {
            xi: flow(h, xi, t, &cfg)?.z,
        },
        WignerMeasure::CircleDirac { phi } => WignerMeasure::CircleDirac {
            phi: flow(h, phi, t, &cfg)?.z,
        },
        other => WignerMeasure::Pushforward {
            base: Box::new(other.clone()),
            h: h.clone(),
            t,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::{random_hermitian_kernel, gaussian_c64};
    use crate::CMat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<C64>) -> CVec {
        let z = CVec::from_vec(v);
        let n = z.norm();
        z / C64::from(n)
    }

    #[test]
    fn mass_is_one_for_each_variant() {
        let phi = unit(vec![C64::new(0.6, 0.2), C64::new(-0.4, 0.7)]);
        let variants = vec![
            WignerMeasure::Dirac { xi: phi.clone() },
            WignerMeasure::CircleDirac { phi: phi.clone() },
            WignerMeasure::DiagonalGaussian { rates: vec![0.7, 2.5] },
            WignerMeasure::ProductOrthogonal {
                d: 2,
                components: vec![
                    (
                        WignerMeasure::CircleDirac {
                            phi: CVec::from_vec(vec![C64::from(0.5)]),
                        },
                        vec![0],
                    ),
                    (
                        WignerMeasure::DiagonalGaussian { rates: vec![1.3] },
                        vec![1],
                    ),
                ],
            },
        ];
        for mu in &variants {
            mu.validate().unwrap();
            assert!((moment(mu, 0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_average_kills_off_diagonal_monomials() {
        let phi = unit(vec![C64::new(0.3, -0.8), C64::new(0.5, 0.1)]);
        let mu = WignerMeasure::CircleDirac { phi: phi.clone() };
        let eta = CVec::from_vec(vec![C64::new(1.0, 0.4), C64::new(-0.2, 0.9)]);
        let b = CompoundSymbol::from_term(PolynomialSymbol::annihilation(&eta));
        assert!(integrate_symbol(&mu, &b).unwrap().norm() < 1e-14);
        for k in 1..4 {
            assert!((moment(&mu, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_moments_match_one_dim_oracle() {
        let l = 1.7;
        let mu = WignerMeasure::DiagonalGaussian { rates: vec![l] };
        // Radial oracle: int |z|^{2a} (l/pi) e^{-l|z|^2} L(dz) by midpoint
        // quadrature in r^2.
        for alpha in 1..5usize {
            let n = 400_000;
            let hi = 40.0 / l;
            let dr = hi / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let r2 = (i as f64 + 0.5) * dr;
                acc += r2.powi(alpha as i32) * l * (-l * r2).exp() * dr;
            }
            let got = moment(&mu, alpha).unwrap();
            assert!(
                (got - acc).abs() < 1e-6 * acc,
                "alpha = {alpha}: {got} vs oracle {acc}"
            );
            assert!((got - crate::comb::factorial(alpha) / l.powi(alpha as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_of_circles_moment_is_multinomial() {
        let (nu1, nu2): (f64, f64) = (0.7, 0.2);
        let mu = WignerMeasure::ProductOrthogonal {
            d: 2,
            components: vec![
                (
                    WignerMeasure::CircleDirac {
                        phi: CVec::from_vec(vec![C64::from(nu1.sqrt())]),
                    },
                    vec![0],
                ),
                (
                    WignerMeasure::CircleDirac {
                        phi: CVec::from_vec(vec![C64::from(nu2.sqrt())]),
                    },
                    vec![1],
                ),
            ],
        };
        for alpha in 0..4usize {
            let got = moment(&mu, alpha).unwrap();
            assert!((got - (nu1 + nu2).powi(alpha as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn dirac_characteristic_is_a_pure_phase() {
        let z = CVec::from_vec(vec![C64::new(0.2, 0.5)]);
        let xi = CVec::from_vec(vec![C64::new(-0.8, 0.3)]);
        let got = characteristic(&WignerMeasure::Dirac { xi: z.clone() }, &xi).unwrap();
        let expect = (C64::i() * TAU * crate::s_form(&z, &xi)).exp();
        assert!((got - expect).norm() < 1e-14);
        let at_zero = characteristic(
            &WignerMeasure::DiagonalGaussian { rates: vec![0.9] },
            &CVec::zeros(1),
        )
        .unwrap();
        assert!((at_zero - C64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn free_pushforward_rotates_atoms() {
        let a = CMat::from_diagonal_element(2, 2, C64::from(2.0));
        let h = ClassicalHamiltonian::free(a).unwrap();
        let xi = unit(vec![C64::new(0.1, 0.4), C64::new(0.9, -0.2)]);
        let t = 0.6;
        match pushforward(&WignerMeasure::Dirac { xi: xi.clone() }, &h, t).unwrap() {
            WignerMeasure::Dirac { xi: moved } => {
                let expect = &xi * (-C64::i() * 2.0 * t).exp();
                assert!((moved - expect).norm() < 1e-10);
            }
            other => panic!("expected a Dirac, got {other:?}"),
        }
    }

    #[test]
    fn pushforward_preserves_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let g = CMat::from_fn(2, 2, |_, _| gaussian_c64(&mut rng));
        let a = (&g + g.adjoint()) * C64::from(0.5);
        let q = random_hermitian_kernel(2, 2, true, &mut rng);
        let h = ClassicalHamiltonian::new(a, vec![q]).unwrap();
        let phi = unit(vec![C64::new(0.7, -0.1), C64::new(0.2, 0.6)]);
        let mu = WignerMeasure::CircleDirac { phi };
        let moved = pushforward(&mu, &h, 0.4).unwrap();
        for alpha in 0..4usize {
            let before = moment(&mu, alpha).unwrap();
            let after = moment(&moved, alpha).unwrap();
            assert!((before - after).abs() < 1e-8, "alpha = {alpha}");
        }
    }

    #[test]
    fn gaussian_pushforward_is_rejected_with_mc_fallback() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let q = random_hermitian_kernel(1, 2, true, &mut rng);
        let h = ClassicalHamiltonian::new(CMat::zeros(1, 1), vec![q]).unwrap();
        let rates = vec![2.0];
        let mu = pushforward(&WignerMeasure::DiagonalGaussian { rates: rates.clone() }, &h, 0.3)
            .unwrap();
        let b = CompoundSymbol::from_term(PolynomialSymbol::norm_power(1, 1));
        assert!(matches!(
            integrate_symbol(&mu, &b),
            Err(FockError::UnsupportedMeasure(_))
        ));
        // |z|^2 is conserved by the flow, so the MC estimate must hover
        // around the base moment 1 / l.
        let est = integrate_symbol_mc(&rates, &h, 0.3, &b, 4000, &mut rng).unwrap();
        assert!((est.re - 0.5).abs() < 0.05, "MC estimate {est}");
    }
}
