//! Property-based invariants over randomized inputs: the CCR, Weyl
//! unitarity, and the monomial representation round trip.

use fockmf::comb::enumerate_level;
use fockmf::fock::{a_dag_general, a_general, build_space, weyl};
use fockmf::wick::PolynomialSymbol;
use fockmf::{C64, CVec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn small_complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn small_vector(d: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec(small_complex(), d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ccr_holds_below_truncation(v1 in small_vector(2), v2 in small_vector(2)) {
        let space = build_space(2, 6, 0.3).unwrap();
        let xi1 = CVec::from_vec(v1);
        let xi2 = CVec::from_vec(v2);
        let mut comm = a_general(&space, &xi1)
            .unwrap()
            .commutator(&a_dag_general(&space, &xi2).unwrap());
        let scalar = C64::from(space.eps) * xi1.dotc(&xi2);
        for i in 0..comm.mat.nrows() {
            comm.mat[(i, i)] -= scalar;
        }
        prop_assert!(comm.restricted_norm(space.n_max - 1) < 1e-12);
    }

    #[test]
    fn weyl_operators_are_unitary(v in small_vector(2)) {
        let space = build_space(2, 8, 0.25).unwrap();
        let xi = CVec::from_vec(v);
        let w = weyl(&space, &xi).unwrap();
        let defect = (w.mat.adjoint() * &w.mat
            - DMatrix::identity(space.dim(), space.dim()))
        .norm();
        prop_assert!(defect < 1e-10);
    }

    #[test]
    fn monomial_representation_round_trips(
        entries in proptest::collection::vec(small_complex(), 6),
        p in 0usize..3,
        q in 0usize..3,
    ) {
        let d = 2;
        let np = enumerate_level(d, p).len();
        let nq = enumerate_level(d, q).len();
        let kernel = DMatrix::from_fn(nq, np, |i, j| entries[(i * np + j) % entries.len()]);
        let b = PolynomialSymbol { d, p, q, kernel };
        let coeffs: std::collections::BTreeMap<_, _> = b
            .monomial_coeffs()
            .into_iter()
            .map(|(g, be, c)| ((g, be), c))
            .collect();
        let back = PolynomialSymbol::from_monomials(d, p, q, &coeffs);
        prop_assert!((b.kernel - back.kernel).norm() < 1e-12);
    }

    #[test]
    fn zero_order_contraction_is_the_pointwise_product(
        v1 in small_vector(2), v2 in small_vector(2), z in small_vector(2),
    ) {
        let b1 = PolynomialSymbol::annihilation(&CVec::from_vec(v1));
        let b2 = PolynomialSymbol::creation(&CVec::from_vec(v2));
        let prod = fockmf::wick::contract(&b1, &b2, 0).unwrap();
        let zv = CVec::from_vec(z);
        let lhs = prod.evaluate(&zv);
        let rhs = b1.evaluate(&zv) * b2.evaluate(&zv);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
