use killrange_core::linalg::{Matrix, Subspace};
use killrange_core::scalars::{int, register_irreducible, Monomial, Poly, Rat, RatFunc};
use killrange_core::tensor::{Slot, Tensor};
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u32..3, 0u32..3, -5i64..=5), 0..5)
        .prop_map(|ts| Poly::from_terms(ts.into_iter().map(|(a, b, c)| (Monomial::new(vec![a, b]), int(c)))))
}

fn nonzero_poly() -> impl Strategy<Value = Poly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn base() -> Poly {
    let b = &Poly::one() + &(&(&Poly::var(0) * &Poly::var(0)) + &(&Poly::var(1) * &Poly::var(1)));
    register_irreducible(&b);
    b
}

/// `p / (1 + x² + y²)^k`, exercising the registered-factor path.
fn conformal() -> impl Strategy<Value = RatFunc> {
    (poly(), 0u32..3).prop_map(|(p, k)| RatFunc::normalize(p, base().pow(k)).unwrap())
}

fn matrix() -> impl Strategy<Value = Matrix<Rat>> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-2i64..=2, c), r)
            .prop_map(move |rows| Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect(), c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn leibniz_rule(a in poly(), b in poly(), v in 0usize..2) {
        let lhs = (&a * &b).derivative(v);
        let rhs = &(&a.derivative(v) * &b) + &(&a * &b.derivative(v));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gcd_divides_and_recovers_common_factor(a in nonzero_poly(), b in nonzero_poly(), c in nonzero_poly()) {
        let g = (&a * &c).gcd(&(&b * &c));
        prop_assert!((&a * &c).div_exact(&g).is_some());
        prop_assert!((&b * &c).div_exact(&g).is_some());
        prop_assert!(g.div_exact(&c).is_some());
    }

    #[test]
    fn normalize_is_idempotent_and_reduced(p in poly(), q in nonzero_poly()) {
        let f = RatFunc::normalize(p, q).unwrap();
        let again = RatFunc::normalize(f.num().clone(), f.den().clone()).unwrap();
        prop_assert!(f.num().gcd(f.den()).is_one() || f.is_zero());
        prop_assert_eq!(again, f);
    }

    #[test]
    fn registered_factor_path_matches_gcd(a in conformal(), b in conformal()) {
        for f in [a.add(&b), a.mul(&b), a.derivative(0)] {
            prop_assert!(f.is_zero() || f.num().gcd(f.den()).is_one());
        }
        if !b.is_zero() {
            prop_assert_eq!(a.mul(&b).div(&b).unwrap(), a.clone());
        }
        prop_assert_eq!(a.add(&b).sub(&b), a);
    }

    #[test]
    fn antisymmetrize_is_a_projection(data in prop::collection::vec(-5i64..=5, 27)) {
        let t = Tensor::from_data(3, vec![Slot::Down; 3], data.into_iter().map(int).collect()).unwrap();
        let a = t.antisymmetrize(&[0, 1, 2]).unwrap();
        prop_assert_eq!(a.antisymmetrize(&[0, 1, 2]).unwrap(), a.clone());
        prop_assert!(a.symmetrize(&[0, 1]).unwrap().is_zero());
        let s = t.symmetrize(&[1, 2]).unwrap();
        prop_assert_eq!(s.symmetrize(&[1, 2]).unwrap(), s);
    }

    #[test]
    fn rank_nullity(m in matrix()) {
        let k = m.kernel();
        prop_assert_eq!(k.dim() + m.rank(), m.cols());
        for v in k.basis() {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(|x| *x == int(0)));
        }
    }

    #[test]
    fn preimage_is_monotone(m in matrix(), picks in prop::collection::vec(0usize..4, 0..3)) {
        let rows = m.rows();
        let unit = |i: usize| (0..rows).map(|j| int((j == i % rows) as i64)).collect::<Vec<Rat>>();
        let small = Subspace::span(rows, picks.iter().take(1).map(|&i| unit(i)).collect());
        let large = Subspace::span(rows, picks.iter().map(|&i| unit(i)).collect());
        let ps = m.preimage_subspace(&small).unwrap();
        let pl = m.preimage_subspace(&large).unwrap();
        prop_assert!(ps.is_subspace_of(&pl));
        prop_assert!(m.kernel().is_subspace_of(&ps));
    }

    #[test]
    fn double_perp(gens in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 0..4), sig in 0usize..4) {
        let b = Matrix::from_rows(
            (0..4).map(|i| (0..4).map(|j| if i == j { int(if i < sig { -1 } else { 1 }) } else { int(0) }).collect()).collect(),
            4,
        ).unwrap();
        let s = Subspace::span(4, gens.into_iter().map(|g| g.into_iter().map(int).collect()).collect());
        let pp = s.perp(&b).unwrap().perp(&b).unwrap();
        prop_assert_eq!(pp, s);
    }
}
