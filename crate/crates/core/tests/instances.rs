use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use adelic_core::coeff::{sum_vs_product_cokernel, EulerFamily, MonomialClass, ProductClass, RestrictedProduct};
use adelic_core::exactla::abelian::valuation;
use adelic_core::exactla::graded::{GradedContext, MonomialAtom};
use adelic_core::exactla::{AtomicModule, Window};
use adelic_core::instances::cech::koszul_local_cohomology;
use adelic_core::instances::hasse::{adelic_split, completion_exactness, verify_split, PresentedModule};
use adelic_core::instances::torus::{euler_component, lattice_euler_system, torus_cohomology, TorusRank1Instance};
use adelic_core::instances::PAdicElement;
use adelic_core::{IntMatrix, Rational};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn rational() -> impl Strategy<Value = Rational> {
    (-2000i64..=2000, 1i64..=360).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn padic_ring_operations_follow_the_rationals(a in rational(), b in rational(), pi in 0usize..4) {
        let p = PRIMES[pi];
        let (x, y) = (PAdicElement::from_rational(&a, p, 20).unwrap(), PAdicElement::from_rational(&b, p, 20).unwrap());
        let s = x.add(&y).unwrap();
        prop_assert!(s.agrees_with(&(a.clone() + b.clone())));
        let m = x.mul(&y).unwrap();
        prop_assert!(m.agrees_with(&(a.clone() * b.clone())));
        if !a.is_zero() {
            prop_assert_eq!(x.valuation(), Some(valuation(&a, p)));
        }
    }

    #[test]
    fn principal_part_leaves_an_integral_remainder(a in rational(), pi in 0usize..4) {
        let p = PRIMES[pi];
        let pp = PAdicElement::from_rational(&a, p, 24).unwrap().principal_part().unwrap();
        let rest = a - pp.clone();
        prop_assert!(rest.is_zero() || valuation(&rest, p) >= 0);
        // the principal part is supported at p alone
        prop_assert!(pp.is_zero() || PRIMES.iter().filter(|&&q| q != p).all(|&q| valuation(&pp, q) >= 0));
    }

    #[test]
    fn split_components_are_integral(targets in prop::collection::vec(rational(), 3)) {
        let primes = [2u64, 3, 5];
        let b: Vec<PAdicElement> = primes.iter().zip(&targets).map(|(&p, t)| PAdicElement::from_rational(t, p, 32).unwrap()).collect();
        let s = adelic_split(&primes, &b).unwrap();
        prop_assert!(verify_split(&primes, &b, &s).unwrap());
        for ((&p, t), a) in primes.iter().zip(&targets).zip(&s.components) {
            let exact = t.clone() + s.q.clone();
            prop_assert!(exact.is_zero() || valuation(&exact, p) >= 0);
            prop_assert!(a.agrees_with(&exact));
        }
    }

    #[test]
    fn presented_modules_read_back(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 2), 2), x in -50i64..50, y in -50i64..50) {
        let m = PresentedModule::new(&[2, 3], IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())).unwrap();
        let e = vec![Rational::from_integer(x.into()), Rational::from_integer(y.into())];
        let back = m.from_atoms(&m.to_atoms(&e).unwrap()).unwrap();
        prop_assert!(m.same_class(&back, &e));
    }

    #[test]
    fn completion_is_exact(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 2), 3), pi in 0usize..4) {
        let f = IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect());
        // injective maps only
        prop_assume!(adelic_core::exactla::rank::bareiss_rank(&f) == 2);
        prop_assert!(completion_exactness(&f, PRIMES[pi]).unwrap());
    }
}

#[test]
fn torus_h1_grows_with_the_subgroups() {
    for orders in [vec![1], vec![1, 2], vec![2, 3, 7], vec![1, 2, 3, 4, 5, 6]] {
        let h = torus_cohomology(&TorusRank1Instance { orders: orders.clone(), window: (-8, 2) }).unwrap();
        for d in -8..=2i64 {
            let want = if d < 0 && d % 2 == 0 { orders.len() } else { 0 };
            assert_eq!(h.dim(1, &[d]), want, "{orders:?} at {d}");
        }
    }
}

#[test]
fn euler_classes_on_the_subgroup_lattice_compose() {
    for orders in [vec![6], vec![4, 6], vec![8, 12]] {
        let inst = TorusRank1Instance { orders, window: (-4, 2) };
        lattice_euler_system(&inst).unwrap().check_composition_law().unwrap();
    }
    // e(z^2 ⊕ z^3) at C_2: only z^2 is fixed
    let c = euler_component(&[2, 3], 2);
    assert_eq!(c, MonomialClass { exponent: vec![1], unit: Rational::from_integer(2.into()) });
}

#[test]
fn local_cohomology_of_a_shifted_module() {
    // R(−1,0) = x·R shifts the negative quadrant by one in x
    let m = AtomicModule::from_atoms(vec![MonomialAtom::shifted(&[1, 0])]);
    let h = koszul_local_cohomology(2, &[vec![1, 0], vec![0, 1]], &m, Window::cube(2, -4, 2).unwrap()).unwrap();
    for a in -4..=2i64 {
        for b in -4..=2i64 {
            assert_eq!(h.dim(2, &[a, b]), usize::from(a <= 0 && b <= -1), "({a},{b})");
        }
    }
}

#[test]
fn explicit_components_break_the_tail() {
    // components 0 and 1 are ℚ[c]·c^{-1}; the rule still inverts c everywhere
    let ctx = GradedContext::new(vec![2], Window::new(vec![-6], vec![2]).unwrap()).unwrap();
    let qc = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
    let shifted = AtomicModule::from_atoms(vec![MonomialAtom::shifted(&[-1])]);
    let rp = RestrictedProduct::countable(BTreeMap::from([(0, shifted.clone()), (1, shifted)]), qc);
    let fam = EulerFamily::with_rule(|q| ProductClass {
        factors: BTreeMap::from([(q, MonomialClass::monomial(vec![1]))]),
        tail: Some(MonomialClass::one(1)),
    });
    let rep = sum_vs_product_cokernel(&ctx, &rp, &fam).unwrap();
    assert!(rep.iso_on_cohomology);
    // degree −2: the shifted components contain c^{-1}, the others do not
    assert_eq!(rep.cokernel["(-2)"].truncated_dim(5), 3);
    assert_eq!(rep.cokernel["(-4)"].truncated_dim(5), 5);
}
