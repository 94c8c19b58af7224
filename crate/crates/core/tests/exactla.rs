use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use adelic_core::exactla::abelian::{AbelianContext, NumberAtom};
use adelic_core::exactla::rank::{bareiss_rank, rational_rank};
use adelic_core::exactla::snf::{determinant, smith_normal_form};
use adelic_core::exactla::{cohomology, AbelianGroup, AtomicModule, CochainComplex, ModuleMap};
use adelic_core::{IntMatrix, Matrix, RatMatrix, Rational};

fn small_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-6i64..=6, c), r))
}

fn big(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
}

/// Leibniz expansion.
fn leibniz(m: &[Vec<i64>]) -> BigInt {
    fn perms(n: usize) -> Vec<(Vec<usize>, i64)> {
        if n == 0 {
            return vec![(vec![], 1)];
        }
        let mut out = Vec::new();
        for (p, s) in perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                // moving the new element past n-1-pos entries
                let sign = if (n - 1 - pos).is_multiple_of(2) { s } else { -s };
                out.push((q, sign));
            }
        }
        out
    }
    perms(m.len())
        .into_iter()
        .map(|(p, s)| p.iter().enumerate().fold(BigInt::from(s), |acc, (i, &j)| acc * m[i][j]))
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// Determinantal divisors `d_k` = gcd of the k×k minors.
fn determinantal_divisors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let (r, c) = (m.len(), m[0].len());
    let mut out = Vec::new();
    for k in 1..=r.min(c) {
        let mut g = BigInt::zero();
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let minor: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j]).collect()).collect();
                g = g.gcd(&leibniz(&minor));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(g);
    }
    out
}

/// Gaussian elimination over ℚ.
fn naive_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect();
    let (rows, cols) = (a.len(), a[0].len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        for i in 0..rows {
            if i != rank && !a[i][c].is_zero() {
                let f = a[i][c].clone() / a[rank][c].clone();
                let pivot = a[rank].clone();
                for (x, y) in a[i].iter_mut().zip(pivot) {
                    *x -= y * f.clone();
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_reconstructs(rows in small_matrix(4)) {
        let m = big(&rows);
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(m.nrows()));
        prop_assert_eq!(s.v.mul(&s.v_inv), IntMatrix::identity(m.ncols()));
        let diag = s.diagonal();
        for w in diag.windows(2) {
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
        }
    }

    #[test]
    fn diagonal_matches_determinantal_divisors(rows in small_matrix(3)) {
        let d = determinantal_divisors(&rows);
        let s = smith_normal_form(&big(&rows));
        let diag: Vec<BigInt> = s.diagonal().into_iter().filter(|x| !x.is_zero()).collect();
        prop_assert_eq!(diag.len(), d.len());
        for k in 0..d.len() {
            let expected = if k == 0 { d[0].clone() } else { d[k].clone() / d[k - 1].clone() };
            prop_assert_eq!(&diag[k], &expected);
        }
    }

    #[test]
    fn ranks_agree(rows in small_matrix(5)) {
        let r = naive_rank(&rows);
        prop_assert_eq!(bareiss_rank(&big(&rows)), r);
        let small: Matrix<i64> = Matrix::from_rows(rows.clone());
        prop_assert_eq!(smith_normal_form(&small).rank(), r);
        let q: RatMatrix = Matrix::from_rows(rows.iter().map(|x| x.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect());
        prop_assert_eq!(rational_rank(&q), r);
    }

    #[test]
    fn determinant_by_expansion(n in 1usize..=4, seed in prop::collection::vec(-5i64..=5, 16)) {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| seed[i * n..i * n + n].to_vec()).collect();
        prop_assert_eq!(determinant(&big(&rows)), leibniz(&rows));
    }

    #[test]
    fn two_term_integral_cohomology(rows in small_matrix(3)) {
        // ℤ^c → ℤ^r: kernel free of rank c − rank, cokernel by determinantal divisors
        let (r, c) = (rows.len(), rows[0].len());
        let zc = AtomicModule::from_atoms(vec![NumberAtom::Integer; c]);
        let zr = AtomicModule::from_atoms(vec![NumberAtom::Integer; r]);
        let q = rows.iter().map(|x| x.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        let d = ModuleMap::new(zc.clone(), zr.clone(), Matrix::from_rows(q)).unwrap();
        let cx = CochainComplex::new(AbelianContext::integers(), vec![zc, zr], vec![d]).unwrap();
        let h = cohomology(&cx).unwrap();
        let dd = determinantal_divisors(&rows);
        let torsion: Vec<BigInt> = (0..dd.len())
            .map(|k| if k == 0 { dd[0].clone() } else { dd[k].clone() / dd[k - 1].clone() })
            .map(|x| x.abs())
            .filter(|x| !x.is_one())
            .collect();
        prop_assert_eq!(h.group(0), AbelianGroup::free(c - dd.len()));
        prop_assert_eq!(h.group(1), AbelianGroup::with_torsion(r - dd.len(), torsion));
    }
}

#[test]
fn cyclic_groups_in_a_complex() {
    // ℤ --2--> ℤ --0--> ℤ/4: H^0 = 0, H^1 = ℤ/2, H^2 = ℤ/4
    let z = || AtomicModule::from_atoms(vec![NumberAtom::Integer]);
    let c4 = AtomicModule::from_atoms(vec![NumberAtom::Cyclic(4)]);
    let d0 = ModuleMap::new(z(), z(), Matrix::from_rows(vec![vec![Rational::from_integer(2.into())]])).unwrap();
    let d1 = ModuleMap::zero(z(), c4.clone());
    let cx = CochainComplex::new(AbelianContext::integers(), vec![z(), z(), c4], vec![d0, d1]).unwrap();
    let h = cohomology(&cx).unwrap();
    assert!(h.group(0).is_zero());
    assert_eq!(h.group(1), AbelianGroup::with_torsion(0, [BigInt::from(2)]));
    assert_eq!(h.group(2), AbelianGroup::with_torsion(0, [BigInt::from(4)]));
}
