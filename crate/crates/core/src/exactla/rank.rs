//! Fraction-free (Bareiss) elimination for ranks over the rationals.

use num_integer::Integer;
use num_traits::One;

use super::matrix::Matrix;
use crate::scalar::{EuclidInt, ExactField};

/// Rank of an integer matrix over its fraction field, by Bareiss elimination.
pub fn bareiss_rank<T: EuclidInt>(m: &Matrix<T>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut prev = T::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else { continue };
        a.swap_rows(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = a[(i, j)].clone() * a[(r, c)].clone() - a[(i, c)].clone() * a[(r, j)].clone();
                a[(i, j)] = v / prev.clone();
            }
            a[(i, c)] = T::zero();
        }
        prev = a[(r, c)].clone();
        r += 1;
    }
    r
}

/// Clears denominators row by row; the row space is unchanged.
pub fn clear_denominators<F: ExactField>(m: &Matrix<F>) -> Matrix<F::Int> {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let l = m.row(i).iter().fold(F::Int::one(), |acc, x| acc.lcm(&x.denom_int()));
        for j in 0..m.ncols() {
            let x = &m[(i, j)];
            out[(i, j)] = x.numer_int() * (l.clone() / x.denom_int());
        }
    }
    out
}

/// Rank of a rational matrix.
pub fn rational_rank<F: ExactField>(m: &Matrix<F>) -> usize {
    bareiss_rank(&clear_denominators(m))
}

/// Rational kernel basis (columns), by reduced row echelon form.
pub fn rational_kernel<F: ExactField>(m: &Matrix<F>) -> Matrix<F> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else { continue };
        a.swap_rows(r, p);
        let inv = F::one() / a[(r, c)].clone();
        for j in 0..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    let v = a[(r, j)].clone() * f.clone();
                    a[(i, j)] = a[(i, j)].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut k = Matrix::zeros(cols, free.len());
    for (t, &f) in free.iter().enumerate() {
        k[(f, t)] = F::one();
        for (row, &pc) in pivots.iter().enumerate() {
            k[(pc, t)] = -a[(row, f)].clone();
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::{BigRational, Rational64};

    #[test]
    fn ranks_agree_with_hand_counts() {
        let m = Matrix::from_rows(vec![vec![1i64, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(bareiss_rank(&m), 2);
        let z: Matrix<i64> = Matrix::zeros(3, 4);
        assert_eq!(bareiss_rank(&z), 0);
        assert_eq!(bareiss_rank(&Matrix::<BigInt>::identity(4)), 4);
    }

    #[test]
    fn rational_rank_and_kernel() {
        let q = |n: i64, d: i64| Rational64::new(n, d);
        let m = Matrix::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(3, 2), q(1, 1)]]);
        assert_eq!(rational_rank(&m), 1);
        let k = rational_kernel(&m);
        assert_eq!(k.ncols(), 1);
        assert!(m.mul(&k).is_zero());
        let big = m.map(|x| BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom())));
        assert_eq!(rational_rank(&big), 1);
    }
}
