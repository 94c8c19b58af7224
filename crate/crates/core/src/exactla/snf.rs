//! Smith normal form with unimodular transforms, plus the lattice
//! operations built on it (kernels, image bases, subquotients).



use super::matrix::Matrix;
use crate::scalar::EuclidInt;

/// `u * m * v == d`, with `d` diagonal, nonnegative and successively dividing.
#[derive(Clone, Debug)]
pub struct SmithForm<T: EuclidInt> {
    pub u: Matrix<T>,
    pub d: Matrix<T>,
    pub v: Matrix<T>,
    pub u_inv: Matrix<T>,
    pub v_inv: Matrix<T>,
}

impl<T: EuclidInt> SmithForm<T> {
    pub fn diagonal(&self) -> Vec<T> {
        let n = self.d.nrows().min(self.d.ncols());
        (0..n).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|x| !x.is_zero()).count()
    }

    /// Nonzero diagonal entries different from one.
    pub fn invariant_factors(&self) -> Vec<T> {
        self.diagonal().into_iter().filter(|x| !x.is_zero() && !x.is_one()).collect()
    }
}

struct Calc<T> {
    m: Matrix<T>,
    u: Matrix<T>,
    u_inv: Matrix<T>,
    v: Matrix<T>,
    v_inv: Matrix<T>,
}

impl<T: EuclidInt> Calc<T> {
    // row_a += k * row_b
    fn add_row(&mut self, a: usize, b: usize, k: &T) {
        for j in 0..self.m.ncols() {
            let x = self.m[(b, j)].clone() * k.clone();
            self.m[(a, j)] = self.m[(a, j)].clone() + x;
        }
        for j in 0..self.u.ncols() {
            let x = self.u[(b, j)].clone() * k.clone();
            self.u[(a, j)] = self.u[(a, j)].clone() + x;
        }
        // inverse: col_b -= k * col_a
        for i in 0..self.u_inv.nrows() {
            let x = self.u_inv[(i, a)].clone() * k.clone();
            self.u_inv[(i, b)] = self.u_inv[(i, b)].clone() - x;
        }
    }

    // col_a += k * col_b
    fn add_col(&mut self, a: usize, b: usize, k: &T) {
        for i in 0..self.m.nrows() {
            let x = self.m[(i, b)].clone() * k.clone();
            self.m[(i, a)] = self.m[(i, a)].clone() + x;
        }
        for i in 0..self.v.nrows() {
            let x = self.v[(i, b)].clone() * k.clone();
            self.v[(i, a)] = self.v[(i, a)].clone() + x;
        }
        for j in 0..self.v_inv.ncols() {
            let x = self.v_inv[(a, j)].clone() * k.clone();
            self.v_inv[(b, j)] = self.v_inv[(b, j)].clone() - x;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.m.ncols() {
            self.m[(a, j)] = -self.m[(a, j)].clone();
        }
        for j in 0..self.u.ncols() {
            self.u[(a, j)] = -self.u[(a, j)].clone();
        }
        for i in 0..self.u_inv.nrows() {
            self.u_inv[(i, a)] = -self.u_inv[(i, a)].clone();
        }
    }

    fn smallest_nonzero(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.m.nrows() {
            for j in t..self.m.ncols() {
                let x = &self.m[(i, j)];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.m[(bi, bj)].abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn run(&mut self) {
        let n = self.m.nrows().min(self.m.ncols());
        let mut t = 0;
        while t < n {
            let Some((pi, pj)) = self.smallest_nonzero(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..self.m.nrows() {
                    if self.m[(i, t)].is_zero() {
                        continue;
                    }
                    let q = self.m[(i, t)].div_floor(&self.m[(t, t)]);
                    self.add_row(i, t, &-q);
                    if !self.m[(i, t)].is_zero() {
                        self.swap_rows(t, i);
                        dirty = true;
                    }
                }
                for j in t + 1..self.m.ncols() {
                    if self.m[(t, j)].is_zero() {
                        continue;
                    }
                    let q = self.m[(t, j)].div_floor(&self.m[(t, t)]);
                    self.add_col(j, t, &-q);
                    if !self.m[(t, j)].is_zero() {
                        self.swap_cols(t, j);
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
                // pivot must divide the remaining block
                let pivot = self.m[(t, t)].clone();
                let mut offender = None;
                'outer: for i in t + 1..self.m.nrows() {
                    for j in t + 1..self.m.ncols() {
                        if !self.m[(i, j)].is_multiple_of(&pivot) {
                            offender = Some(i);
                            break 'outer;
                        }
                    }
                }
                match offender {
                    Some(i) => self.add_row(t, i, &T::one()),
                    None => break,
                }
            }
            if self.m[(t, t)].is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
    }
}

/// Smith normal form of an arbitrary integer matrix.
pub fn smith_normal_form<T: EuclidInt>(m: &Matrix<T>) -> SmithForm<T> {
    let (r, c) = m.shape();
    let mut calc = Calc {
        m: m.clone(),
        u: Matrix::identity(r),
        u_inv: Matrix::identity(r),
        v: Matrix::identity(c),
        v_inv: Matrix::identity(c),
    };
    calc.run();
    SmithForm { u: calc.u, d: calc.m, v: calc.v, u_inv: calc.u_inv, v_inv: calc.v_inv }
}

/// Integer kernel basis of `m` (as columns).
pub fn kernel_basis<T: EuclidInt>(m: &Matrix<T>) -> Matrix<T> {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let cols: Vec<usize> = (rank..m.ncols()).collect();
    snf.v.select_cols(&cols)
}

/// A lattice basis (as columns) of the column span of `g`, together with
/// the Smith data needed to express lattice members in that basis.
pub struct LatticeBasis<T: EuclidInt> {
    pub basis: Matrix<T>,
    snf: SmithForm<T>,
}

impl<T: EuclidInt> LatticeBasis<T> {
    pub fn of_columns(g: &Matrix<T>) -> Self {
        let snf = smith_normal_form(g);
        let rank = snf.rank();
        let diag = snf.diagonal();
        let basis = Matrix::from_fn(g.nrows(), rank, |i, j| snf.u_inv[(i, j)].clone() * diag[j].clone());
        LatticeBasis { basis, snf }
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Coordinates of `x` in the basis, or `None` if `x` is not in the lattice.
    pub fn coordinates(&self, x: &[T]) -> Option<Vec<T>> {
        let ux = self.snf.u.apply(x);
        let diag = self.snf.diagonal();
        let rank = self.rank();
        if ux[rank..].iter().any(|v| !v.is_zero()) {
            return None;
        }
        let mut out = Vec::with_capacity(rank);
        for j in 0..rank {
            let (q, r) = ux[j].div_rem(&diag[j]);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }
}

/// Rank and torsion of the quotient `Z / B` of lattices given by column
/// generators, where `B ⊆ Z`. Returns `None` if `B` is not contained in `Z`.
pub fn subquotient<T: EuclidInt>(z_gens: &Matrix<T>, b_gens: &Matrix<T>) -> Option<(usize, Vec<T>)> {
    let z = LatticeBasis::of_columns(z_gens);
    let k = z.rank();
    let mut coords = Matrix::zeros(k, b_gens.ncols());
    for j in 0..b_gens.ncols() {
        let col: Vec<T> = (0..b_gens.nrows()).map(|i| b_gens[(i, j)].clone()).collect();
        let c = z.coordinates(&col)?;
        for (i, v) in c.into_iter().enumerate() {
            coords[(i, j)] = v;
        }
    }
    let snf = smith_normal_form(&coords);
    Some((k - snf.rank(), snf.invariant_factors()))
}

/// Determinant by fraction-free elimination (square matrices only).
pub fn determinant<T: EuclidInt>(m: &Matrix<T>) -> T {
    assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    let mut a = m.clone();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n {
        if a[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                return T::zero();
            };
            a.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                a[(i, j)] = v / prev.clone();
            }
        }
        prev = a[(k, k)].clone();
    }
    if n == 0 {
        T::one()
    } else {
        sign * a[(n - 1, n - 1)].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn check<T: EuclidInt>(m: &Matrix<T>) -> SmithForm<T> {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.u_inv), Matrix::identity(m.nrows()));
        assert_eq!(s.v.mul(&s.v_inv), Matrix::identity(m.ncols()));
        let diag = s.diagonal();
        for w in diag.windows(2) {
            if !w[1].is_zero() {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        s
    }

    #[test]
    fn snf_two_by_two() {
        let s = check(&Matrix::from_rows(vec![vec![2i64, 4], vec![6, 8]]));
        assert_eq!(s.diagonal(), vec![2, 4]);
    }

    #[test]
    fn snf_identity_and_zero() {
        let s = check(&Matrix::<i64>::identity(3));
        assert_eq!(s.diagonal(), vec![1, 1, 1]);
        let z = check(&Matrix::<i64>::zeros(2, 3));
        assert!(z.d.is_zero());
    }

    #[test]
    fn snf_bigint_rectangular() {
        let m = Matrix::from_rows(vec![
            vec![BigInt::from(4), BigInt::from(6), BigInt::from(10)],
            vec![BigInt::from(6), BigInt::from(9), BigInt::from(15)],
        ]);
        let s = check(&m);
        assert_eq!(s.diagonal(), vec![BigInt::from(1), BigInt::from(0)]);
    }

    #[test]
    fn unimodular_transforms() {
        let m = Matrix::from_rows(vec![vec![3i64, 5, 7], vec![2, 0, 4], vec![1, 1, 1]]);
        let s = check(&m);
        assert_eq!(determinant(&s.u).abs(), 1);
        assert_eq!(determinant(&s.v).abs(), 1);
    }

    #[test]
    fn kernel_and_subquotient() {
        let m = Matrix::from_rows(vec![vec![1i64, 1, 0]]);
        let k = kernel_basis(&m);
        assert_eq!(k.ncols(), 2);
        assert!(m.mul(&k).is_zero());
        // Z^1 / 2Z
        let (rank, tors) = subquotient(&Matrix::from_rows(vec![vec![1i64]]), &Matrix::from_rows(vec![vec![2i64]])).unwrap();
        assert_eq!((rank, tors), (0, vec![2]));
        // 2Z is not a superlattice of Z
        assert!(subquotient(&Matrix::from_rows(vec![vec![2i64]]), &Matrix::from_rows(vec![vec![1i64]])).is_none());
    }

    #[test]
    fn determinant_small() {
        let m = Matrix::from_rows(vec![vec![2i64, 1], vec![7, 4]]);
        assert_eq!(determinant(&m), 1);
        let m = Matrix::from_rows(vec![vec![0i64, 1, 2], vec![1, 0, 3], vec![4, -3, 8]]);
        assert_eq!(determinant(&m), -2);
    }
}
