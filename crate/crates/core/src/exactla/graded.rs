//! Graded backend: degreewise finite multigraded rational vector spaces.
//!
//! Atoms are boxes of monomials `x^e` in `ℚ[x_1, …, x_n]`, one bound pair
//! per variable; a missing lower bound means the variable is inverted, a
//! finite upper bound means it acts nilpotently. Variable `i` has degree
//! `w_i` in coordinate `i` of the multigrading, so every atom is at most
//! one-dimensional in each multidegree. Maps send `x^e` to `c · x^e`
//! whenever both atoms contain `x^e` and are otherwise zero, so everything
//! is checked and computed one multidegree at a time.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::module::{Atom, AtomicModule, CochainComplex, ModuleMap};
use super::rank::rational_rank;
use super::table::{multidegree_key, CohomologyTable, Window};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonomialAtom {
    pub lower: Vec<Option<i64>>,
    pub upper: Vec<Option<i64>>,
}

impl MonomialAtom {
    /// The polynomial ring itself in `n` variables.
    pub fn polynomial(n: usize) -> Self {
        MonomialAtom { lower: vec![Some(0); n], upper: vec![None; n] }
    }

    /// The free module generated in exponent `shift`.
    pub fn shifted(shift: &[i64]) -> Self {
        MonomialAtom { lower: shift.iter().map(|&s| Some(s)).collect(), upper: vec![None; shift.len()] }
    }

    /// The residue field `ℚ` in exponent zero.
    pub fn residue_field(n: usize) -> Self {
        MonomialAtom { lower: vec![Some(0); n], upper: vec![Some(0); n] }
    }

    pub fn nvars(&self) -> usize {
        self.lower.len()
    }

    pub fn contains_exponent(&self, e: &[i64]) -> bool {
        e.iter().enumerate().all(|(i, &x)| {
            self.lower[i].is_none_or(|l| x >= l) && self.upper[i].is_none_or(|u| x <= u)
        })
    }

    pub fn is_inverted(&self, var: usize) -> bool {
        self.lower[var].is_none()
    }

    /// Colimit along multiplication by the variables in `vars`; zero when one
    /// of them acts nilpotently.
    pub fn invert(&self, vars: &[usize]) -> Option<Self> {
        let mut out = self.clone();
        for &v in vars {
            if self.upper[v].is_some() {
                return None;
            }
            out.lower[v] = None;
        }
        Some(out)
    }

    /// Inverts the support of a monomial exponent vector.
    pub fn invert_monomial(&self, exponent: &[i64]) -> Option<Self> {
        let vars: Vec<usize> = (0..exponent.len()).filter(|&i| exponent[i] != 0).collect();
        self.invert(&vars)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedContext {
    /// Degree of each variable in its own coordinate.
    pub weights: Vec<i64>,
    pub window: Window,
}

impl GradedContext {
    pub fn new(weights: Vec<i64>, window: Window) -> Result<Self> {
        if weights.len() != window.rank() {
            return Err(Error::InvalidWindow(format!(
                "window of rank {} for {} variables",
                window.rank(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w <= 0) {
            return Err(Error::InvalidWindow("variable weights must be positive".into()));
        }
        Ok(GradedContext { weights, window })
    }

    /// Finely graded ring in `n` variables.
    pub fn fine(window: Window) -> Self {
        GradedContext { weights: vec![1; window.rank()], window }
    }

    /// Exponent of the monomial in multidegree `d`, if there is one.
    pub fn exponent(&self, d: &[i64]) -> Option<Vec<i64>> {
        d.iter().zip(&self.weights).map(|(x, w)| if x % w == 0 { Some(x / w) } else { None }).collect()
    }

    pub fn multidegree(&self, e: &[i64]) -> Vec<i64> {
        e.iter().zip(&self.weights).map(|(x, w)| x * w).collect()
    }
}

/// Indices of the atoms of `m` that are nonzero in multidegree `d`.
pub fn basis_at(ctx: &GradedContext, m: &AtomicModule<MonomialAtom>, d: &[i64]) -> Vec<usize> {
    match ctx.exponent(d) {
        Some(e) => (0..m.len()).filter(|&i| m.atoms[i].contains_exponent(&e)).collect(),
        None => Vec::new(),
    }
}

/// The map in multidegree `d`, in the bases of [`basis_at`].
pub fn evaluate(ctx: &GradedContext, f: &ModuleMap<MonomialAtom>, d: &[i64]) -> Matrix<Rational> {
    let rows = basis_at(ctx, &f.codomain, d);
    let cols = basis_at(ctx, &f.domain, d);
    f.matrix.select_rows(&rows).select_cols(&cols)
}

/// Dimension of a module in multidegree `d`.
pub fn dim_at(ctx: &GradedContext, m: &AtomicModule<MonomialAtom>, d: &[i64]) -> usize {
    basis_at(ctx, m, d).len()
}

impl Atom for MonomialAtom {
    type Context = GradedContext;

    fn canonical_to(&self, to: &Self) -> bool {
        self.nvars() == to.nvars()
    }

    fn label(&self) -> String {
        let n = self.nvars();
        if n == 0 {
            return "Q".into();
        }
        let parts: Vec<String> = (0..n)
            .map(|i| match (self.lower[i], self.upper[i]) {
                (None, None) => format!("x{i}^±"),
                (Some(l), None) => format!("x{i}^≥{l}"),
                (None, Some(u)) => format!("x{i}^≤{u}"),
                (Some(l), Some(u)) if l == u => format!("x{i}^{l}"),
                (Some(l), Some(u)) => format!("x{i}^{l}..{u}"),
            })
            .collect();
        format!("Q[{}]", parts.join(","))
    }

    fn composite_vanishes(ctx: &GradedContext, f: &ModuleMap<Self>, g: &ModuleMap<Self>) -> bool {
        ctx.window.degrees().par_iter().all(|d| evaluate(ctx, g, d).mul(&evaluate(ctx, f, d)).is_zero())
    }

    fn composite_equals(ctx: &GradedContext, f: &ModuleMap<Self>, g: &ModuleMap<Self>, h: &ModuleMap<Self>) -> bool {
        ctx.window
            .degrees()
            .par_iter()
            .all(|d| evaluate(ctx, g, d).mul(&evaluate(ctx, f, d)) == evaluate(ctx, h, d))
    }

    fn cohomology(ctx: &GradedContext, c: &CochainComplex<Self>) -> Result<CohomologyTable> {
        Ok(graded_cohomology(ctx, c))
    }
}

fn graded_cohomology(ctx: &GradedContext, c: &CochainComplex<MonomialAtom>) -> CohomologyTable {
    let n = c.len();
    let degrees = ctx.window.degrees();
    let per_degree: Vec<Vec<usize>> = degrees
        .par_iter()
        .map(|d| {
            let dims: Vec<usize> = c.objects.iter().map(|o| dim_at(ctx, o, d)).collect();
            let ranks: Vec<usize> = c.differentials.iter().map(|f| rational_rank(&evaluate(ctx, f, d))).collect();
            (0..n)
                .map(|s| {
                    let out = if s < ranks.len() { ranks[s] } else { 0 };
                    let inc = if s > 0 { ranks[s - 1] } else { 0 };
                    dims[s] - out - inc
                })
                .collect()
        })
        .collect();
    let mut table: BTreeMap<usize, BTreeMap<String, usize>> = (0..n).map(|s| (s, BTreeMap::new())).collect();
    for (d, h) in degrees.iter().zip(per_degree) {
        for (s, v) in h.into_iter().enumerate() {
            if v > 0 {
                table.get_mut(&s).expect("degree present").insert(multidegree_key(d), v);
            }
        }
    }
    // Maps preserve multidegree, so no value depends on degrees outside the window.
    CohomologyTable::Graded { window: ctx.window.clone(), degrees: table, boundary: Vec::new() }
}

/// Euler characteristic bookkeeping in one multidegree:
/// `Σ (−1)^s dim C^s` for the complex.
pub fn euler_characteristic_at(ctx: &GradedContext, c: &CochainComplex<MonomialAtom>, d: &[i64]) -> i64 {
    c.objects
        .iter()
        .enumerate()
        .map(|(s, o)| {
            let v = dim_at(ctx, o, d) as i64;
            if s % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .sum()
}

/// Whether `f` is zero in every multidegree of the window.
pub fn vanishes_in_window(ctx: &GradedContext, f: &ModuleMap<MonomialAtom>) -> bool {
    ctx.window.degrees().iter().all(|d| evaluate(ctx, f, d).entries().all(|(_, _, x)| x.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::module::cohomology;
    use crate::rat;

    #[test]
    fn two_term_local_cohomology_in_one_variable() {
        // ℚ[x] → ℚ[x^±]: cokernel has one dimension in each negative degree
        let ctx = GradedContext::fine(Window::cube(1, -4, 3).unwrap());
        let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        let l = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1).invert(&[0]).unwrap()]);
        let d = ModuleMap::new(r.clone(), l.clone(), Matrix::from_rows(vec![vec![rat(1)]])).unwrap();
        let c = CochainComplex::new(ctx, vec![r, l], vec![d]).unwrap();
        let h = cohomology(&c).unwrap();
        assert_eq!(h.total_dim(0), 0);
        for a in -4..0 {
            assert_eq!(h.dim(1, &[a]), 1);
        }
        assert_eq!(h.total_dim(1), 4);
    }

    #[test]
    fn weighted_variable_lives_in_even_degrees() {
        let ctx = GradedContext::new(vec![2], Window::cube(1, -6, 6).unwrap()).unwrap();
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        let dims: Vec<usize> = (-6..=6).map(|d| dim_at(&ctx, &m, &[d])).collect();
        assert_eq!(dims, vec![0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn nilpotent_variables_localize_to_zero() {
        assert_eq!(MonomialAtom::residue_field(1).invert(&[0]), None);
        let a = MonomialAtom::polynomial(2).invert_monomial(&[2, 0]).unwrap();
        assert!(a.is_inverted(0) && !a.is_inverted(1));
    }

    #[test]
    fn composite_through_smaller_atom_is_not_canonical() {
        // ℚ[x^±] → ℚ[x] → ℚ[x^±] is zero in negative degrees only
        let ctx = GradedContext::fine(Window::cube(1, -2, 2).unwrap());
        let l = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1).invert(&[0]).unwrap()]);
        let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        let one = Matrix::from_rows(vec![vec![rat(1)]]);
        let f = ModuleMap::new(l.clone(), r, one.clone()).unwrap();
        let g = ModuleMap::new(f.codomain.clone(), l.clone(), one.clone()).unwrap();
        let id = ModuleMap::new(l.clone(), l, one).unwrap();
        assert!(!MonomialAtom::composite_equals(&ctx, &f, &g, &id));
        assert!(!MonomialAtom::composite_vanishes(&ctx, &f, &g));
    }
}
