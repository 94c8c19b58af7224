//! Coefficient systems on posets, localization systems, Euler-class
//! localization and restricted products.

pub mod euler;
pub mod localization;
pub mod product;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::exactla::{Atom, AtomicModule, ModuleMap};
use crate::poset::{all_flags, face, Flag, Poset};
use crate::{Error, Result};

pub use euler::{euler_localize, EulerAtom, EulerClassSystem, EulerLocalization, MonomialClass, Stabilization};
pub use localization::{
    check_absorbative, check_functor_squares, Composite, check_naturality, localize_map, localize_module, AbsorbativeReport, FnSystem,
    IdentitySystem, InversionSystem, LocalizationSystem, Side,
};
pub use product::{
    iterated_cokernel, localize_product, sum_vs_product_cokernel, DegreePiece, EulerFamily, LocalizedProduct,
    ProductClass, Restriction, RestrictedProduct, SumProductReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variance {
    /// Maps `M(℘₁) → M(℘₂)` for `℘₁ ≥ ℘₂` (a coefficient system).
    Contravariant,
    /// Maps `N(℘₂) → N(℘₁)` for `℘₁ ≥ ℘₂` (a dual coefficient system).
    Covariant,
}

/// A functor from a poset to atomic modules. Structure maps are stored for
/// every strictly comparable pair, keyed by `(source, target)` element.
#[derive(Clone, Debug)]
pub struct CoefficientSystem<A: Atom> {
    pub poset: Poset,
    pub variance: Variance,
    pub values: Vec<AtomicModule<A>>,
    pub maps: BTreeMap<(usize, usize), ModuleMap<A>>,
}

/// Same data with covariant maps.
pub type DualCoefficientSystem<A> = CoefficientSystem<A>;

impl<A: Atom> CoefficientSystem<A> {
    /// Validates that a map is given for each strictly comparable pair in the
    /// direction fixed by `variance`, with matching endpoints.
    pub fn new(
        poset: Poset,
        variance: Variance,
        values: Vec<AtomicModule<A>>,
        maps: BTreeMap<(usize, usize), ModuleMap<A>>,
    ) -> Result<Self> {
        if values.len() != poset.len() {
            return Err(Error::InvalidSystem(format!("{} values on {} elements", values.len(), poset.len())));
        }
        for p in 0..poset.len() {
            for q in poset.below(p) {
                let key = match variance {
                    Variance::Contravariant => (p, q),
                    Variance::Covariant => (q, p),
                };
                let f = maps.get(&key).ok_or_else(|| {
                    Error::InvalidSystem(format!("missing map {} -> {}", poset.id(key.0), poset.id(key.1)))
                })?;
                if f.domain.atoms != values[key.0].atoms || f.codomain.atoms != values[key.1].atoms {
                    return Err(Error::InvalidSystem(format!(
                        "map {} -> {} has the wrong endpoints",
                        poset.id(key.0),
                        poset.id(key.1)
                    )));
                }
            }
        }
        if maps.len() != comparable_pairs(&poset) {
            return Err(Error::InvalidSystem("maps given for incomparable pairs".into()));
        }
        Ok(CoefficientSystem { poset, variance, values, maps })
    }

    /// Builds the system from maps along cover relations, composing along
    /// chains. The composite is taken along the lexicographically first
    /// chain; [`CoefficientSystem::check_functoriality`] confirms independence.
    pub fn from_covers(
        poset: Poset,
        variance: Variance,
        values: Vec<AtomicModule<A>>,
        cover_maps: BTreeMap<(usize, usize), ModuleMap<A>>,
    ) -> Result<Self> {
        let mut maps = BTreeMap::new();
        // descending chains p > … > q through covers, shortest first
        for p in 0..poset.len() {
            for q in poset.below(p) {
                let mut path = vec![p];
                while *path.last().unwrap() != q {
                    let cur = *path.last().unwrap();
                    let next = poset
                        .covers()
                        .iter()
                        .filter(|c| c.0 == cur && poset.leq(q, c.1))
                        .map(|c| c.1)
                        .next()
                        .expect("covers reach every lower element");
                    path.push(next);
                }
                if variance == Variance::Covariant {
                    path.reverse();
                }
                let mut f = ModuleMap::identity(values[path[0]].clone());
                for w in path.windows(2) {
                    let g = cover_maps.get(&(w[0], w[1])).ok_or_else(|| {
                        Error::InvalidSystem(format!("missing cover map {} -> {}", poset.id(w[0]), poset.id(w[1])))
                    })?;
                    f = ModuleMap { domain: f.domain.clone(), codomain: g.codomain.clone(), matrix: g.matrix.mul(&f.matrix) };
                }
                f.validate()?;
                maps.insert((path[0], *path.last().unwrap()), f);
            }
        }
        Self::new(poset, variance, values, maps)
    }

    /// The constant system with identity structure maps.
    pub fn constant(poset: Poset, variance: Variance, m: AtomicModule<A>) -> Self {
        let values = vec![m.clone(); poset.len()];
        let mut maps = BTreeMap::new();
        for p in 0..poset.len() {
            for q in poset.below(p) {
                let key = if variance == Variance::Contravariant { (p, q) } else { (q, p) };
                maps.insert(key, ModuleMap::identity(m.clone()));
            }
        }
        CoefficientSystem { poset, variance, values, maps }
    }

    /// Structure map between two elements (identity on equal elements).
    pub fn map(&self, from: usize, to: usize) -> Result<ModuleMap<A>> {
        if from == to {
            return Ok(ModuleMap::identity(self.values[from].clone()));
        }
        self.maps.get(&(from, to)).cloned().ok_or_else(|| {
            Error::IndexOutOfRange(format!("no structure map {} -> {}", self.poset.id(from), self.poset.id(to)))
        })
    }

    /// Restriction `M(℘₁) → M(℘₂)` for `℘₁ ≥ ℘₂`.
    pub fn restriction(&self, p1: usize, p2: usize) -> Result<ModuleMap<A>> {
        if !self.poset.leq(p2, p1) {
            return Err(Error::InvalidPoset(format!("{} ≥ {} fails", self.poset.id(p1), self.poset.id(p2))));
        }
        match self.variance {
            Variance::Contravariant => self.map(p1, p2),
            Variance::Covariant => self.map(p2, p1),
        }
    }

    /// Composites along every chain of length three agree with the direct map.
    pub fn check_functoriality(&self, ctx: &A::Context) -> Result<()> {
        let n = self.poset.len();
        for a in 0..n {
            for b in self.poset.below(a) {
                for c in self.poset.below(b) {
                    let (x, y, z) = match self.variance {
                        Variance::Contravariant => (a, b, c),
                        Variance::Covariant => (c, b, a),
                    };
                    let f = self.map(x, y)?;
                    let g = self.map(y, z)?;
                    let h = self.map(x, z)?;
                    if !A::composite_equals(ctx, &f, &g, &h) {
                        return Err(Error::InvalidSystem(format!(
                            "composite {} -> {} -> {} differs from the direct map",
                            self.poset.id(x),
                            self.poset.id(y),
                            self.poset.id(z)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn comparable_pairs(poset: &Poset) -> usize {
    (0..poset.len()).map(|p| poset.below(p).len()).sum()
}

/// The poset of flags ordered by the face relation (a flag is below the flags
/// containing it), with identifiers like `a>b`.
pub fn flag_poset(poset: &Poset) -> (Poset, Vec<Flag>) {
    let flags: Vec<Flag> = all_flags(poset).into_iter().flatten().collect();
    let ids: Vec<String> = flags.iter().map(|f| f.display(poset)).collect();
    let index: BTreeMap<&Flag, usize> = flags.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut rel = Vec::new();
    for (i, f) in flags.iter().enumerate() {
        if f.dim() == 0 {
            continue;
        }
        for k in 0..=f.dim() {
            let g = face(f, k).expect("positive dimension");
            rel.push((i, index[&g]));
        }
    }
    (Poset::from_indices(ids, &rel).expect("face relations are acyclic"), flags)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Star {
    /// `M_*(℘₀ > … > ℘ₛ) = M(℘₀)`: variance preserved.
    Lower,
    /// `M^*(℘₀ > … > ℘ₛ) = M(℘ₛ)`: variance reversed.
    Upper,
}

/// Induced system on the flag poset. Returns the flags in the order used for
/// the elements of the new poset.
pub fn induce_on_flags<A: Atom>(sys: &CoefficientSystem<A>, star: Star) -> Result<(CoefficientSystem<A>, Vec<Flag>)> {
    let (fp, flags) = flag_poset(&sys.poset);
    let pick = |f: &Flag| match star {
        Star::Lower => f.first(),
        Star::Upper => f.last(),
    };
    let values: Vec<AtomicModule<A>> = flags.iter().map(|f| sys.values[pick(f)].clone()).collect();
    let variance = match (star, sys.variance) {
        (Star::Lower, v) => v,
        (Star::Upper, Variance::Contravariant) => Variance::Covariant,
        (Star::Upper, Variance::Covariant) => Variance::Contravariant,
    };
    let mut maps = BTreeMap::new();
    for t in 0..fp.len() {
        for s in fp.below(t) {
            // s is a face of t: first(s) ≤ first(t), last(s) ≥ last(t)
            let (hi, lo) = match star {
                Star::Lower => (pick(&flags[t]), pick(&flags[s])),
                Star::Upper => (pick(&flags[s]), pick(&flags[t])),
            };
            let f = sys.restriction(hi, lo)?;
            let key = match variance {
                Variance::Contravariant => (t, s),
                Variance::Covariant => (s, t),
            };
            let (from, to) = key;
            let f = ModuleMap {
                domain: values[from].clone(),
                codomain: values[to].clone(),
                matrix: f.matrix,
            };
            maps.insert(key, f);
        }
    }
    Ok((CoefficientSystem::new(fp, variance, values, maps)?, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::graded::{GradedContext, MonomialAtom};
    use crate::exactla::matrix::Matrix;
    use crate::exactla::Window;
    use crate::rat;

    fn q() -> AtomicModule<MonomialAtom> {
        AtomicModule::from_atoms(vec![MonomialAtom::polynomial(0)])
    }

    fn scaled_chain() -> CoefficientSystem<MonomialAtom> {
        // 2 > 1 > 0 with restriction 2→1 by 3 and 1→0 by 5
        let p = Poset::chain(3);
        let m = |c: i64| ModuleMap::new(q(), q(), Matrix::from_rows(vec![vec![rat(c)]])).unwrap();
        let covers = BTreeMap::from([((2, 1), m(3)), ((1, 0), m(5))]);
        CoefficientSystem::from_covers(p, Variance::Contravariant, vec![q(); 3], covers).unwrap()
    }

    #[test]
    fn composition_along_chains() {
        let s = scaled_chain();
        assert_eq!(s.restriction(2, 0).unwrap().matrix[(0, 0)], rat(15));
        s.check_functoriality(&GradedContext::fine(Window::point())).unwrap();
        assert!(s.restriction(0, 2).is_err());
    }

    #[test]
    fn broken_functoriality_is_detected() {
        let mut s = scaled_chain();
        s.maps.insert((2, 0), ModuleMap::new(q(), q(), Matrix::from_rows(vec![vec![rat(14)]])).unwrap());
        assert!(s.check_functoriality(&GradedContext::fine(Window::point())).is_err());
    }

    #[test]
    fn constant_system_induces_constant_systems() {
        let s = CoefficientSystem::constant(Poset::chain(3), Variance::Contravariant, q());
        for star in [Star::Lower, Star::Upper] {
            let (t, flags) = induce_on_flags(&s, star).unwrap();
            assert_eq!(flags.len(), 7);
            assert!(t.values.iter().all(|v| v == &q()));
            assert!(t.maps.values().all(|f| f.matrix == Matrix::identity(1)));
            t.check_functoriality(&GradedContext::fine(Window::point())).unwrap();
        }
    }

    #[test]
    fn upper_star_last_face_is_the_restriction() {
        let s = scaled_chain();
        let (t, flags) = induce_on_flags(&s, Star::Upper).unwrap();
        assert_eq!(t.variance, Variance::Covariant);
        for (i, f) in flags.iter().enumerate() {
            if f.dim() == 0 {
                continue;
            }
            let g = face(f, f.dim()).unwrap();
            let j = flags.iter().position(|x| *x == g).unwrap();
            let induced = t.map(j, i).unwrap();
            let original = s.restriction(g.last(), f.last()).unwrap();
            assert_eq!(induced.matrix, original.matrix);
        }
        t.check_functoriality(&GradedContext::fine(Window::point())).unwrap();
    }
}
