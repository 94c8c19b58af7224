//! Localization systems acting atom by atom.
//!
//! A system assigns to each element `℘` of a poset a pointed endofunctor
//! `A_℘` with unit `η_℘`. Every functor here sends an atom to a single atom
//! or to zero, and `η` is the canonical map with scalar 1. Relative systems
//! additionally depend on the base element whose ring the module lives over.

use std::sync::Arc;

use num_traits::Zero;

use crate::exactla::graded::MonomialAtom;
use crate::exactla::matrix::Matrix;
use crate::exactla::{Atom, AtomicModule, ModuleMap};
use crate::poset::Poset;
use crate::{Error, Rational, Result};

pub trait LocalizationSystem<A: Atom>: Send + Sync {
    fn name(&self) -> String;

    /// `A_℘` on one atom of a module over `R(base)`; `None` is zero.
    fn apply(&self, prime: usize, base: usize, atom: &A) -> Option<A>;
}

/// `A_℘ = id` for every `℘`.
#[derive(Clone, Debug, Default)]
pub struct IdentitySystem;

impl<A: Atom> LocalizationSystem<A> for IdentitySystem {
    fn name(&self) -> String {
        "identity".into()
    }

    fn apply(&self, _prime: usize, _base: usize, atom: &A) -> Option<A> {
        Some(atom.clone())
    }
}

/// Inverts a set of variables per element: `L_℘ M = M[1/x_σ(℘)]`.
#[derive(Clone, Debug)]
pub struct InversionSystem {
    pub inverted: Vec<Vec<usize>>,
}

impl LocalizationSystem<MonomialAtom> for InversionSystem {
    fn name(&self) -> String {
        "inversion".into()
    }

    fn apply(&self, prime: usize, _base: usize, atom: &MonomialAtom) -> Option<MonomialAtom> {
        atom.invert(&self.inverted[prime])
    }
}

type AtomFn<A> = dyn Fn(usize, usize, &A) -> Option<A> + Send + Sync;

/// A system given by a closure.
#[derive(Clone)]
pub struct FnSystem<A> {
    pub name: String,
    pub f: Arc<AtomFn<A>>,
}

impl<A> FnSystem<A> {
    pub fn new(name: impl Into<String>, f: impl Fn(usize, usize, &A) -> Option<A> + Send + Sync + 'static) -> Self {
        FnSystem { name: name.into(), f: Arc::new(f) }
    }
}

impl<A: Atom> LocalizationSystem<A> for FnSystem<A> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn apply(&self, prime: usize, base: usize, atom: &A) -> Option<A> {
        (self.f)(prime, base, atom)
    }
}

/// `A_{℘₁} ∘ A_{℘₂}` with a unit, the composite `η_{℘₁} ∘ η_{℘₂}`. No
/// idempotence is assumed.
pub struct Composite<A> {
    pub outer: Arc<dyn LocalizationSystem<A>>,
    pub inner: Arc<dyn LocalizationSystem<A>>,
}

impl<A: Atom> LocalizationSystem<A> for Composite<A> {
    fn name(&self) -> String {
        format!("{}∘{}", self.outer.name(), self.inner.name())
    }

    fn apply(&self, prime: usize, base: usize, atom: &A) -> Option<A> {
        self.inner.apply(prime, base, atom).and_then(|a| self.outer.apply(prime, base, &a))
    }
}

/// `A_℘ M` together with `η: M → A_℘ M`. Atoms sent to zero are dropped;
/// blocks keep their labels.
pub fn localize_module<A: Atom>(
    sys: &dyn LocalizationSystem<A>,
    prime: usize,
    base: usize,
    m: &AtomicModule<A>,
) -> Result<(AtomicModule<A>, ModuleMap<A>)> {
    let mut atoms = Vec::new();
    let mut kept = Vec::new();
    let mut blocks = m.blocks.clone();
    let ranges = m.block_ranges();
    for (b, r) in ranges.iter().enumerate() {
        let mut len = 0;
        for i in r.clone() {
            if let Some(a) = sys.apply(prime, base, &m.atoms[i]) {
                atoms.push(a);
                kept.push(i);
                len += 1;
            }
        }
        blocks[b].len = len;
    }
    let target = AtomicModule { atoms, blocks };
    let mut matrix = Matrix::zeros(target.len(), m.len());
    for (row, &i) in kept.iter().enumerate() {
        matrix[(row, i)] = Rational::from_integer(1.into());
    }
    let unit = ModuleMap::new(m.clone(), target.clone(), matrix)
        .map_err(|e| Error::InvalidSystem(format!("unit of {} is not a morphism: {e}", sys.name())))?;
    Ok((target, unit))
}

/// `A_℘ f` for `f: M → N`.
pub fn localize_map<A: Atom>(
    sys: &dyn LocalizationSystem<A>,
    prime: usize,
    base: usize,
    f: &ModuleMap<A>,
) -> Result<ModuleMap<A>> {
    let (dom, ud) = localize_module(sys, prime, base, &f.domain)?;
    let (cod, uc) = localize_module(sys, prime, base, &f.codomain)?;
    // η is a selection, so A f is the matching submatrix
    let rows: Vec<usize> = (0..uc.matrix.nrows()).map(|r| selected(&uc.matrix, r)).collect();
    let cols: Vec<usize> = (0..ud.matrix.nrows()).map(|r| selected(&ud.matrix, r)).collect();
    let matrix = f.matrix.select_rows(&rows).select_cols(&cols);
    ModuleMap::new(dom, cod, matrix)
}

fn selected(m: &Matrix<Rational>, row: usize) -> usize {
    (0..m.ncols()).find(|&j| !m[(row, j)].is_zero()).expect("units select one atom per row")
}

/// `A_℘ f ∘ η_M = η_N ∘ f`, checked in the backend's model.
pub fn check_naturality<A: Atom>(
    sys: &dyn LocalizationSystem<A>,
    ctx: &A::Context,
    prime: usize,
    base: usize,
    f: &ModuleMap<A>,
) -> Result<bool> {
    let (_, ud) = localize_module(sys, prime, base, &f.domain)?;
    let (_, uc) = localize_module(sys, prime, base, &f.codomain)?;
    let lf = localize_map(sys, prime, base, f)?;
    let lhs = ModuleMap { domain: ud.domain.clone(), codomain: lf.codomain.clone(), matrix: lf.matrix.mul(&ud.matrix) };
    Ok(A::composite_equals(ctx, f, &uc, &lhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsorbativeReport {
    pub holds: bool,
    pub checked: usize,
    pub first_failure: Option<String>,
}

/// Left: `A_{℘₁}(η_{℘₂})` is an isomorphism for `℘₁ ≥ ℘₂`. Right:
/// `η_{℘₁}: A_{℘₂} M → A_{℘₁} A_{℘₂} M` is an isomorphism. Pairs default to
/// all comparable pairs (including equal ones, which is idempotence); relative
/// systems are evaluated over the smaller element.
pub fn check_absorbative<A: Atom>(
    sys: &dyn LocalizationSystem<A>,
    poset: &Poset,
    side: Side,
    samples: &[AtomicModule<A>],
    pairs: Option<&[(usize, usize)]>,
) -> Result<AbsorbativeReport> {
    let all: Vec<(usize, usize)> =
        (0..poset.len()).flat_map(|p| (0..poset.len()).filter(move |&q| poset.leq(q, p)).map(move |q| (p, q))).collect();
    let pairs = pairs.map(|p| p.to_vec()).unwrap_or(all);
    let mut checked = 0;
    for &(p1, p2) in &pairs {
        if p1 >= poset.len() || p2 >= poset.len() || !poset.leq(p2, p1) {
            return Err(Error::InvalidPoset(format!("queried pair ({p1}, {p2}) is not comparable")));
        }
        for m in samples {
            for a in &m.atoms {
                let inner = sys.apply(p2, p2, a);
                let ok = match side {
                    // A₁(a) → A₁(A₂(a))
                    Side::Left => sys.apply(p1, p2, a) == inner.as_ref().and_then(|b| sys.apply(p1, p2, b)),
                    // A₂(a) → A₁(A₂(a))
                    Side::Right => inner.as_ref().and_then(|b| sys.apply(p1, p2, b)) == inner,
                };
                checked += 1;
                if !ok {
                    return Ok(AbsorbativeReport {
                        holds: false,
                        checked,
                        first_failure: Some(format!(
                            "{} at {} ≥ {} on {}",
                            sys.name(),
                            poset.id(p1),
                            poset.id(p2),
                            a.label()
                        )),
                    });
                }
            }
        }
    }
    Ok(AbsorbativeReport { holds: true, checked, first_failure: None })
}

/// The maps `A_{℘₂} a → A_{℘₁} a` (left absorbative) or `A_{℘₁} a → A_{℘₂} a`
/// (right absorbative) exist for every comparable pair and compose along
/// chains, so the functors assemble into a functor on the poset.
pub fn check_functor_squares<A: Atom>(
    sys: &dyn LocalizationSystem<A>,
    poset: &Poset,
    side: Side,
    samples: &[AtomicModule<A>],
) -> bool {
    let arrow = |p1: usize, p2: usize, a: &A| -> bool {
        let (x, y) = (sys.apply(p1, p2, a), sys.apply(p2, p2, a));
        let (from, to) = match side {
            Side::Left => (y, x),
            Side::Right => (x, y),
        };
        match (from, to) {
            (Some(f), Some(t)) => f.canonical_to(&t),
            (None, _) | (_, None) => true,
        }
    };
    samples.iter().flat_map(|m| m.atoms.iter()).all(|a| {
        (0..poset.len()).all(|p1| poset.below(p1).into_iter().all(|p2| arrow(p1, p2, a)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::graded::GradedContext;
    use crate::exactla::Window;
    use crate::poset::punctured_cube;
    use crate::rat;

    fn cech_system() -> (Poset, InversionSystem) {
        let k = punctured_cube(&["x", "y"]).unwrap();
        let p = k.face_poset();
        let inverted = k.simplices.iter().cloned().collect();
        (p, InversionSystem { inverted })
    }

    #[test]
    fn inversion_is_left_absorbative() {
        let (p, sys) = cech_system();
        let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2), MonomialAtom::residue_field(2)]);
        let rep = check_absorbative(&sys, &p, Side::Left, std::slice::from_ref(&r), None).unwrap();
        assert!(rep.holds, "{:?}", rep.first_failure);
        assert!(check_functor_squares(&sys, &p, Side::Left, std::slice::from_ref(&r)));
        // inverting more is not right absorbative
        let rep = check_absorbative(&sys, &p, Side::Right, &[r], None).unwrap();
        assert!(!rep.holds);
    }

    #[test]
    fn identity_is_both() {
        let p = Poset::chain(3);
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        for side in [Side::Left, Side::Right] {
            assert!(check_absorbative(&IdentitySystem, &p, side, std::slice::from_ref(&m), None).unwrap().holds);
        }
        assert!(check_absorbative(&IdentitySystem, &p, Side::Left, &[m], Some(&[(0, 2)])).is_err());
    }

    #[test]
    fn localized_maps_are_natural() {
        let (_, sys) = cech_system();
        let ctx = GradedContext::fine(Window::cube(2, -2, 2).unwrap());
        let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2), MonomialAtom::residue_field(2)]);
        let n = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2)]);
        let f = ModuleMap::new(n, r, Matrix::from_rows(vec![vec![rat(2)], vec![rat(1)]])).unwrap();
        for prime in 0..3 {
            assert!(check_naturality(&sys, &ctx, prime, prime, &f).unwrap());
            let lf = localize_map(&sys, prime, prime, &f).unwrap();
            assert_eq!(lf.codomain.len(), 1);
        }
    }
}
