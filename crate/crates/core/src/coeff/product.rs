//! Restricted products of graded modules and their Euler localizations.
//!
//! Components are indexed by `0..n` or by all of ℕ. Finitely many indices
//! carry explicit modules and every other index carries a copy of a tail
//! template. Localizing a product along classes that are units at almost
//! every index produces elements with finitely many denominators. That is
//! why `ℰ⁻¹∏M_i / ∏M_i` comes out as a direct sum.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::euler::MonomialClass;
use crate::exactla::graded::{dim_at, GradedContext, MonomialAtom};
use crate::exactla::table::multidegree_key;
use crate::exactla::{Atom, AtomicModule};
use crate::{Error, Rational, Result};

/// Which tail elements are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Restriction {
    /// Any tail coordinates: `∏`.
    Product,
    /// Almost all tail coordinates zero: `⊕`.
    Sum,
    /// Almost all tail coordinates in the given submodule of the tail.
    Sub(AtomicModule<MonomialAtom>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedProduct {
    /// `Some(n)` for the indices `0..n`, `None` for ℕ.
    pub size: Option<usize>,
    pub explicit: BTreeMap<usize, AtomicModule<MonomialAtom>>,
    pub tail: AtomicModule<MonomialAtom>,
    pub restriction: Restriction,
}

impl RestrictedProduct {
    pub fn new(
        size: Option<usize>,
        explicit: BTreeMap<usize, AtomicModule<MonomialAtom>>,
        tail: AtomicModule<MonomialAtom>,
        restriction: Restriction,
    ) -> Result<Self> {
        if let Some(n) = size {
            if let Some(&i) = explicit.keys().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange(format!("component {i} of a product of size {n}")));
            }
        }
        if let Restriction::Sub(s) = &restriction {
            let fits = s.len() == tail.len()
                && s.atoms.iter().zip(&tail.atoms).all(|(a, b)| a.nvars() == b.nvars() && a.canonical_inclusion(b));
            if !fits {
                return Err(Error::InvalidSystem("restriction is not a submodule of the tail".into()));
            }
        }
        Ok(RestrictedProduct { size, explicit, tail, restriction })
    }

    /// The full product with a tail template over ℕ.
    pub fn countable(explicit: BTreeMap<usize, AtomicModule<MonomialAtom>>, tail: AtomicModule<MonomialAtom>) -> Self {
        RestrictedProduct { size: None, explicit, tail, restriction: Restriction::Product }
    }

    pub fn finite(components: Vec<AtomicModule<MonomialAtom>>) -> Self {
        let size = components.len();
        RestrictedProduct {
            size: Some(size),
            explicit: components.into_iter().enumerate().collect(),
            tail: AtomicModule::zero(),
            restriction: Restriction::Product,
        }
    }

    pub fn component(&self, i: usize) -> &AtomicModule<MonomialAtom> {
        self.explicit.get(&i).unwrap_or(&self.tail)
    }

    /// Number of tail indices, `None` when infinite.
    pub fn tail_count(&self) -> Option<usize> {
        self.size.map(|n| n - self.explicit.len())
    }

    /// The first `n` components.
    pub fn truncate(&self, n: usize) -> Vec<AtomicModule<MonomialAtom>> {
        (0..n).map(|i| self.component(i).clone()).collect()
    }

    pub fn with_restriction(&self, restriction: Restriction) -> Self {
        RestrictedProduct { restriction, ..self.clone() }
    }
}

impl MonomialAtom {
    /// Whether this box is contained in `other` with the canonical map injective.
    pub fn canonical_inclusion(&self, other: &MonomialAtom) -> bool {
        (0..self.nvars()).all(|i| {
            let lower_ok = match (self.lower[i], other.lower[i]) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a >= b,
            };
            lower_ok && self.upper[i] == other.upper[i]
        })
    }
}

/// An element `e ∈ ℰ` written at each index as `e′ · e″` with `e″` a unit:
/// only `e′` is recorded. `tail` is the factor at every unlisted index;
/// `None` leaves those factorizations undeclared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductClass {
    pub factors: BTreeMap<usize, MonomialClass>,
    pub tail: Option<MonomialClass>,
}

impl ProductClass {
    fn at(&self, i: usize) -> Option<&MonomialClass> {
        self.factors.get(&i).or(self.tail.as_ref())
    }
}

type ClassRule = dyn Fn(usize) -> ProductClass + Send + Sync;

/// Generators of a multiplicative set in `∏ R_i`. Besides finitely many
/// listed classes, a rule may supply one class `g_q` per index `q`. A rule
/// class is a unit at the tail, and it inverts at `q` every variable that
/// any rule class inverts there.
#[derive(Clone, Default)]
pub struct EulerFamily {
    pub classes: Vec<ProductClass>,
    pub rules: Vec<Arc<ClassRule>>,
}

impl fmt::Debug for EulerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EulerFamily").field("classes", &self.classes).field("rules", &self.rules.len()).finish()
    }
}

/// Indices at which rule contracts are sampled.
const RULE_SAMPLE: usize = 64;

impl EulerFamily {
    pub fn trivial() -> Self {
        EulerFamily::default()
    }

    pub fn with_rule(rule: impl Fn(usize) -> ProductClass + Send + Sync + 'static) -> Self {
        EulerFamily { classes: Vec::new(), rules: vec![Arc::new(rule)] }
    }

    /// Generators of all the families together.
    pub fn join(families: &[EulerFamily]) -> Self {
        EulerFamily {
            classes: families.iter().flat_map(|f| f.classes.clone()).collect(),
            rules: families.iter().flat_map(|f| f.rules.clone()).collect(),
        }
    }

    fn check_rules(&self, explicit: &BTreeSet<usize>) -> Result<()> {
        for rule in &self.rules {
            for q in (0..RULE_SAMPLE).chain(explicit.iter().copied()) {
                let g = rule(q);
                match &g.tail {
                    Some(t) if t.support().is_empty() => {}
                    _ => {
                        return Err(Error::HypothesisViolated(format!(
                            "rule class for index {q} is not a unit at almost every index"
                        )))
                    }
                }
                for (&i, f) in &g.factors {
                    let own: BTreeSet<usize> = rule(i).at(i).map(|c| c.support()).unwrap_or_default().into_iter().collect();
                    if !f.support().iter().all(|v| own.contains(v)) {
                        return Err(Error::HypothesisViolated(format!(
                            "rule class for {q} inverts more at {i} than the class for {i}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Variables inverted at index `i` by the listed classes.
    fn listed_vars(&self, i: usize) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for c in &self.classes {
            let f = c.at(i).ok_or_else(|| Error::InvalidSystem(format!("factorization undeclared at component {i}")))?;
            out.extend(f.support());
        }
        Ok(out)
    }

    /// Variables inverted uniformly at every tail index.
    fn uniform_tail_vars(&self) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for c in &self.classes {
            let t = c.tail.as_ref().ok_or_else(|| Error::InvalidSystem("factorization undeclared on the tail".into()))?;
            out.extend(t.support());
        }
        Ok(out)
    }

    fn rule_vars(&self, i: usize) -> BTreeSet<usize> {
        self.rules.iter().flat_map(|r| r(i).at(i).map(|c| c.support()).unwrap_or_default()).collect()
    }

    /// Variables inverted at index `i` by everything.
    pub fn vars_at(&self, i: usize) -> Result<BTreeSet<usize>> {
        let mut v = self.listed_vars(i)?;
        v.extend(self.rule_vars(i));
        Ok(v)
    }
}

fn invert_module(m: &AtomicModule<MonomialAtom>, vars: &BTreeSet<usize>) -> AtomicModule<MonomialAtom> {
    let vars: Vec<usize> = vars.iter().copied().collect();
    let atoms: Vec<MonomialAtom> = m.atoms.iter().filter_map(|a| a.invert(&vars)).collect();
    AtomicModule::from_atoms(atoms)
}

#[derive(Clone, Debug)]
pub struct LocalizedProduct {
    pub product: RestrictedProduct,
    /// Variables inverted at each explicit index.
    pub inverted: BTreeMap<usize, Vec<usize>>,
    /// Variables inverted at each tail index.
    pub tail_inverted: Vec<usize>,
    /// Of these, the ones inverted by a single class at every tail index.
    pub uniform_tail: Vec<usize>,
}

/// `ℰ⁻¹ ∏ M_i`: each class acts at index `q` through its factor `e′_q`, so
/// every component is localized, and the tail stays restricted to the part
/// localized by uniform classes.
pub fn localize_product(family: &EulerFamily, rp: &RestrictedProduct) -> Result<LocalizedProduct> {
    let explicit_idx: BTreeSet<usize> = rp.explicit.keys().copied().collect();
    family.check_rules(&explicit_idx)?;
    let mut inverted = BTreeMap::new();
    let mut explicit = BTreeMap::new();
    for (&i, m) in &rp.explicit {
        let v = family.vars_at(i)?;
        explicit.insert(i, invert_module(m, &v));
        inverted.insert(i, v.into_iter().collect());
    }
    let has_tail = rp.tail_count() != Some(0) && !rp.tail.is_empty();
    let (uniform, all_tail) = if has_tail {
        let uniform = family.uniform_tail_vars()?;
        // a rule inverts the same variables at every sampled tail index
        let mut rule: Option<BTreeSet<usize>> = None;
        for q in (0..RULE_SAMPLE).filter(|q| !explicit_idx.contains(q)) {
            let v = family.rule_vars(q);
            match &rule {
                None => rule = Some(v),
                Some(r) if *r != v => {
                    return Err(Error::HypothesisViolated("rule classes vary along the tail template".into()))
                }
                _ => {}
            }
        }
        let mut all = uniform.clone();
        all.extend(rule.unwrap_or_default());
        (uniform, all)
    } else {
        (BTreeSet::new(), BTreeSet::new())
    };
    let tail = invert_module(&rp.tail, &all_tail);
    let restriction = match &rp.restriction {
        Restriction::Sum => Restriction::Sum,
        _ if all_tail == uniform => match &rp.restriction {
            Restriction::Sub(s) => Restriction::Sub(invert_module(s, &uniform)),
            _ => Restriction::Product,
        },
        Restriction::Product => Restriction::Sub(invert_module(&rp.tail, &uniform)),
        Restriction::Sub(s) => Restriction::Sub(invert_module(s, &uniform)),
    };
    Ok(LocalizedProduct {
        product: RestrictedProduct { size: rp.size, explicit, tail, restriction },
        inverted,
        tail_inverted: all_tail.into_iter().collect(),
        uniform_tail: uniform.into_iter().collect(),
    })
}

/// One multidegree of a restricted product or of a cokernel between two.
/// Each tail index contributes `product_mult + sum_mult` dimensions;
/// `sum_mult` counts the part with finitely supported elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreePiece {
    pub explicit: BTreeMap<usize, usize>,
    pub tail_count: Option<usize>,
    pub product_mult: usize,
    pub sum_mult: usize,
}

impl DegreePiece {
    pub fn is_zero(&self) -> bool {
        self.explicit.values().all(|&d| d == 0)
            && (self.tail_count == Some(0) || self.product_mult + self.sum_mult == 0)
    }

    /// Total dimension over a finite index set.
    pub fn finite_dim(&self) -> Option<usize> {
        let explicit: usize = self.explicit.values().sum();
        self.tail_count.map(|t| explicit + t * (self.product_mult + self.sum_mult))
    }

    /// Dimension contributed by the indices `0..n`.
    pub fn truncated_dim(&self, n: usize) -> usize {
        let explicit: usize = self.explicit.iter().filter(|(&i, _)| i < n).map(|(_, &d)| d).sum();
        let tail = (0..n).filter(|i| !self.explicit.contains_key(i)).count();
        explicit + tail * (self.product_mult + self.sum_mult)
    }
}

pub fn degree_piece(ctx: &GradedContext, rp: &RestrictedProduct, d: &[i64]) -> DegreePiece {
    let explicit = rp.explicit.iter().map(|(&i, m)| (i, dim_at(ctx, m, d))).collect();
    let t = dim_at(ctx, &rp.tail, d);
    let (product_mult, sum_mult) = match &rp.restriction {
        Restriction::Product => (t, 0),
        Restriction::Sum => (0, t),
        Restriction::Sub(s) => {
            let r = dim_at(ctx, s, d);
            (r, t - r)
        }
    };
    DegreePiece { explicit, tail_count: rp.tail_count(), product_mult, sum_mult }
}

/// Cokernel of the componentwise inclusion `rp → loc`, degreewise.
fn cokernel_piece(ctx: &GradedContext, rp: &RestrictedProduct, loc: &RestrictedProduct, d: &[i64]) -> DegreePiece {
    let a = degree_piece(ctx, rp, d);
    let b = degree_piece(ctx, loc, d);
    let explicit = a.explicit.iter().map(|(i, x)| (*i, b.explicit[i] - x)).collect();
    // the source tail is a full product sitting inside the restricted part
    // (product source), or inside the sum part (sum source)
    let (product_mult, sum_mult) = if rp.restriction == Restriction::Sum {
        (0, b.sum_mult + b.product_mult - a.sum_mult)
    } else {
        (b.product_mult - a.product_mult, b.sum_mult)
    };
    DegreePiece { explicit, tail_count: a.tail_count, product_mult, sum_mult }
}

#[derive(Clone, Debug, Serialize)]
pub struct SumProductReport {
    /// The map from the sum row to the product row induces an isomorphism on
    /// cohomology (both rows are injective, so this compares cokernels).
    pub iso_on_cohomology: bool,
    /// `⊕ᵢ (ℰ⁻¹Mᵢ)/Mᵢ`, per multidegree key.
    pub cokernel: BTreeMap<String, DegreePiece>,
    pub product_cokernel: BTreeMap<String, DegreePiece>,
}

fn check_torsion_free(ctx: &GradedContext, family: &EulerFamily, rp: &RestrictedProduct) -> Result<()> {
    let mut parts: Vec<(String, &AtomicModule<MonomialAtom>, BTreeSet<usize>)> = Vec::new();
    for (&i, m) in &rp.explicit {
        parts.push((format!("component {i}"), m, family.vars_at(i)?));
    }
    if rp.tail_count() != Some(0) {
        let q = (0..).find(|q| !rp.explicit.contains_key(q)).unwrap();
        parts.push(("the tail".into(), &rp.tail, family.vars_at(q)?));
    }
    for (name, m, vars) in parts {
        let vars: Vec<usize> = vars.into_iter().collect();
        for a in &m.atoms {
            let survives = a.invert(&vars).is_some();
            if !survives && ctx.window.degrees().iter().any(|d| ctx.exponent(d).is_some_and(|e| a.contains_exponent(&e))) {
                return Err(Error::HypothesisViolated(format!(
                    "{name} has ℰ-torsion ({}) in the window {:?}..{:?}",
                    a.label(),
                    ctx.window.lo,
                    ctx.window.hi
                )));
            }
        }
    }
    Ok(())
}

/// Compares `⊕ M_i → ℰ⁻¹ ⊕ M_i` with `∏ M_i → ℰ⁻¹ ∏ M_i` in every multidegree
/// of the window.
pub fn sum_vs_product_cokernel(ctx: &GradedContext, rp: &RestrictedProduct, family: &EulerFamily) -> Result<SumProductReport> {
    check_torsion_free(ctx, family, rp)?;
    let sum = rp.with_restriction(Restriction::Sum);
    let prod = rp.with_restriction(Restriction::Product);
    let lsum = localize_product(family, &sum)?.product;
    let lprod = localize_product(family, &prod)?.product;
    let mut cokernel = BTreeMap::new();
    let mut product_cokernel = BTreeMap::new();
    let mut iso = true;
    for d in ctx.window.degrees() {
        let a = cokernel_piece(ctx, &sum, &lsum, &d);
        let b = cokernel_piece(ctx, &prod, &lprod, &d);
        // finitely many tail indices: sums and products agree
        let same = a == b || (a.finite_dim().is_some() && a.finite_dim() == b.finite_dim());
        iso &= same;
        let key = multidegree_key(&d);
        cokernel.insert(key.clone(), a);
        product_cokernel.insert(key, b);
    }
    Ok(SumProductReport { iso_on_cohomology: iso, cokernel, product_cokernel })
}

/// The cokernel of `M → ℰ⁻¹M` for the multiplicative set generated along a
/// chain `K > K₀ > … > Kₛ` (one family per step).
pub fn iterated_cokernel(ctx: &GradedContext, rp: &RestrictedProduct, chain: &[EulerFamily]) -> Result<BTreeMap<String, DegreePiece>> {
    Ok(sum_vs_product_cokernel(ctx, rp, &EulerFamily::join(chain))?.cokernel)
}

/// A degreewise element: coordinates at finitely many exceptional indices
/// and one tail value repeated at every other index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedElement {
    pub exceptions: BTreeMap<usize, Vec<Rational>>,
    pub tail: Vec<Rational>,
}
