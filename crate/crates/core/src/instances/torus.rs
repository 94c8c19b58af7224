//! The circle group `G = T` with its finite subgroups `C_m`: the rings
//! `R(G) = ℚ` and `R(C) = H^*(BG/C) = ℚ[c]` with `c` in degree 2, Euler
//! classes of representations, the two-term adelic complex, the tom Dieck
//! filtration and the subgroup-lattice checks.
//!
//! For `C_a ≤ C_b` the map `G/C_a → G/C_b` is a `b/a`-fold cover sending the
//! generator `c_b` to `(b/a) c_a`. Rescaling `c̃_m = c_m / m` makes every
//! restriction send `c̃` to `c̃`, so all structure maps are canonical with
//! scalar 1; Euler classes are written in `c̃`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use crate::adelic::{adelic_cohomology, adelic_complex, AdelicSpec, ProductPolicy};
use crate::coeff::{CoefficientSystem, EulerClassSystem, EulerFamily, LocalizationSystem, MonomialClass, ProductClass, Variance};
use crate::exactla::filtration::filtration_subquotients;
use crate::exactla::graded::{GradedContext, MonomialAtom};
use crate::exactla::matrix::Matrix;
use crate::exactla::table::multidegree_key;
use crate::exactla::{AtomicModule, CohomologyTable, ModuleMap, Window};
use crate::poset::Poset;
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusRank1Instance {
    /// Orders of the retained finite subgroups.
    pub orders: Vec<u64>,
    /// Degree window `lo..=hi`.
    pub window: (i64, i64),
}

impl TorusRank1Instance {
    /// `C_1, …, C_n`.
    pub fn first(n: usize, window: (i64, i64)) -> Self {
        TorusRank1Instance { orders: (1..=n as u64).collect(), window }
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::InvalidSystem("at least one finite subgroup is needed".into()));
        }
        if self.orders.contains(&0) {
            return Err(Error::InvalidSystem("subgroup orders are positive".into()));
        }
        if self.orders.iter().collect::<BTreeSet<_>>().len() != self.orders.len() {
            return Err(Error::InvalidSystem("subgroup orders must be distinct".into()));
        }
        if self.window.0 > self.window.1 {
            return Err(Error::InvalidWindow(format!("{}..{}", self.window.0, self.window.1)));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<GradedContext> {
        GradedContext::new(vec![2], Window::new(vec![self.window.0], vec![self.window.1])?)
    }
}

fn polynomial_ring() -> AtomicModule<MonomialAtom> {
    AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)])
}

fn ground_field() -> AtomicModule<MonomialAtom> {
    AtomicModule::from_atoms(vec![MonomialAtom::residue_field(1)])
}

fn c() -> MonomialClass {
    MonomialClass::monomial(vec![1])
}

/// Rings over a poset of subgroups: `ℚ` at `G` (index `generic`), `ℚ[c̃]`
/// elsewhere, every restriction canonical.
fn ring_system(poset: Poset, generic: usize) -> Result<CoefficientSystem<MonomialAtom>> {
    let values: Vec<AtomicModule<MonomialAtom>> =
        (0..poset.len()).map(|i| if i == generic { ground_field() } else { polynomial_ring() }).collect();
    let mut maps = BTreeMap::new();
    for p in 0..poset.len() {
        for q in poset.below(p) {
            let one = Matrix::from_rows(vec![vec![Rational::one()]]);
            maps.insert((p, q), ModuleMap::new(values[p].clone(), values[q].clone(), one)?);
        }
    }
    CoefficientSystem::new(poset, Variance::Contravariant, values, maps)
}

/// `G` over the retained `C_m`; element 0 is `G`.
pub fn torus_poset(inst: &TorusRank1Instance) -> Result<Poset> {
    inst.validate()?;
    let mut ids = vec!["G".to_string()];
    ids.extend(inst.orders.iter().map(|m| format!("C{m}")));
    let rel: Vec<(usize, usize)> = (1..ids.len()).map(|i| (0, i)).collect();
    Poset::from_indices(ids, &rel)
}

/// The Euler class system on `G > C_m` with `ℰ_{G/C} = {c̃^k}`.
pub fn torus_euler_system(inst: &TorusRank1Instance) -> Result<EulerClassSystem> {
    let poset = torus_poset(inst)?;
    let n = poset.len();
    let rings = ring_system(poset, 0)?;
    let generators = (1..n).map(|i| ((0, i), vec![c()])).collect();
    EulerClassSystem::new(rings, generators)
}

/// `ℚ ⊕ ∏_C ℚ[c] → ∏_C ℚ[c, c⁻¹]`.
pub fn torus_rank1_spec(inst: &TorusRank1Instance) -> Result<AdelicSpec<MonomialAtom>> {
    let euler = torus_euler_system(inst)?;
    let rings = euler.rings.clone();
    AdelicSpec::new(inst.context()?, rings, Arc::new(euler), ProductPolicy::SpecializationsOnly)
}

pub fn torus_cohomology(inst: &TorusRank1Instance) -> Result<CohomologyTable> {
    adelic_cohomology(&torus_rank1_spec(inst)?)
}

/// The component of `e(V)` at `C_m` for `V = ⊕ z^{k_i}`: `e(V^{C_m})`, the
/// product of `k_i c̃` over the weights divisible by `m`.
pub fn euler_component(weights: &[u64], m: u64) -> MonomialClass {
    let fixed: Vec<u64> = weights.iter().copied().filter(|k| k % m == 0).collect();
    MonomialClass {
        exponent: vec![fixed.len() as i64],
        unit: fixed.iter().fold(Rational::one(), |acc, &k| acc * Rational::from_integer(k.into())),
    }
}

/// `e(V ⊕ W) = e(V) e(W)` at every retained `C`.
pub fn check_multiplicativity(inst: &TorusRank1Instance, v: &[u64], w: &[u64]) -> bool {
    let vw: Vec<u64> = v.iter().chain(w).copied().collect();
    inst.orders.iter().all(|&m| euler_component(&vw, m) == euler_component(v, m).mul(&euler_component(w, m)))
}

/// The subgroups `C_d` for every divisor `d` of a retained order, ordered by
/// divisibility and all below `G` (element 0).
pub fn subgroup_lattice(inst: &TorusRank1Instance) -> Result<(Poset, Vec<Option<u64>>)> {
    inst.validate()?;
    let divisors: BTreeSet<u64> = inst.orders.iter().flat_map(|&m| (1..=m).filter(move |d| m % d == 0)).collect();
    let mut ids = vec!["G".to_string()];
    let mut groups = vec![None];
    for &d in &divisors {
        ids.push(format!("C{d}"));
        groups.push(Some(d));
    }
    let mut rel = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for (j, b) in groups.iter().enumerate() {
            let below = match (a, b) {
                (None, Some(_)) => true,
                (Some(a), Some(b)) => a != b && a % b == 0,
                _ => false,
            };
            if below {
                rel.push((i, j));
            }
        }
    }
    Ok((Poset::from_indices(ids, &rel)?, groups))
}

/// Euler classes on the subgroup lattice: `ℰ_{H/K}` is generated by the
/// `C_K`-components of `e(z^k)` for weights `k` fixed by `K` but not by `H`,
/// `1 ≤ k ≤ bound`.
pub fn lattice_euler_system(inst: &TorusRank1Instance) -> Result<EulerClassSystem> {
    let (poset, groups) = subgroup_lattice(inst)?;
    let bound = 2 * inst.orders.iter().max().copied().unwrap_or(1);
    let rings = ring_system(poset.clone(), 0)?;
    let mut generators = BTreeMap::new();
    for h in 0..poset.len() {
        for k in poset.below(h) {
            let order_k = groups[k].expect("only G is generic");
            let gens: Vec<MonomialClass> = (1..=bound)
                .filter(|w| w % order_k == 0 && groups[h].is_none_or(|oh| w % oh != 0))
                .map(|w| euler_component(&[w], order_k))
                .collect();
            generators.insert((h, k), gens);
        }
    }
    EulerClassSystem::new(rings, generators)
}

/// `R_*` on one atom: extension of scalars along `R(℘₂) → R(℘₃)`.
fn extend_scalars(atom: &MonomialAtom, from_generic: bool) -> MonomialAtom {
    if from_generic {
        MonomialAtom { lower: atom.lower.clone(), upper: vec![None] }
    } else {
        atom.clone()
    }
}

fn sample_modules(generic: bool) -> Vec<MonomialAtom> {
    if generic {
        vec![MonomialAtom::residue_field(1), MonomialAtom::shifted(&[1])]
    } else {
        vec![
            MonomialAtom::polynomial(1),
            MonomialAtom::shifted(&[-2]),
            MonomialAtom { lower: vec![Some(0)], upper: vec![Some(1)] },
            MonomialAtom::residue_field(1),
            MonomialAtom { lower: vec![None], upper: vec![None] },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitivityReport {
    pub chains: usize,
    pub checked: usize,
    pub failures: Vec<String>,
}

/// `L_{℘₁/℘₃} R_* = L_{℘₂/℘₃} R_* L_{℘₁/℘₂}` on sample modules, for every
/// chain `℘₁ ≥ ℘₂ ≥ ℘₃` of the subgroup lattice.
pub fn check_transitivity(inst: &TorusRank1Instance) -> Result<TransitivityReport> {
    let sys = lattice_euler_system(inst)?;
    let poset = sys.rings.poset.clone();
    let generic = |i: usize| i == 0;
    let mut report = TransitivityReport { chains: 0, checked: 0, failures: Vec::new() };
    for p1 in 0..poset.len() {
        for p2 in (0..poset.len()).filter(|&q| poset.leq(q, p1)) {
            for p3 in (0..poset.len()).filter(|&q| poset.leq(q, p2)) {
                report.chains += 1;
                for a in sample_modules(generic(p2)) {
                    let push = |x: &MonomialAtom| extend_scalars(x, generic(p2) && !generic(p3));
                    let direct = sys.apply(p1, p3, &push(&a));
                    let composite = sys.apply(p1, p2, &a).and_then(|b| sys.apply(p2, p3, &push(&b)));
                    report.checked += 1;
                    if direct != composite {
                        report.failures.push(format!("{} ≥ {} ≥ {} on {:?}", poset.id(p1), poset.id(p2), poset.id(p3), a));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `g_q = e(z^{q+1})` on the index set `ℕ ≅ {C_1, C_2, …}`: `c̃` at the
/// divisors of `q + 1`, a unit elsewhere.
pub fn torus_euler_family() -> EulerFamily {
    EulerFamily::with_rule(|q| {
        let k = q as u64 + 1;
        let factors = (0..q + 1).filter(|j| k.is_multiple_of(*j as u64 + 1)).map(|j| (j, c())).collect();
        ProductClass { factors, tail: Some(MonomialClass::one(1)) }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TomDieckReport {
    /// Cohomology of `F̄ⁿ` for each level present.
    pub subquotients: BTreeMap<usize, CohomologyTable>,
    /// `H^*(F̄ⁿ)` vanishes outside codegree `n`.
    pub concentrated: bool,
    /// `H^n(F̄ⁿ)` equals `⊕_{codim K = n} H_*(BG/K)` in the window.
    pub matches_homology: bool,
    /// `Σ_n dim H^n(F̄ⁿ) = Σ_s dim H^s` in every degree.
    pub collapses: bool,
}

/// Filtration by the codimension of the last vertex of a flag.
pub fn tom_dieck_filtration(inst: &TorusRank1Instance) -> Result<TomDieckReport> {
    let spec = torus_rank1_spec(inst)?;
    let c = adelic_complex(&spec)?;
    let top = spec.max_dim();
    let levels: Vec<Vec<usize>> = (0..c.len())
        .map(|s| Ok(spec.flags(s)?.iter().map(|f| top - spec.dims[f.last()]).collect()))
        .collect::<Result<_>>()?;
    let subs = filtration_subquotients(&c, &levels)?;
    let total = adelic_cohomology(&spec)?;
    let ctx = inst.context()?;
    let degrees = ctx.window.degrees();
    let mut concentrated = true;
    let mut matches_homology = true;
    let mut subquotients = BTreeMap::new();
    for sq in &subs {
        let n = sq.level;
        for s in 0..sq.cohomology.num_degrees() {
            if s != n && sq.cohomology.total_dim(s) != 0 {
                concentrated = false;
            }
        }
        for d in &degrees {
            // H_*(BG/G) = ℚ in degree 0; H_*(BG/C) = ℚ in each degree −2k, k ≥ 1
            let expected = match n {
                0 => usize::from(d[0] == 0),
                1 => usize::from(d[0] < 0 && d[0] % 2 == 0) * inst.orders.len(),
                _ => 0,
            };
            if sq.cohomology.dim(n, d) != expected {
                matches_homology = false;
            }
        }
        subquotients.insert(n, sq.cohomology.clone());
    }
    let collapses = degrees.iter().all(|d| {
        let e1: usize = subs.iter().map(|sq| sq.cohomology.dim(sq.level, d)).sum();
        let h: usize = (0..total.num_degrees()).map(|s| total.dim(s, d)).sum();
        e1 == h
    });
    Ok(TomDieckReport { subquotients, concentrated, matches_homology, collapses })
}

/// Dimensions of `H¹` by degree, for reporting.
pub fn h1_profile(table: &CohomologyTable) -> BTreeMap<String, usize> {
    table.graded_entries(1).into_iter().map(|(d, v)| (multidegree_key(&d), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::check_complex;

    #[test]
    fn one_subgroup() {
        let inst = TorusRank1Instance::first(1, (-12, 4));
        let h = torus_cohomology(&inst).unwrap();
        assert_eq!(h.graded_entries(0).into_iter().filter(|(_, v)| *v > 0).collect::<Vec<_>>(), vec![(vec![0], 1)]);
        for d in -12..=4 {
            assert_eq!(h.dim(1, &[d]), usize::from(d < 0 && d % 2 == 0), "degree {d}");
        }
    }

    #[test]
    fn three_subgroups_in_degree_minus_two() {
        let inst = TorusRank1Instance::first(3, (-6, 2));
        assert_eq!(torus_cohomology(&inst).unwrap().dim(1, &[-2]), 3);
        assert!(check_complex(&adelic_complex(&torus_rank1_spec(&inst).unwrap()).unwrap()));
    }

    #[test]
    fn euler_classes_multiply() {
        let inst = TorusRank1Instance::first(4, (-4, 4));
        assert!(check_multiplicativity(&inst, &[1, 2], &[4, 3]));
        assert_eq!(euler_component(&[2, 3, 4], 2), MonomialClass { exponent: vec![2], unit: Rational::from_integer(8.into()) });
        assert_eq!(euler_component(&[3], 2), MonomialClass::one(1));
    }

    #[test]
    fn lattice_laws() {
        let inst = TorusRank1Instance { orders: vec![4, 6], window: (-4, 4) };
        let sys = lattice_euler_system(&inst).unwrap();
        sys.check_composition_law().unwrap();
        let rep = check_transitivity(&inst).unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert!(rep.chains > 10);
    }

    #[test]
    fn filtration_concentrates() {
        let inst = TorusRank1Instance::first(2, (-8, 4));
        let rep = tom_dieck_filtration(&inst).unwrap();
        assert!(rep.concentrated && rep.matches_homology && rep.collapses, "{rep:?}");
    }

    #[test]
    fn rule_family_is_almost_everywhere_a_unit() {
        let f = torus_euler_family();
        assert_eq!(f.vars_at(5).unwrap().len(), 1);
        let g = (f.rules[0])(5);
        assert!(g.factors.contains_key(&2) && g.factors.contains_key(&0) && !g.factors.contains_key(&3));
    }

    #[test]
    fn bad_instances() {
        assert!(torus_rank1_spec(&TorusRank1Instance { orders: vec![], window: (0, 1) }).is_err());
        assert_eq!(TorusRank1Instance { orders: vec![1], window: (2, 1) }.validate().unwrap_err().code(), "window");
    }
}
