//! Local cohomology of monomial ideals in `ℚ[x_1..x_n]`, through the
//! augmented adelic complex of the punctured cube `Δ(A)` and through the
//! Čech complex; and the adelic cube of the monomial primes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::One;

use crate::adelic::{augmented_complex, AdelicSpec, Augmentation, ProductPolicy};
use crate::coeff::{CoefficientSystem, InversionSystem, Variance};
use crate::exactla::graded::{GradedContext, MonomialAtom};
use crate::exactla::matrix::Matrix;
use crate::exactla::{cohomology, AtomicModule, CochainComplex, CohomologyTable, ModuleMap, Window};
use crate::poset::{punctured_cube, Poset};
use crate::{Error, Rational, Result};

fn support(g: &[i64]) -> impl Iterator<Item = usize> + '_ {
    g.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, _)| i)
}

fn validate(nvars: usize, generators: &[Vec<i64>], m: &AtomicModule<MonomialAtom>) -> Result<()> {
    if generators.is_empty() {
        return Err(Error::InvalidSystem("an ideal needs at least one generator".into()));
    }
    for g in generators {
        if g.len() != nvars || g.iter().any(|&e| e < 0) {
            return Err(Error::ShapeMismatch(format!("generator {g:?} is not a monomial in {nvars} variables")));
        }
    }
    if m.atoms.iter().any(|a| a.nvars() != nvars) {
        return Err(Error::ShapeMismatch("module and ring disagree on variables".into()));
    }
    Ok(())
}

/// The adelic spec on the face poset of `Δ(A)`, `A` the generators, with
/// `L_σ` inverting `∏_{a ∈ σ} a`, the constant system `M`, and `M` itself as
/// augmentation.
pub fn koszul_spec(
    nvars: usize,
    generators: &[Vec<i64>],
    m: &AtomicModule<MonomialAtom>,
    window: Window,
) -> Result<AdelicSpec<MonomialAtom>> {
    validate(nvars, generators, m)?;
    if window.rank() != nvars {
        return Err(Error::InvalidWindow(format!("window of rank {} for {nvars} variables", window.rank())));
    }
    let names: Vec<String> = (0..generators.len()).map(|i| format!("g{i}")).collect();
    let k = punctured_cube(&names)?;
    let inverted = k
        .simplices
        .iter()
        .map(|s| s.iter().flat_map(|&a| support(&generators[a])).collect::<BTreeSet<_>>().into_iter().collect())
        .collect();
    let poset = k.face_poset();
    let n = poset.len();
    let coeffs = CoefficientSystem::constant(poset, Variance::Contravariant, m.clone());
    let ctx = GradedContext::fine(window);
    let aug = Augmentation { global: m.clone(), maps: vec![ModuleMap::identity(m.clone()); n] };
    AdelicSpec::new(ctx, coeffs, Arc::new(InversionSystem { inverted }), ProductPolicy::SpecializationsOnly)?
        .with_augmentation(aug)
}

/// `H^*_I(M)` as the cohomology of the augmented adelic complex.
pub fn koszul_local_cohomology(
    nvars: usize,
    generators: &[Vec<i64>],
    m: &AtomicModule<MonomialAtom>,
    window: Window,
) -> Result<CohomologyTable> {
    let spec = koszul_spec(nvars, generators, m, window)?;
    cohomology(&augmented_complex(&spec)?)
}

/// The extended Čech complex `M → ⊕ M_{a} → ⊕ M_{ab} → …`, with `M` in
/// degree 0.
pub fn cech_complex(
    nvars: usize,
    generators: &[Vec<i64>],
    m: &AtomicModule<MonomialAtom>,
    window: Window,
) -> Result<CochainComplex<MonomialAtom>> {
    validate(nvars, generators, m)?;
    let r = generators.len();
    let subsets: Vec<Vec<Vec<usize>>> = (0..=r)
        .map(|k| {
            (0u64..1 << r)
                .filter(|mask| mask.count_ones() as usize == k)
                .map(|mask| (0..r).filter(|i| mask >> i & 1 == 1).collect())
                .collect()
        })
        .collect();
    let localize = |s: &[usize]| -> AtomicModule<MonomialAtom> {
        let vars: Vec<usize> = s.iter().flat_map(|&a| support(&generators[a])).collect::<BTreeSet<_>>().into_iter().collect();
        let atoms = m.atoms.iter().filter_map(|a| a.invert(&vars)).collect();
        AtomicModule::new(format!("{s:?}"), atoms)
    };
    let objects: Vec<AtomicModule<MonomialAtom>> = subsets
        .iter()
        .map(|level| {
            let parts: Vec<_> = level.iter().map(|s| localize(s)).collect();
            AtomicModule::direct_sum(parts.iter())
        })
        .collect();
    let mut differentials = Vec::new();
    for k in 0..r {
        let mut matrix = Matrix::<Rational>::zeros(objects[k + 1].len(), objects[k].len());
        let mut row = 0;
        for t in &subsets[k + 1] {
            let lt = localize(t);
            let mut col = 0;
            for s in &subsets[k] {
                let ls = localize(s);
                if s.iter().all(|a| t.contains(a)) {
                    let extra = t.iter().find(|a| !s.contains(a)).unwrap();
                    let sign = if t.iter().position(|a| a == extra).unwrap() % 2 == 0 { Rational::one() } else { -Rational::one() };
                    // atoms of M surviving in both, matched in order
                    let (mut i, mut j) = (0, 0);
                    for a in &m.atoms {
                        let vs: Vec<usize> = s.iter().flat_map(|&x| support(&generators[x])).collect();
                        let vt: Vec<usize> = t.iter().flat_map(|&x| support(&generators[x])).collect();
                        let (ins, int) = (a.invert(&vs).is_some(), a.invert(&vt).is_some());
                        if ins && int {
                            matrix[(row + i, col + j)] = sign.clone();
                        }
                        i += int as usize;
                        j += ins as usize;
                    }
                }
                col += ls.len();
            }
            row += lt.len();
        }
        differentials.push(ModuleMap::new(objects[k].clone(), objects[k + 1].clone(), matrix)?);
    }
    CochainComplex::new(GradedContext::fine(window), objects, differentials)
}

/// The monomial primes `(x_P)`, `P ⊆ {1..n}`, ordered by reverse inclusion
/// so that `(0)` is the unique maximal element and `dim (x_P) = n − |P|`.
/// `L_P` inverts the variables outside `P`; the coefficient system is
/// constant `ℚ[x_1..x_n]`, augmented by itself.
pub fn monomial_primes_spec(nvars: usize, window: Window) -> Result<AdelicSpec<MonomialAtom>> {
    if nvars == 0 || nvars > 6 {
        return Err(Error::Unsupported(format!("{nvars} variables")));
    }
    let primes: Vec<BTreeSet<usize>> = (0u64..1 << nvars).map(|mask| (0..nvars).filter(|i| mask >> i & 1 == 1).collect()).collect();
    let name = |p: &BTreeSet<usize>| -> String {
        if p.is_empty() {
            "(0)".into()
        } else {
            format!("({})", p.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join(","))
        }
    };
    let ids: Vec<String> = primes.iter().map(name).collect();
    let mut rel = Vec::new();
    for (i, p) in primes.iter().enumerate() {
        for (j, q) in primes.iter().enumerate() {
            // (x_Q) covered by (x_P): P ⊂ Q with one more variable
            if q.len() == p.len() + 1 && p.is_subset(q) {
                rel.push((i, j));
            }
        }
    }
    let poset = Poset::from_indices(ids, &rel)?;
    let inverted = primes.iter().map(|p| (0..nvars).filter(|v| !p.contains(v)).collect()).collect();
    let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(nvars)]);
    let n = poset.len();
    let coeffs = CoefficientSystem::constant(poset, Variance::Contravariant, r.clone());
    let aug = Augmentation { global: r.clone(), maps: vec![ModuleMap::identity(r); n] };
    AdelicSpec::new(GradedContext::fine(window), coeffs, Arc::new(InversionSystem { inverted }), ProductPolicy::SpecializationsOnly)?
        .with_augmentation(aug)
}

/// Multidegrees where two tables differ, for reporting.
pub fn table_differences(a: &CohomologyTable, b: &CohomologyTable) -> BTreeMap<(usize, String), (usize, usize)> {
    let mut out = BTreeMap::new();
    for s in 0..a.num_degrees().max(b.num_degrees()) {
        let (ea, eb) = (a.graded_entries(s), b.graded_entries(s));
        for d in ea.keys().chain(eb.keys()) {
            let (x, y) = (ea.get(d).copied().unwrap_or(0), eb.get(d).copied().unwrap_or(0));
            if x != y {
                out.insert((s, crate::exactla::table::multidegree_key(d)), (x, y));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adelic::{build_adelic_cube, pullback_report};

    fn ring(n: usize) -> AtomicModule<MonomialAtom> {
        AtomicModule::from_atoms(vec![MonomialAtom::polynomial(n)])
    }

    #[test]
    fn maximal_ideal_of_two_variables() {
        let w = Window::cube(2, -3, 3).unwrap();
        let h = koszul_local_cohomology(2, &[vec![1, 0], vec![0, 1]], &ring(2), w.clone()).unwrap();
        assert!(h.group(0).is_zero() || h.total_dim(0) == 0);
        assert_eq!(h.total_dim(1), 0);
        // H^2_m(R) lives in strictly negative bidegrees
        for d in w.degrees() {
            let expected = usize::from(d[0] < 0 && d[1] < 0);
            assert_eq!(h.dim(2, &d), expected, "{d:?}");
        }
    }

    #[test]
    fn agrees_with_the_cech_complex() {
        let w = Window::cube(2, -2, 2).unwrap();
        let gens = vec![vec![2, 0], vec![0, 1], vec![1, 1]];
        let a = koszul_local_cohomology(2, &gens, &ring(2), w.clone()).unwrap();
        let b = cohomology(&cech_complex(2, &gens, &ring(2), w).unwrap()).unwrap();
        assert!(table_differences(&a, &b).is_empty());
    }

    #[test]
    fn principal_ideal() {
        let w = Window::cube(2, -2, 2).unwrap();
        let h = koszul_local_cohomology(2, &[vec![1, 0]], &ring(2), w).unwrap();
        assert_eq!(h.dim(1, &[-1, 0]), 1);
        assert_eq!(h.dim(1, &[-1, -1]), 0);
        assert_eq!(h.dim(1, &[0, 0]), 0);
    }

    #[test]
    fn cube_of_monomial_primes() {
        let spec = monomial_primes_spec(2, Window::cube(2, -2, 2).unwrap()).unwrap();
        let cube = build_adelic_cube(&spec).unwrap();
        assert_eq!(cube.vertices.len(), 8);
        let rep = pullback_report(&spec).unwrap();
        assert!(rep.acyclic);
        assert_eq!(rep.punctured.dim(0, &[0, 0]), 1);
        assert_eq!(rep.punctured.dim(0, &[-1, 0]), 0);
        assert!(rep.punctured.vanishes_from(1));
    }
}
