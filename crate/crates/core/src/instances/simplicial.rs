//! Simplicial cochains with coefficients in a dual coefficient system on the
//! face poset, and the comparison with the adelic complex of a left
//! absorbative localization system.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;

use crate::adelic::{adelic_cohomology, AdelicSpec, ProductPolicy};
use crate::coeff::{localize_module, CoefficientSystem, DualCoefficientSystem, LocalizationSystem, Variance};
use crate::exactla::matrix::Matrix;
use crate::exactla::{cohomology, Atom, AtomicModule, CochainComplex, CohomologyTable, ModuleMap};
use crate::poset::SimplicialComplex;
use crate::{Error, Rational, Result};

/// `∏_{σ ∈ K_s} N(σ)` with `δ = Σ (−1)^i δ_i`, where `δ_i` omits the i-th vertex.
/// `sys` is covariant on `k.face_poset()`.
pub fn simplicial_cochains<A: Atom>(
    ctx: &A::Context,
    k: &SimplicialComplex,
    sys: &DualCoefficientSystem<A>,
) -> Result<CochainComplex<A>> {
    if sys.variance != Variance::Covariant || sys.poset.len() != k.simplices.len() {
        return Err(Error::InvalidSystem("expected a dual coefficient system on the face poset".into()));
    }
    let index: BTreeMap<&Vec<usize>, usize> = k.simplices.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let top = k.dim().unwrap_or(0);
    let levels: Vec<Vec<Vec<usize>>> = (0..=top).map(|d| k.simplices_of_dim(d)).collect();
    let objects: Vec<AtomicModule<A>> = levels
        .iter()
        .map(|sims| {
            let parts: Vec<AtomicModule<A>> =
                sims.iter().map(|s| sys.values[index[s]].clone().relabel(k.simplex_name(s))).collect();
            AtomicModule::direct_sum(parts.iter())
        })
        .collect();
    let mut differentials = Vec::new();
    for d in 0..top {
        let (src, dst) = (&objects[d], &objects[d + 1]);
        let mut matrix = Matrix::<Rational>::zeros(dst.len(), src.len());
        let src_off = offsets(&levels[d], &index, sys);
        let dst_off = offsets(&levels[d + 1], &index, sys);
        let src_pos: BTreeMap<&Vec<usize>, usize> = levels[d].iter().enumerate().map(|(i, s)| (s, i)).collect();
        for (j, sigma) in levels[d + 1].iter().enumerate() {
            for i in 0..sigma.len() {
                let mut tau = sigma.clone();
                tau.remove(i);
                let f = sys.map(index[&tau], index[sigma])?;
                let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
                let (r0, c0) = (dst_off[j], src_off[src_pos[&tau]]);
                for (r, c, x) in f.matrix.entries() {
                    matrix[(r0 + r, c0 + c)] = matrix[(r0 + r, c0 + c)].clone() + sign.clone() * x.clone();
                }
            }
        }
        differentials.push(ModuleMap::new(src.clone(), dst.clone(), matrix)?);
    }
    CochainComplex::new(ctx.clone(), objects, differentials)
}

fn offsets<A: Atom>(sims: &[Vec<usize>], index: &BTreeMap<&Vec<usize>, usize>, sys: &CoefficientSystem<A>) -> Vec<usize> {
    let mut out = Vec::with_capacity(sims.len());
    let mut acc = 0;
    for s in sims {
        out.push(acc);
        acc += sys.values[index[s]].len();
    }
    out
}

pub fn simplicial_cohomology<A: Atom>(
    ctx: &A::Context,
    k: &SimplicialComplex,
    sys: &DualCoefficientSystem<A>,
) -> Result<CohomologyTable> {
    cohomology(&simplicial_cochains(ctx, k, sys)?)
}

/// `σ ↦ L_σ M` with the canonical maps `L_τ M → L_σ M` for `τ ⊆ σ`, which
/// exist when the system is left absorbative.
pub fn localized_dual_system<A: Atom>(
    k: &SimplicialComplex,
    m: &AtomicModule<A>,
    sys: &dyn LocalizationSystem<A>,
) -> Result<DualCoefficientSystem<A>> {
    let poset = k.face_poset();
    let n = poset.len();
    let mut values = Vec::with_capacity(n);
    let mut kept = Vec::with_capacity(n);
    for p in 0..n {
        let (v, unit) = localize_module(sys, p, p, m)?;
        // original atom index of each surviving atom
        let idx: Vec<usize> = (0..unit.matrix.nrows())
            .map(|r| (0..unit.matrix.ncols()).find(|&c| unit.matrix[(r, c)].is_one()).expect("unit selects"))
            .collect();
        values.push(v);
        kept.push(idx);
    }
    let mut maps = BTreeMap::new();
    for p in 0..n {
        for q in poset.below(p) {
            let mut matrix = Matrix::<Rational>::zeros(values[p].len(), values[q].len());
            for (r, a) in kept[p].iter().enumerate() {
                match kept[q].iter().position(|b| b == a) {
                    Some(c) => matrix[(r, c)] = Rational::one(),
                    None => {
                        return Err(Error::HypothesisViolated(format!(
                            "{} is not left absorbative at {} ⊆ {}",
                            sys.name(),
                            poset.id(q),
                            poset.id(p)
                        )))
                    }
                }
            }
            maps.insert((q, p), ModuleMap::new(values[q].clone(), values[p].clone(), matrix)?);
        }
    }
    CoefficientSystem::new(poset, Variance::Covariant, values, maps)
}

#[derive(Clone, Debug)]
pub struct SubdivisionComparison {
    pub simplicial: CohomologyTable,
    pub adelic: CohomologyTable,
    pub agree: bool,
}

/// `H^*(K; LM)` against the adelic cohomology of the face poset with the
/// constant system `M` and the localization system `L`.
pub fn subdivision_compare<A: Atom>(
    ctx: &A::Context,
    k: &SimplicialComplex,
    m: &AtomicModule<A>,
    sys: Arc<dyn LocalizationSystem<A>>,
) -> Result<SubdivisionComparison> {
    let dual = localized_dual_system(k, m, sys.as_ref())?;
    let simplicial = simplicial_cohomology(ctx, k, &dual)?;
    let coeffs = CoefficientSystem::constant(k.face_poset(), Variance::Contravariant, m.clone());
    let spec = AdelicSpec::new(ctx.clone(), coeffs, sys, ProductPolicy::SpecializationsOnly)?;
    let adelic = adelic_cohomology(&spec)?;
    let agree = simplicial == adelic;
    Ok(SubdivisionComparison { simplicial, adelic, agree })
}

/// The constant dual system `σ ↦ M` on the face poset.
pub fn constant_dual<A: Atom>(k: &SimplicialComplex, m: AtomicModule<A>) -> DualCoefficientSystem<A> {
    CoefficientSystem::constant(k.face_poset(), Variance::Covariant, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{IdentitySystem, InversionSystem};
    use crate::exactla::abelian::{AbelianContext, NumberAtom};
    use crate::exactla::graded::{GradedContext, MonomialAtom};
    use crate::exactla::{AbelianGroup, Window};
    use crate::poset::{order_complex, punctured_cube};

    fn integers() -> AtomicModule<NumberAtom> {
        AtomicModule::from_atoms(vec![NumberAtom::Integer])
    }

    #[test]
    fn circle_and_sphere() {
        let ctx = AbelianContext::integers();
        let circle = SimplicialComplex::numbered(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let h = simplicial_cohomology(&ctx, &circle, &constant_dual(&circle, integers())).unwrap();
        assert_eq!(h.group(0), AbelianGroup::free(1));
        assert_eq!(h.group(1), AbelianGroup::free(1));
        let sphere = SimplicialComplex::numbered(4, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]).unwrap();
        let h = simplicial_cohomology(&ctx, &sphere, &constant_dual(&sphere, integers())).unwrap();
        assert_eq!(h.group(1), AbelianGroup::free(0));
        assert_eq!(h.group(2), AbelianGroup::free(1));
    }

    #[test]
    fn subdivision_of_a_circle() {
        let ctx = AbelianContext::integers();
        let circle = SimplicialComplex::numbered(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let sub = order_complex(&circle.face_poset());
        let a = simplicial_cohomology(&ctx, &circle, &constant_dual(&circle, integers())).unwrap();
        let b = simplicial_cohomology(&ctx, &sub, &constant_dual(&sub, integers())).unwrap();
        assert_eq!(a, b);
        let cmp = subdivision_compare(&ctx, &circle, &integers(), Arc::new(IdentitySystem)).unwrap();
        assert!(cmp.agree);
    }

    #[test]
    fn inverted_variables_on_a_square() {
        let k = punctured_cube(&["x", "y"]).unwrap();
        let sys = InversionSystem { inverted: k.simplices.iter().cloned().collect() };
        let ctx = GradedContext::fine(Window::cube(2, -2, 2).unwrap());
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2)]);
        let cmp = subdivision_compare(&ctx, &k, &m, Arc::new(sys)).unwrap();
        assert!(cmp.agree, "{} vs {}", cmp.simplicial, cmp.adelic);
        // Čech: H^1 is the local cohomology in negative bidegrees
        assert_eq!(cmp.simplicial.dim(1, &[-1, -1]), 1);
        assert_eq!(cmp.simplicial.dim(1, &[0, 0]), 0);
    }
}
