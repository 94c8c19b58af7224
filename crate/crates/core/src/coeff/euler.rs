//! Euler-class systems and localization as a directed colimit.
//!
//! `ℰ⁻¹M = colim(M --e₁--> M --e₁e₂--> M --e₁e₂e₃--> …)` where the
//! generating sequence cycles through the listed generators. The colimit is
//! computed atom by atom, and every answer carries the stage after which the
//! directed system is constant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::localization::LocalizationSystem;
use super::{CoefficientSystem, Variance};
use crate::exactla::abelian::{factorize, AbelianContext, NumberAtom};
use crate::exactla::graded::{GradedContext, MonomialAtom};
use crate::exactla::matrix::Matrix;
use crate::exactla::table::multidegree_key;
use crate::exactla::{Atom, AtomicModule, ModuleMap};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Stabilization {
    /// Stage after which the system is constant, per multidegree of the window.
    Degreewise(BTreeMap<String, usize>),
    /// Images in the colimit are constant from this stage on.
    Stage(usize),
    /// Each stage is the same module and the transition maps are injective but
    /// never onto; the colimit is identified structurally.
    Structural,
}

pub trait EulerAtom: Atom {
    type Class: Clone + Debug + PartialEq + Serialize + Send + Sync;

    /// Colimit of one atom along the generating sequence.
    fn euler_colimit(ctx: &Self::Context, atom: &Self, gens: &[Self::Class]) -> Result<(Option<Self>, Stabilization)>;
}

/// A homogeneous element `unit · x^exponent` of a monomial ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialClass {
    pub exponent: Vec<i64>,
    pub unit: Rational,
}

impl MonomialClass {
    pub fn monomial(exponent: Vec<i64>) -> Self {
        MonomialClass { exponent, unit: Rational::one() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars])
    }

    pub fn mul(&self, other: &MonomialClass) -> MonomialClass {
        MonomialClass {
            exponent: self.exponent.iter().zip(&other.exponent).map(|(a, b)| a + b).collect(),
            unit: self.unit.clone() * other.unit.clone(),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.exponent.len()).filter(|&i| self.exponent[i] != 0).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.unit.is_zero() || self.exponent.iter().any(|&e| e < 0) {
            return Err(Error::InvalidSystem(format!("{self:?} is not a nonzero polynomial class")));
        }
        Ok(())
    }
}

/// Cumulative degree shifts `s_n = Σ_{j ≤ n} deg(e₁⋯e_j)` of the directed system.
fn stage_shifts(gens: &[MonomialClass], nvars: usize, stages: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0; nvars]];
    let mut prefix = vec![0i64; nvars];
    for n in 0..stages {
        let g = &gens[n % gens.len()];
        for (a, e) in prefix.iter_mut().zip(&g.exponent) {
            *a += e;
        }
        let last = out.last().unwrap().clone();
        out.push(last.iter().zip(&prefix).map(|(a, b)| a + b).collect());
    }
    out
}

impl EulerAtom for MonomialAtom {
    type Class = MonomialClass;

    fn euler_colimit(ctx: &GradedContext, atom: &Self, gens: &[MonomialClass]) -> Result<(Option<Self>, Stabilization)> {
        let n = atom.nvars();
        for g in gens {
            g.validate()?;
            if g.exponent.len() != n {
                return Err(Error::ShapeMismatch(format!("class in {} variables on an atom in {n}", g.exponent.len())));
            }
        }
        let growing: BTreeSet<usize> = gens.iter().flat_map(|g| g.support()).collect();
        let growing: Vec<usize> = growing.into_iter().collect();
        let limit = atom.invert(&growing);
        let mut certificate = BTreeMap::new();
        if growing.is_empty() {
            for d in ctx.window.degrees() {
                certificate.insert(multidegree_key(&d), 0);
            }
            return Ok((limit, Stabilization::Degreewise(certificate)));
        }
        // every growing coordinate increases by at least one per full cycle
        let span: i64 = ctx.window.hi.iter().zip(&ctx.window.lo).map(|(h, l)| h - l).max().unwrap_or(0);
        let bound: i64 = atom.lower.iter().chain(atom.upper.iter()).flatten().map(|x| x.abs()).max().unwrap_or(0);
        let max_stage = gens.len() * (span + bound + ctx.window.lo.iter().chain(&ctx.window.hi).map(|x| x.abs()).max().unwrap_or(0) + 2) as usize;
        let shifts = stage_shifts(gens, n, max_stage + 1);
        for d in ctx.window.degrees() {
            let Some(e) = ctx.exponent(&d) else {
                certificate.insert(multidegree_key(&d), 0);
                continue;
            };
            let member = |k: usize| {
                let shifted: Vec<i64> = e.iter().zip(&shifts[k]).map(|(a, b)| a + b).collect();
                atom.contains_exponent(&shifted)
            };
            let target = limit.as_ref().is_some_and(|l| l.contains_exponent(&e));
            // settled: no later stage can change membership
            let settled = |k: usize| {
                let shifted: Vec<i64> = e.iter().zip(&shifts[k]).map(|(a, b)| a + b).collect();
                if target {
                    growing.iter().all(|&i| atom.lower[i].is_none_or(|l| shifted[i] >= l))
                } else {
                    !member(k)
                        && (growing.iter().any(|&i| atom.upper[i].is_some_and(|u| shifted[i] > u))
                            || !limit.as_ref().is_none_or(|l| l.contains_exponent(&e)))
                }
            };
            let stage = (0..=max_stage).find(|&k| member(k) == target && settled(k)).ok_or_else(|| {
                Error::NonStabilizing(format!("multidegree {} within {} stages", multidegree_key(&d), max_stage))
            })?;
            certificate.insert(multidegree_key(&d), stage);
        }
        Ok((limit, Stabilization::Degreewise(certificate)))
    }
}

impl EulerAtom for NumberAtom {
    /// A positive integer acting by multiplication.
    type Class = u64;

    fn euler_colimit(_ctx: &AbelianContext, atom: &Self, gens: &[u64]) -> Result<(Option<Self>, Stabilization)> {
        if gens.contains(&0) {
            return Err(Error::InvalidSystem("0 in a multiplicative set".into()));
        }
        let primes: BTreeSet<u64> = gens.iter().flat_map(|&g| factorize(g).into_iter().map(|(p, _)| p)).collect();
        match atom {
            _ if primes.is_empty() => Ok((Some(atom.clone()), Stabilization::Stage(0))),
            NumberAtom::Cyclic(n) => {
                let g_inf: u64 = factorize(*n).into_iter().filter(|(p, _)| primes.contains(p)).map(|(p, e)| p.pow(e)).product();
                // kernel of ℤ/n → colimit after k stages is killed by Q_k = P_1⋯P_k
                let n_big = BigInt::from(*n);
                let mut prefix = BigInt::one();
                let mut cumulative = BigInt::one();
                let mut stage = 0;
                while cumulative.gcd(&n_big) != BigInt::from(g_inf) {
                    prefix *= gens[stage % gens.len()];
                    cumulative = (cumulative * &prefix) % (&n_big * &n_big);
                    stage += 1;
                }
                let rest = n / g_inf;
                Ok(((rest > 1).then_some(NumberAtom::Cyclic(rest)), Stabilization::Stage(stage)))
            }
            NumberAtom::Localized(t) => {
                let kept: Vec<u64> = t.iter().copied().filter(|p| !primes.contains(p)).collect();
                if kept.len() == t.len() {
                    Ok((Some(atom.clone()), Stabilization::Stage(0)))
                } else {
                    Ok((Some(NumberAtom::localized(kept)), Stabilization::Structural))
                }
            }
            NumberAtom::Complete(p) if primes.contains(p) => Ok((Some(NumberAtom::LocalField(*p)), Stabilization::Structural)),
            NumberAtom::Integer => Err(Error::Unsupported("inverting integers in ℤ leaves the atom model".into())),
            _ => Ok((Some(atom.clone()), Stabilization::Stage(0))),
        }
    }
}

/// `ℰ⁻¹M` with its unit and one certificate per atom of `M`.
#[derive(Clone, Debug)]
pub struct EulerLocalization<A: EulerAtom> {
    pub module: AtomicModule<A>,
    pub unit: ModuleMap<A>,
    pub certificates: Vec<Stabilization>,
}

pub fn euler_localize<A: EulerAtom>(ctx: &A::Context, gens: &[A::Class], m: &AtomicModule<A>) -> Result<EulerLocalization<A>> {
    let mut atoms = Vec::new();
    let mut blocks = m.blocks.clone();
    let mut kept = Vec::new();
    let mut certificates = Vec::new();
    for (b, r) in m.block_ranges().into_iter().enumerate() {
        let mut len = 0;
        for i in r {
            let (a, cert) = A::euler_colimit(ctx, &m.atoms[i], gens)?;
            certificates.push(cert);
            if let Some(a) = a {
                atoms.push(a);
                kept.push(i);
                len += 1;
            }
        }
        blocks[b].len = len;
    }
    let module = AtomicModule { atoms, blocks };
    let mut matrix = Matrix::zeros(module.len(), m.len());
    for (row, &i) in kept.iter().enumerate() {
        matrix[(row, i)] = Rational::one();
    }
    let unit = ModuleMap::new(m.clone(), module.clone(), matrix)?;
    Ok(EulerLocalization { module, unit, certificates })
}

/// A coefficient system of monomial rings (one atom per element) with
/// generators of `ℰ_{℘₁/℘₂} ⊆ R(℘₂)` for `℘₁ > ℘₂`; `ℰ_{℘/℘} = {1}`.
#[derive(Clone, Debug)]
pub struct EulerClassSystem {
    pub rings: CoefficientSystem<MonomialAtom>,
    pub generators: BTreeMap<(usize, usize), Vec<MonomialClass>>,
}

impl EulerClassSystem {
    pub fn new(rings: CoefficientSystem<MonomialAtom>, generators: BTreeMap<(usize, usize), Vec<MonomialClass>>) -> Result<Self> {
        if rings.variance != Variance::Contravariant {
            return Err(Error::InvalidSystem("Euler classes need a coefficient system of rings".into()));
        }
        if rings.values.iter().any(|v| v.len() != 1) {
            return Err(Error::InvalidSystem("each ring must be a single monomial atom".into()));
        }
        for (&(p1, p2), gens) in &generators {
            if !rings.poset.lt(p2, p1) {
                return Err(Error::InvalidPoset(format!("classes for {p1} > {p2}")));
            }
            for g in gens {
                g.validate()?;
                if g.exponent.len() != rings.values[p2].atoms[0].nvars() {
                    return Err(Error::ShapeMismatch("class and ring disagree on variables".into()));
                }
            }
        }
        Ok(EulerClassSystem { rings, generators })
    }

    pub fn classes(&self, p1: usize, p2: usize) -> Vec<MonomialClass> {
        self.generators.get(&(p1, p2)).cloned().unwrap_or_default()
    }

    /// `R_*`: pushes a class of `R(℘₁)` into `R(℘₂)` along the ring map.
    pub fn push(&self, class: &MonomialClass, p1: usize, p2: usize) -> Result<MonomialClass> {
        let f = self.rings.restriction(p1, p2)?;
        let target = &self.rings.values[p2].atoms[0];
        let scalar = f.matrix[(0, 0)].clone();
        if scalar.is_zero() || !target.contains_exponent(&class.exponent) {
            return Err(Error::InvalidSystem("a class maps to zero".into()));
        }
        Ok(MonomialClass { exponent: class.exponent.clone(), unit: class.unit.clone() * scalar })
    }

    /// `ℰ_{℘₀/℘₂} = ⟨R_* ℰ_{℘₀/℘₁}, ℰ_{℘₁/℘₂}⟩` for every chain, compared on the
    /// variables the generators invert.
    pub fn check_composition_law(&self) -> Result<()> {
        let p = &self.rings.poset;
        let supp = |gens: &[MonomialClass]| -> BTreeSet<usize> { gens.iter().flat_map(|g| g.support()).collect() };
        for a in 0..p.len() {
            for b in p.below(a) {
                for c in p.below(b) {
                    let direct = supp(&self.classes(a, c));
                    let pushed: Vec<MonomialClass> =
                        self.classes(a, b).iter().map(|g| self.push(g, b, c)).collect::<Result<_>>()?;
                    let mut generated = supp(&pushed);
                    generated.extend(supp(&self.classes(b, c)));
                    if direct != generated {
                        return Err(Error::InvalidSystem(format!(
                            "composition law fails for {} > {} > {}",
                            p.id(a),
                            p.id(b),
                            p.id(c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn localize(&self, ctx: &GradedContext, p1: usize, p2: usize, m: &AtomicModule<MonomialAtom>) -> Result<EulerLocalization<MonomialAtom>> {
        if !self.rings.poset.leq(p2, p1) {
            return Err(Error::InvalidPoset(format!("{p1} ≥ {p2} fails")));
        }
        euler_localize(ctx, &self.classes(p1, p2), m)
    }
}

/// `L_{℘₁/℘₂} = ℰ⁻¹_{℘₁/℘₂}` as a relative localization system.
impl LocalizationSystem<MonomialAtom> for EulerClassSystem {
    fn name(&self) -> String {
        "euler".into()
    }

    fn apply(&self, prime: usize, base: usize, atom: &MonomialAtom) -> Option<MonomialAtom> {
        if prime == base {
            return Some(atom.clone());
        }
        let vars: BTreeSet<usize> = self.classes(prime, base).iter().flat_map(|g| g.support()).collect();
        atom.invert(&vars.into_iter().collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Window;

    #[test]
    fn inverting_c_gives_laurent_polynomials() {
        let ctx = GradedContext::new(vec![2], Window::cube(1, -8, 8).unwrap()).unwrap();
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        let loc = euler_localize(&ctx, &[MonomialClass::monomial(vec![1])], &m).unwrap();
        let a = &loc.module.atoms[0];
        for d in (-8..=8).step_by(2) {
            assert!(a.contains_exponent(&[d / 2]));
        }
        let Stabilization::Degreewise(cert) = &loc.certificates[0] else { panic!() };
        // degree -6 needs three multiplications by c to land in ℚ[c]
        assert_eq!(cert["(-6)"], 2);
        assert_eq!(cert["(4)"], 0);
        assert!(!loc.unit.is_atomwise_iso());
    }

    #[test]
    fn trivial_set_is_identity() {
        let ctx = GradedContext::fine(Window::cube(1, -2, 2).unwrap());
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1), MonomialAtom::residue_field(1)]);
        let loc = euler_localize(&ctx, &[MonomialClass::one(1)], &m).unwrap();
        assert_eq!(loc.module, m);
        assert!(loc.unit.is_atomwise_iso());
    }

    #[test]
    fn nilpotent_classes_kill_torsion() {
        let ctx = GradedContext::fine(Window::cube(1, -3, 3).unwrap());
        let m = AtomicModule::from_atoms(vec![MonomialAtom::residue_field(1)]);
        let loc = euler_localize(&ctx, &[MonomialClass::monomial(vec![1])], &m).unwrap();
        assert!(loc.module.is_empty());
    }

    #[test]
    fn localizing_twice_is_idempotent() {
        let ctx = GradedContext::new(vec![2], Window::cube(1, -6, 6).unwrap()).unwrap();
        let m = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
        let gens = [MonomialClass::monomial(vec![1])];
        let once = euler_localize(&ctx, &gens, &m).unwrap();
        let twice = euler_localize(&ctx, &gens, &once.module).unwrap();
        assert!(twice.unit.is_atomwise_iso());
    }

    #[test]
    fn powers_of_two_on_z6() {
        let ctx = AbelianContext::integers();
        let (a, cert) = NumberAtom::euler_colimit(&ctx, &NumberAtom::Cyclic(6), &[2]).unwrap();
        assert_eq!(a, Some(NumberAtom::Cyclic(3)));
        assert_eq!(cert, Stabilization::Stage(1));
        let (a, _) = NumberAtom::euler_colimit(&ctx, &NumberAtom::Cyclic(8), &[2]).unwrap();
        assert_eq!(a, None);
        let (a, cert) = NumberAtom::euler_colimit(&ctx, &NumberAtom::Cyclic(6), &[]).unwrap();
        assert_eq!((a, cert), (Some(NumberAtom::Cyclic(6)), Stabilization::Stage(0)));
        assert!(NumberAtom::euler_colimit(&ctx, &NumberAtom::Integer, &[2]).is_err());
    }
}
