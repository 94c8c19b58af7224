//! Dimension-one number rings `ℤ_(S)`: the poset `(0) > (p)`, `p ∈ S`, with
//! rationalization, localization at primes and structural p-completion of
//! finitely generated modules, the three coefficient variants of the Hasse
//! square, the constructive splitting witnessing `H¹ = 0`, and the explicit
//! identification `H⁰ ≅ M`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::padic::{has_denominator_in, PAdicElement};
use crate::adelic::{augmented_complex, AdelicSpec, Augmentation, ProductPolicy};
use crate::coeff::{localize_module, CoefficientSystem, LocalizationSystem, Variance};
use crate::exactla::abelian::{factorize, p_part, residue, valuation, AbelianContext, NumberAtom};
use crate::exactla::matrix::Matrix;
use crate::exactla::snf::smith_normal_form;
use crate::exactla::{cohomology, AbelianGroup, Atom, AtomicModule, CochainComplex, CohomologyTable, ModuleMap};
use crate::poset::Poset;
use crate::{Error, IntMatrix, Rational, Result};

/// Which coefficient system and localizations assemble the square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum HasseVariant {
    /// `(L, ΛM)`: `M(0) = M`, `M(p) = Λ_p M`, localizations `L_℘`.
    LocalizedCompletion,
    /// `(L, Λ′M)`: completion only on the terminal part of the dimension
    /// poset; in dimension one the terminal part is the closed points, so
    /// this coincides with `(L, ΛM)`.
    LocalCompletion,
    /// `(ΛL, M)`: constant `M` with the functors `Λ_℘ L_℘`.
    CompletedLocalization,
}

impl HasseVariant {
    pub const ALL: [HasseVariant; 3] =
        [HasseVariant::LocalizedCompletion, HasseVariant::LocalCompletion, HasseVariant::CompletedLocalization];

    pub fn name(&self) -> &'static str {
        match self {
            HasseVariant::LocalizedCompletion => "l-lambda",
            HasseVariant::LocalCompletion => "l-lambda-prime",
            HasseVariant::CompletedLocalization => "lambda-l",
        }
    }
}

impl fmt::Display for HasseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HasseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l-lambda" | "(L,LambdaM)" => Ok(HasseVariant::LocalizedCompletion),
            "l-lambda-prime" | "(L,Lambda'M)" => Ok(HasseVariant::LocalCompletion),
            "lambda-l" | "(LambdaL,M)" => Ok(HasseVariant::CompletedLocalization),
            _ => Err(Error::Unsupported(format!("variant {s:?}; expected l-lambda, l-lambda-prime or lambda-l"))),
        }
    }
}

/// `L_℘`: rationalization at `(0)`, localization at `(p)`.
pub fn localize_at(point: Option<u64>, atom: &NumberAtom) -> Option<NumberAtom> {
    use NumberAtom::*;
    match point {
        None => match atom {
            Integer | Localized(_) | Rational => Some(Rational),
            Complete(q) | LocalField(q) => Some(LocalField(*q)),
            Cyclic(_) => None,
        },
        Some(p) => match atom {
            Integer => Some(Localized(vec![p])),
            Localized(t) => Some(if t.contains(&p) { Localized(vec![p]) } else { Rational }),
            Rational => Some(Rational),
            Complete(q) => Some(if *q == p { Complete(p) } else { LocalField(*q) }),
            LocalField(q) => Some(LocalField(*q)),
            Cyclic(n) => {
                let m = p_part(*n, p);
                (m > 1).then_some(Cyclic(m))
            }
        },
    }
}

/// `Λ_℘`: identity at `(0)`, derived p-completion at `(p)` (p-divisible
/// atoms complete to zero).
pub fn complete_at(point: Option<u64>, atom: &NumberAtom) -> Option<NumberAtom> {
    use NumberAtom::*;
    let Some(p) = point else { return Some(atom.clone()) };
    match atom {
        Integer => Some(Complete(p)),
        Localized(t) if t.contains(&p) => Some(Complete(p)),
        Complete(q) if *q == p => Some(Complete(p)),
        Cyclic(n) => {
            let m = p_part(*n, p);
            (m > 1).then_some(Cyclic(m))
        }
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumberFunctor {
    Localization,
    Completion,
    /// `Λ_℘ ∘ L_℘`.
    CompletedLocalization,
}

/// A localization system on the poset of `ℤ_(S)`; `points[i]` is `None` for
/// the generic point.
#[derive(Clone, Debug)]
pub struct NumberSystem {
    pub points: Vec<Option<u64>>,
    pub functor: NumberFunctor,
}

impl LocalizationSystem<NumberAtom> for NumberSystem {
    fn name(&self) -> String {
        match self.functor {
            NumberFunctor::Localization => "L".into(),
            NumberFunctor::Completion => "Lambda".into(),
            NumberFunctor::CompletedLocalization => "Lambda∘L".into(),
        }
    }

    fn apply(&self, prime: usize, _base: usize, atom: &NumberAtom) -> Option<NumberAtom> {
        let pt = self.points[prime];
        match self.functor {
            NumberFunctor::Localization => localize_at(pt, atom),
            NumberFunctor::Completion => complete_at(pt, atom),
            NumberFunctor::CompletedLocalization => localize_at(pt, atom).and_then(|a| complete_at(pt, &a)),
        }
    }
}

/// The poset `(0) > (p)` with element 0 generic, and the matching points.
pub fn number_poset(primes: &[u64]) -> Result<(Poset, Vec<Option<u64>>)> {
    if primes.is_empty() {
        return Err(Error::InvalidSystem("S must contain at least one prime".into()));
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &p in &sorted {
        if p < 2 || factorize(p).len() != 1 || factorize(p)[0].1 != 1 {
            return Err(Error::InvalidSystem(format!("{p} is not prime")));
        }
    }
    let mut ids = vec!["(0)".to_string()];
    ids.extend(sorted.iter().map(|p| format!("({p})")));
    let rel: Vec<(usize, usize)> = (1..ids.len()).map(|i| (0, i)).collect();
    let poset = Poset::from_indices(ids, &rel)?;
    let mut points = vec![None];
    points.extend(sorted.into_iter().map(Some));
    Ok((poset, points))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AtomCoordinate {
    Free { row: usize },
    /// The `p^e`-primary part of the row's invariant factor.
    Cyclic { row: usize, modulus: u64 },
}

/// A finitely generated `ℤ_(S)`-module `ℤ_(S)^g / im(relations)`, decomposed
/// by Smith normal form into free atoms and primary cyclic atoms.
#[derive(Clone, Debug)]
pub struct PresentedModule {
    pub primes: Vec<u64>,
    pub relations: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    /// S-part of the invariant factor of each row; `0` for free rows.
    pub row_orders: Vec<BigInt>,
    pub atoms: AtomicModule<NumberAtom>,
    pub coordinates: Vec<AtomCoordinate>,
}

fn s_part(d: &BigInt, primes: &[u64]) -> BigInt {
    let mut out = BigInt::one();
    let mut d = d.abs();
    for &p in primes {
        let pb = BigInt::from(p);
        while d.is_multiple_of(&pb) {
            d /= &pb;
            out *= &pb;
        }
    }
    out
}

impl PresentedModule {
    /// `relations` has one row per generator and one column per relation.
    pub fn new(primes: &[u64], relations: IntMatrix) -> Result<Self> {
        let mut primes = primes.to_vec();
        primes.sort_unstable();
        primes.dedup();
        let g = relations.nrows();
        let (u, u_inv, diag) = if relations.ncols() == 0 {
            (Matrix::identity(g), Matrix::identity(g), Vec::new())
        } else {
            let snf = smith_normal_form(&relations);
            let diag = snf.diagonal();
            (snf.u, snf.u_inv, diag)
        };
        let local = NumberAtom::localized(primes.iter().copied());
        let mut atoms = Vec::new();
        let mut coordinates = Vec::new();
        let mut row_orders = Vec::with_capacity(g);
        for row in 0..g {
            let d = diag.get(row).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                row_orders.push(BigInt::zero());
                atoms.push(local.clone());
                coordinates.push(AtomCoordinate::Free { row });
                continue;
            }
            let n = s_part(&d, &primes);
            for &p in &primes {
                let q = p_part(n.to_u64().ok_or_else(|| Error::Unsupported(format!("torsion order {n} is too large")))?, p);
                if q > 1 {
                    atoms.push(NumberAtom::Cyclic(q));
                    coordinates.push(AtomCoordinate::Cyclic { row, modulus: q });
                }
            }
            row_orders.push(n);
        }
        Ok(PresentedModule { primes, relations, u, u_inv, row_orders, atoms: AtomicModule::new("M", atoms), coordinates })
    }

    /// The free module of rank `r`.
    pub fn free(primes: &[u64], r: usize) -> Result<Self> {
        Self::new(primes, Matrix::zeros(r, 0))
    }

    pub fn generators(&self) -> usize {
        self.relations.nrows()
    }

    /// Expected `H⁰`: free rank and primary torsion.
    pub fn group(&self) -> AbelianGroup {
        let rank = self.coordinates.iter().filter(|c| matches!(c, AtomCoordinate::Free { .. })).count();
        let torsion = self.coordinates.iter().filter_map(|c| match c {
            AtomCoordinate::Cyclic { modulus, .. } => Some(BigInt::from(*modulus)),
            _ => None,
        });
        AbelianGroup::with_torsion(rank, torsion)
    }

    fn transformed(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.u.nrows())
            .map(|i| (0..x.len()).fold(Rational::zero(), |acc, j| acc + Rational::from_integer(self.u[(i, j)].clone()) * x[j].clone()))
            .collect()
    }

    /// Atom coordinates of an element given in generator coordinates.
    pub fn to_atoms(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let y = self.transformed(x);
        self.coordinates
            .iter()
            .map(|c| match c {
                AtomCoordinate::Free { row } => Ok(y[*row].clone()),
                AtomCoordinate::Cyclic { row, modulus } => residue(&y[*row], &BigInt::from(*modulus))
                    .map(Rational::from_integer)
                    .ok_or_else(|| Error::InvalidMap(format!("{} is not in ℤ_(S)", y[*row]))),
            })
            .collect()
    }

    /// Generator coordinates of an element given by atom coordinates; the
    /// residues of each torsion row are recombined by CRT.
    pub fn from_atoms(&self, vals: &[Rational]) -> Result<Vec<Rational>> {
        let mut y = vec![Rational::zero(); self.u.nrows()];
        let mut residues: BTreeMap<usize, Vec<(BigInt, BigInt)>> = BTreeMap::new();
        for (c, v) in self.coordinates.iter().zip(vals) {
            match c {
                AtomCoordinate::Free { row } => y[*row] = v.clone(),
                AtomCoordinate::Cyclic { row, modulus } => {
                    let m = BigInt::from(*modulus);
                    let r = residue(v, &m).ok_or_else(|| Error::InvalidMap(format!("{v} is not a residue mod {m}")))?;
                    residues.entry(*row).or_default().push((r, m));
                }
            }
        }
        for (row, rs) in residues {
            y[row] = Rational::from_integer(crt(&rs).0);
        }
        Ok((0..self.u_inv.nrows())
            .map(|i| (0..y.len()).fold(Rational::zero(), |acc, j| acc + Rational::from_integer(self.u_inv[(i, j)].clone()) * y[j].clone()))
            .collect())
    }

    /// Whether two elements of `ℤ_(S)^g` have the same class in `M`.
    pub fn same_class(&self, x: &[Rational], z: &[Rational]) -> bool {
        let diff: Vec<Rational> = x.iter().zip(z).map(|(a, b)| a.clone() - b.clone()).collect();
        let y = self.transformed(&diff);
        y.iter().zip(&self.row_orders).all(|(v, n)| {
            if v.is_zero() {
                return true;
            }
            if n.is_zero() {
                return false;
            }
            self.primes.iter().all(|&p| valuation(v, p) >= valuation(&Rational::from_integer(n.clone()), p))
        })
    }
}

/// Chinese remainder: the residue modulo the product of pairwise coprime moduli.
pub fn crt(residues: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, n) in residues {
        let g = m.extended_gcd(n);
        debug_assert!(g.gcd.is_one(), "moduli must be coprime");
        // x + m·t ≡ r (mod n)
        let t = ((r - &x) * g.x).mod_floor(n);
        x += &m * t;
        m *= n;
        x = x.mod_floor(&m);
    }
    (x, m)
}

/// The adelic spec of `ℤ_(S)` with coefficients in `M`, augmented by `M`.
pub fn hasse_spec(
    m: &PresentedModule,
    variant: HasseVariant,
    policy: ProductPolicy,
    precision: u32,
) -> Result<AdelicSpec<NumberAtom>> {
    if precision == 0 {
        return Err(Error::InsufficientPrecision("precision must be at least 1".into()));
    }
    let (poset, points) = number_poset(&m.primes)?;
    let ctx = AbelianContext::semilocal(m.primes.iter().copied(), precision);
    let global = m.atoms.clone();
    let n = poset.len();
    let (coeffs, aug_maps, functor) = match variant {
        HasseVariant::LocalizedCompletion | HasseVariant::LocalCompletion => {
            let completion = NumberSystem { points: points.clone(), functor: NumberFunctor::Completion };
            let mut values = vec![global.clone()];
            let mut units = vec![ModuleMap::identity(global.clone())];
            for p in 1..n {
                let (v, unit) = localize_module(&completion, p, p, &global)?;
                values.push(v.relabel(poset.id(p)));
                units.push(ModuleMap { codomain: values[p].clone(), ..unit });
            }
            let maps: BTreeMap<(usize, usize), ModuleMap<NumberAtom>> =
                (1..n).map(|p| ((0, p), units[p].clone())).map(|(k, f)| (k, ModuleMap { domain: values[0].clone(), ..f })).collect();
            let coeffs = CoefficientSystem::new(poset, Variance::Contravariant, values, maps)?;
            (coeffs, units, NumberFunctor::Localization)
        }
        HasseVariant::CompletedLocalization => {
            let coeffs = CoefficientSystem::constant(poset, Variance::Contravariant, global.clone());
            (coeffs, vec![ModuleMap::identity(global.clone()); n], NumberFunctor::CompletedLocalization)
        }
    };
    let sys = NumberSystem { points, functor };
    AdelicSpec::new(ctx, coeffs, Arc::new(sys), policy)?.with_augmentation(Augmentation { global, maps: aug_maps })
}

/// The diagonal unit `φ: M → C⁰` and the read-back `ψ: H⁰ → M`, with the
/// checks that make them mutually inverse.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub cohomology: CohomologyTable,
    pub expected: AbelianGroup,
    /// `δ⁰ ∘ φ = 0`.
    pub in_kernel: bool,
    /// `ψ φ = id` on the generators of `M`.
    pub round_trip: bool,
    pub higher_vanish: bool,
    phi: Matrix<Rational>,
    /// Position in `C⁰` read by `ψ` for each atom of `M`.
    readback: Vec<usize>,
}

impl Reconstruction {
    pub fn is_isomorphism(&self) -> bool {
        self.cohomology.group(0) == self.expected && self.in_kernel && self.round_trip && self.higher_vanish
    }

    /// `φ` on atom coordinates.
    pub fn phi(&self, atoms: &[Rational]) -> Vec<Rational> {
        self.phi.apply(atoms)
    }

    /// `ψ` on a cochain of degree 0, checking S-integrality of the rational
    /// coordinates.
    pub fn psi(&self, m: &PresentedModule, x: &[Rational]) -> Result<Vec<Rational>> {
        let vals: Vec<Rational> = self.readback.iter().map(|&r| x[r].clone()).collect();
        for (c, v) in m.coordinates.iter().zip(&vals) {
            if matches!(c, AtomCoordinate::Free { .. }) && !v.is_zero() && m.primes.iter().any(|&p| valuation(v, p) < 0) {
                return Err(Error::HypothesisViolated(format!("{v} is not S-integral")));
            }
        }
        Ok(vals)
    }
}

pub fn h0_reconstruct(spec: &AdelicSpec<NumberAtom>, m: &PresentedModule) -> Result<Reconstruction> {
    let aug = augmented_complex(spec)?;
    let phi_map = &aug.differentials[0];
    let c = adelic_only(&aug)?;
    let table = cohomology(&c)?;
    let in_kernel = match aug.differentials.get(1) {
        Some(d0) => NumberAtom::composite_vanishes(&spec.context, phi_map, d0),
        None => true,
    };
    let c0 = &phi_map.codomain;
    let readback = (0..m.atoms.len())
        .map(|j| {
            (0..c0.len())
                .find(|&r| {
                    !phi_map.matrix[(r, j)].is_zero()
                        && matches!(
                            (&m.atoms.atoms[j], &c0.atoms[r]),
                            (NumberAtom::Cyclic(_), NumberAtom::Cyclic(_)) | (NumberAtom::Localized(_), NumberAtom::Rational)
                        )
                })
                .ok_or_else(|| Error::InvalidSystem(format!("no coordinate of C⁰ reads back atom {j} of M")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rec = Reconstruction {
        higher_vanish: table.vanishes_from(1),
        cohomology: table,
        expected: m.group(),
        in_kernel,
        round_trip: true,
        phi: phi_map.matrix.clone(),
        readback,
    };
    for k in 0..m.generators() {
        let e: Vec<Rational> = (0..m.generators()).map(|i| if i == k { Rational::one() } else { Rational::zero() }).collect();
        let x = rec.phi(&m.to_atoms(&e)?);
        let back = m.from_atoms(&rec.psi(m, &x)?)?;
        rec.round_trip &= m.same_class(&back, &e);
    }
    Ok(rec)
}

/// The complex without its augmentation degree.
fn adelic_only(aug: &CochainComplex<NumberAtom>) -> Result<CochainComplex<NumberAtom>> {
    CochainComplex::new(aug.context.clone(), aug.objects[1..].to_vec(), aug.differentials[1..].to_vec())
}

/// A preimage `(q, (a_p))` of a target in `⊕_p ℚ_p` under `δ⁰`, where the
/// complex has `δ(q, a)_p = a_p − q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Split {
    pub q: Rational,
    pub components: Vec<PAdicElement>,
}

/// `q = −Σ_p pp(b_p)` and `a_p = b_p + q`; each `a_p` is integral because
/// the other principal parts have denominators prime to `p`.
pub fn adelic_split(primes: &[u64], targets: &[PAdicElement]) -> Result<Split> {
    if primes.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!("{} targets for {} primes", targets.len(), primes.len())));
    }
    for (&p, b) in primes.iter().zip(targets) {
        if b.p != p {
            return Err(Error::ShapeMismatch(format!("a {}-adic component at p = {p}", b.p)));
        }
    }
    let mut q = Rational::zero();
    for b in targets {
        q -= b.principal_part()?;
    }
    let mut components = Vec::with_capacity(targets.len());
    for b in targets {
        let a = match b.absolute_precision() {
            None => as_padic(&q, b.p, 32)?,
            Some(n) => {
                if n <= 0 {
                    return Err(Error::InsufficientPrecision(format!(
                        "{}-adic component known only modulo {}^{n}",
                        b.p, b.p
                    )));
                }
                let k = if q.is_zero() { n } else { n - valuation(&q, b.p) }.max(1) as usize;
                match b.add(&as_padic(&q, b.p, k)?) {
                    Ok(a) => a,
                    // b_p + q vanishes on every known digit
                    Err(Error::InsufficientPrecision(_)) => PAdicElement::zero(b.p),
                    Err(e) => return Err(e),
                }
            }
        };
        if !a.is_integral() {
            return Err(Error::InsufficientPrecision(format!("integrality of the {}-adic component is undetermined", b.p)));
        }
        components.push(a);
    }
    Ok(Split { q, components })
}

fn as_padic(q: &Rational, p: u64, k: usize) -> Result<PAdicElement> {
    PAdicElement::from_rational(q, p, k)
}

/// Whether two p-adic elements agree on every digit both know.
pub fn agree(x: &PAdicElement, y: &PAdicElement) -> bool {
    match x.sub(y) {
        Ok(d) => {
            let n = match (x.absolute_precision(), y.absolute_precision()) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => return d.exact_zero,
            };
            d.exact_zero || d.valuation >= n
        }
        Err(Error::InsufficientPrecision(_)) => true,
        Err(_) => false,
    }
}

/// Re-applies `δ`: `q ∈ ℤ_(S)`-denominators, every `a_p` integral and
/// `a_p − q = b_p` on the known digits.
pub fn verify_split(primes: &[u64], targets: &[PAdicElement], split: &Split) -> Result<bool> {
    if !has_denominator_in(&split.q, primes) {
        return Ok(false);
    }
    for (b, a) in targets.iter().zip(&split.components) {
        if !a.is_integral() {
            return Ok(false);
        }
        let k = match b.absolute_precision() {
            Some(n) => (n - if split.q.is_zero() { 0 } else { valuation(&split.q, b.p) }).max(1) as usize,
            None => 32,
        };
        let image = match a.sub(&as_padic(&split.q, b.p, k)?) {
            Ok(x) => x,
            Err(Error::InsufficientPrecision(_)) => PAdicElement::zero(b.p),
            Err(e) => return Err(e),
        };
        if !agree(&image, b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For an injective `f: ℤ^a → ℤ^b`, the sequence `0 → ℤ^a → ℤ^b → coker f → 0`
/// with `coker f` decomposed by Smith normal form. Returns the three-term
/// complex over ℤ.
pub fn short_exact_sequence(f: &IntMatrix) -> Result<CochainComplex<NumberAtom>> {
    let snf = smith_normal_form(f);
    if snf.rank() != f.ncols() {
        return Err(Error::InvalidMap("the first map of a short exact sequence must be injective".into()));
    }
    let diag = snf.diagonal();
    let mut atoms = Vec::new();
    let mut rows = Vec::new();
    for i in 0..f.nrows() {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            atoms.push(NumberAtom::Integer);
        } else if d.is_one() {
            continue;
        } else {
            atoms.push(NumberAtom::Cyclic(d.to_u64().ok_or_else(|| Error::Unsupported(format!("order {d}")))?));
        }
        rows.push(i);
    }
    let a = AtomicModule::new("A", vec![NumberAtom::Integer; f.ncols()]);
    let b = AtomicModule::new("B", vec![NumberAtom::Integer; f.nrows()]);
    let c = AtomicModule::new("C", atoms);
    let to_rat = |m: &IntMatrix| m.map(|x| Rational::from_integer(x.clone()));
    let fm = ModuleMap::new(AtomicModule::zero(), a.clone(), Matrix::zeros(a.len(), 0))?;
    let g = ModuleMap::new(a.clone(), b.clone(), to_rat(f))?;
    let h = ModuleMap::new(b.clone(), c.clone(), to_rat(&snf.u.select_rows(&rows)))?;
    let z = ModuleMap::new(c.clone(), AtomicModule::zero(), Matrix::zeros(0, c.len()))?;
    CochainComplex::new(
        AbelianContext::integers(),
        vec![AtomicModule::zero(), a, b, c, AtomicModule::zero()],
        vec![fm, g, h, z],
    )
}

/// An integral lattice for the p-completion of a complex over ℤ: free atoms
/// stay, cyclic atoms keep their p-primary part. The completion is this
/// lattice tensored with ℤ_p, which is flat, so its cohomology is the
/// lattice's cohomology with the torsion prime to p discarded.
pub fn completion_lattice(c: &CochainComplex<NumberAtom>, p: u64) -> Result<CochainComplex<NumberAtom>> {
    let complete = |a: &NumberAtom| match a {
        NumberAtom::Integer => Some(NumberAtom::Integer),
        other => complete_at(Some(p), other),
    };
    let kept: Vec<Vec<usize>> =
        c.objects.iter().map(|o| (0..o.len()).filter(|&i| complete(&o.atoms[i]).is_some()).collect()).collect();
    let objects: Vec<AtomicModule<NumberAtom>> = c
        .objects
        .iter()
        .zip(&kept)
        .map(|(o, k)| AtomicModule::from_atoms(k.iter().map(|&i| complete(&o.atoms[i]).unwrap()).collect()))
        .collect();
    let differentials = c
        .differentials
        .iter()
        .enumerate()
        .map(|(s, d)| {
            ModuleMap::new(objects[s].clone(), objects[s + 1].clone(), d.matrix.select_rows(&kept[s + 1]).select_cols(&kept[s]))
        })
        .collect::<Result<Vec<_>>>()?;
    CochainComplex::new(AbelianContext::integers(), objects, differentials)
}

/// `H ⊗ ℤ_p` of a finitely generated group: rank and p-primary torsion.
pub fn complete_group(g: &AbelianGroup, p: u64) -> AbelianGroup {
    let pb = BigInt::from(p);
    let torsion = g.torsion.iter().map(|n| {
        let mut q = BigInt::one();
        let mut m = n.clone();
        while m.is_multiple_of(&pb) {
            m /= &pb;
            q *= &pb;
        }
        q
    });
    AbelianGroup::with_torsion(g.rank, torsion)
}

/// Exactness of the sequence and of its completion at `p`.
pub fn completion_exactness(f: &IntMatrix, p: u64) -> Result<bool> {
    let ses = short_exact_sequence(f)?;
    let h = cohomology(&ses)?;
    if !(0..h.num_degrees()).all(|s| h.group(s).is_zero()) {
        return Ok(false);
    }
    let h = cohomology(&completion_lattice(&ses, p)?)?;
    Ok((0..h.num_degrees()).all(|s| complete_group(&h.group(s), p).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::check_complex;
    use crate::ratio;

    fn int_matrix(rows: Vec<Vec<i64>>) -> IntMatrix {
        Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    }

    #[test]
    fn ring_itself() {
        let m = PresentedModule::free(&[2, 3], 1).unwrap();
        for v in HasseVariant::ALL {
            let spec = hasse_spec(&m, v, ProductPolicy::SpecializationsOnly, 16).unwrap();
            let rec = h0_reconstruct(&spec, &m).unwrap();
            assert!(rec.is_isomorphism(), "{v}: {}", rec.cohomology);
            assert!(check_complex(&augmented_complex(&spec).unwrap()));
        }
    }

    #[test]
    fn six_torsion_by_crt() {
        let m = PresentedModule::new(&[2, 3], int_matrix(vec![vec![6]])).unwrap();
        assert_eq!(m.atoms.atoms, vec![NumberAtom::Cyclic(2), NumberAtom::Cyclic(3)]);
        let spec = hasse_spec(&m, HasseVariant::LocalizedCompletion, ProductPolicy::SpecializationsOnly, 16).unwrap();
        let rec = h0_reconstruct(&spec, &m).unwrap();
        assert!(rec.is_isomorphism());
        assert_eq!(rec.cohomology.group(0), AbelianGroup::with_torsion(0, [BigInt::from(6)]));
        // 5 ↦ (1 mod 2, 2 mod 3) ↦ 5
        let atoms = m.to_atoms(&[ratio(5, 1)]).unwrap();
        assert_eq!(m.from_atoms(&atoms).unwrap(), vec![ratio(5, 1)]);
        assert_eq!(crt(&[(BigInt::from(1), BigInt::from(2)), (BigInt::from(2), BigInt::from(3))]).0, BigInt::from(5));
    }

    #[test]
    fn torsion_prime_to_s_disappears() {
        let m = PresentedModule::new(&[2], int_matrix(vec![vec![15]])).unwrap();
        assert!(m.atoms.is_empty());
        assert!(m.group().is_zero());
    }

    #[test]
    fn completed_localization_corner() {
        let m = PresentedModule::free(&[2, 3], 1).unwrap();
        let spec = hasse_spec(&m, HasseVariant::CompletedLocalization, ProductPolicy::AllClosedPoints, 8).unwrap();
        let flag = crate::poset::Flag::point(1);
        assert_eq!(spec.trace_atom(&flag, &m.atoms.atoms[0]), Some(NumberAtom::Complete(2)));
        let flag = crate::poset::Flag::new(spec.poset(), vec![0, 2]).unwrap();
        assert_eq!(spec.trace_atom(&flag, &m.atoms.atoms[0]), Some(NumberAtom::LocalField(3)));
    }

    #[test]
    fn split_of_three_quarters() {
        let b2 = PAdicElement::from_rational(&ratio(3, 4), 2, 16).unwrap();
        let b3 = PAdicElement::zero(3);
        let s = adelic_split(&[2, 3], &[b2.clone(), b3.clone()]).unwrap();
        assert_eq!(s.q, ratio(-3, 4));
        assert!(s.components[0].exact_zero);
        assert_eq!(s.components[1].exact, Some(ratio(-3, 4)));
        assert!(verify_split(&[2, 3], &[b2, b3], &s).unwrap());
    }

    #[test]
    fn integral_targets_split_trivially() {
        let b = vec![
            PAdicElement::from_rational(&ratio(5, 7), 2, 8).unwrap(),
            PAdicElement::from_digits(3, 0, vec![2, 1, 1]).unwrap(),
        ];
        let s = adelic_split(&[2, 3], &b).unwrap();
        assert_eq!(s.q, ratio(0, 1));
        assert!(verify_split(&[2, 3], &b, &s).unwrap());
    }

    #[test]
    fn undetermined_principal_part() {
        // valuation −3 with only two digits
        let b = PAdicElement::from_digits(2, -3, vec![1, 1]).unwrap();
        assert_eq!(adelic_split(&[2], &[b]).unwrap_err().code(), "precision");
    }

    #[test]
    fn completion_preserves_exactness() {
        let f = int_matrix(vec![vec![2, 0], vec![0, 6], vec![1, 3]]);
        for p in [2, 3, 5] {
            assert!(completion_exactness(&f, p).unwrap());
        }
        assert!(completion_exactness(&int_matrix(vec![vec![1], vec![2]]), 2).unwrap());
    }
}
