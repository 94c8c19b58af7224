//! Seeded property suites. Each suite is deterministic in its seed and
//! reports one pass/fail line per property.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adelic::{adelic_complex, AdelicSpec, ProductPolicy};
use crate::coeff::{
    check_absorbative, check_functor_squares, CoefficientSystem, Composite, IdentitySystem, InversionSystem,
    LocalizationSystem, RestrictedProduct, Side, Variance,
};
use crate::exactla::abelian::{AbelianContext, NumberAtom};
use crate::exactla::graded::{GradedContext, MonomialAtom};
use crate::exactla::{check_complex, AtomicModule, CohomologyTable, Window};
use crate::instances::cech::{koszul_local_cohomology, table_differences};
use crate::instances::hasse::{adelic_split, number_poset, verify_split, NumberFunctor, NumberSystem, PresentedModule};
use crate::instances::simplicial::{constant_dual, simplicial_cohomology, subdivision_compare};
use crate::instances::torus::{check_transitivity, tom_dieck_filtration, torus_euler_family, TorusRank1Instance};
use crate::instances::PAdicElement;
use crate::poset::{order_complex, random_catenary_poset, Poset, SimplicialComplex};
use crate::{Error, IntMatrix, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    DeltaSquared,
    Absorbative,
    Subdivision,
    Radical,
    Split,
    Filtration,
    SumProduct,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::DeltaSquared,
        Suite::Absorbative,
        Suite::Subdivision,
        Suite::Radical,
        Suite::Split,
        Suite::Filtration,
        Suite::SumProduct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::DeltaSquared => "delta-squared",
            Suite::Absorbative => "absorbative",
            Suite::Subdivision => "subdivision",
            Suite::Radical => "radical",
            Suite::Split => "split",
            Suite::Filtration => "filtration",
            Suite::SumProduct => "sum-product",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub seed: u64,
    /// Largest vertex count for the subdivision suite.
    pub max_vertices: usize,
    /// Primes for the number-ring suites.
    pub primes: Vec<u64>,
    /// Random cases per property.
    pub cases: usize,
    pub precision: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 0, max_vertices: 5, primes: vec![2, 3, 5], cases: 20, precision: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

struct Tally {
    property: String,
    cases: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(property: &str) -> Self {
        Tally { property: property.into(), cases: 0, failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn error(&mut self, e: Error, what: impl FnOnce() -> String) {
        self.cases += 1;
        if self.failure.is_none() {
            self.failure = Some(format!("{}: {} ({})", what(), e, e.code()));
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult { property: self.property, passed: self.failure.is_none(), cases: self.cases, detail: self.failure }
    }
}

pub fn run_suite(suite: Suite, opts: &CheckOptions) -> Result<CheckReport> {
    let properties = match suite {
        Suite::DeltaSquared => delta_squared(opts.seed, opts.cases.max(1) * 5),
        Suite::Absorbative => absorbative(opts.seed, &opts.primes, opts.cases.max(1) * 5 / 2)?,
        Suite::Subdivision => subdivision(opts.seed, opts.max_vertices, opts.cases)?,
        Suite::Radical => radical()?,
        Suite::Split => split(opts.seed, &opts.primes, opts.cases.max(1) * 10, opts.precision)?,
        Suite::Filtration => filtration()?,
        Suite::SumProduct => sum_product()?,
    };
    Ok(CheckReport { suite: suite.name().into(), seed: opts.seed, properties })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monotone variable sets: each element inverts the variables attached to
/// the elements below it.
fn monotone_inversion(poset: &Poset, vars: &[Option<usize>]) -> InversionSystem {
    let inverted = (0..poset.len())
        .map(|p| {
            let set: BTreeSet<usize> = (0..poset.len()).filter(|&q| poset.leq(q, p)).filter_map(|q| vars[q]).collect();
            set.into_iter().collect()
        })
        .collect();
    InversionSystem { inverted }
}

fn graded_sample(nvars: usize) -> AtomicModule<MonomialAtom> {
    let mut atoms = vec![MonomialAtom::polynomial(nvars), MonomialAtom::shifted(&vec![-1; nvars])];
    let mut torsion = MonomialAtom::polynomial(nvars);
    torsion.upper[0] = Some(0);
    atoms.push(torsion);
    AtomicModule::from_atoms(atoms)
}

/// `δ ∘ δ = 0` on the adelic complexes of random catenary posets.
pub fn delta_squared(seed: u64, posets: usize) -> Vec<PropertyResult> {
    let mut r = rng(seed);
    let nvars = 2;
    let ctx = GradedContext::fine(Window::cube(nvars, -1, 1).expect("nonempty window"));
    let m = graded_sample(nvars);
    let mut tallies = [Tally::new("identity"), Tally::new("inversion"), Tally::new("mixed")];
    for case in 0..posets {
        let poset = random_catenary_poset(&mut r, 10, 3);
        let vars: Vec<Option<usize>> = (0..poset.len()).map(|_| Some(r.gen_range(0..nvars))).collect();
        // the mixed system leaves the closed points alone and stacks a
        // second inversion on top of the first
        let sparse: Vec<Option<usize>> =
            (0..poset.len()).map(|p| if poset.below(p).is_empty() { None } else { Some(r.gen_range(0..nvars)) }).collect();
        let systems: [Arc<dyn LocalizationSystem<MonomialAtom>>; 3] = [
            Arc::new(IdentitySystem),
            Arc::new(monotone_inversion(&poset, &vars)),
            Arc::new(Composite::<MonomialAtom> {
                outer: Arc::new(monotone_inversion(&poset, &sparse)),
                inner: Arc::new(IdentitySystem),
            }),
        ];
        for (t, sys) in tallies.iter_mut().zip(systems) {
            let coeffs = CoefficientSystem::constant(poset.clone(), Variance::Contravariant, m.clone());
            let what = || format!("poset {case} ({} elements)", poset.len());
            match AdelicSpec::new(ctx.clone(), coeffs, sys, ProductPolicy::SpecializationsOnly).and_then(|s| adelic_complex(&s)) {
                Ok(c) => t.record(check_complex(&c), what),
                Err(e) => t.error(e, what),
            }
        }
    }
    tallies.into_iter().map(Tally::finish).collect()
}

/// A random finitely generated module over `ℤ_(S)` with up to three
/// generators and two relations.
pub fn random_presented_module(r: &mut impl Rng, primes: &[u64]) -> Result<PresentedModule> {
    let g = r.gen_range(1..=3);
    let rels = r.gen_range(0..=2);
    let entries: Vec<Vec<BigInt>> = (0..g).map(|_| (0..rels).map(|_| BigInt::from(r.gen_range(-12i64..=12))).collect()).collect();
    let m = if rels == 0 { IntMatrix::zeros(g, 0) } else { IntMatrix::from_rows(entries) };
    PresentedModule::new(primes, m)
}

/// Localizations are left and completions right absorbative on the number
/// ring poset, both assemble into functors, and the transitivity law holds
/// on the torus data.
pub fn absorbative(seed: u64, primes: &[u64], modules: usize) -> Result<Vec<PropertyResult>> {
    let mut r = rng(seed);
    let (poset, points) = number_poset(primes)?;
    let samples: Vec<AtomicModule<NumberAtom>> =
        (0..modules).map(|_| random_presented_module(&mut r, primes).map(|m| m.atoms)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (name, functor, side) in [
        ("localization left-absorbative", NumberFunctor::Localization, Side::Left),
        ("completion right-absorbative", NumberFunctor::Completion, Side::Right),
    ] {
        let sys = NumberSystem { points: points.clone(), functor };
        let rep = check_absorbative(&sys, &poset, side, &samples, None)?;
        out.push(PropertyResult { property: name.into(), passed: rep.holds, cases: rep.checked, detail: rep.first_failure });
        let squares = check_functor_squares(&sys, &poset, side, &samples);
        out.push(PropertyResult {
            property: format!("{} functorial", sys.name()),
            passed: squares,
            cases: samples.len(),
            detail: None,
        });
    }
    let rep = check_transitivity(&TorusRank1Instance { orders: vec![2, 3, 4, 6], window: (-6, 2) })?;
    out.push(PropertyResult {
        property: "transitivity pentagon".into(),
        passed: rep.failures.is_empty(),
        cases: rep.checked,
        detail: rep.failures.first().cloned(),
    });
    Ok(out)
}

/// Every simplicial complex on the vertex set `0..n`, as the down-closures of
/// antichains of nonempty subsets that cover all vertices.
pub fn all_complexes(n: usize) -> Vec<SimplicialComplex> {
    let subsets: Vec<u32> = (1u32..(1 << n)).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    enumerate_antichains(&subsets, 0, &mut chosen, &mut |facets: &[u32]| {
        let covered = facets.iter().fold(0u32, |a, f| a | f);
        if covered == (1 << n) - 1 {
            let facets: Vec<Vec<usize>> = facets.iter().map(|&f| (0..n).filter(|i| f >> i & 1 == 1).collect()).collect();
            out.push(SimplicialComplex::numbered(n, &facets).expect("valid facets"));
        }
    });
    out
}

fn enumerate_antichains(subsets: &[u32], start: usize, chosen: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    if !chosen.is_empty() {
        emit(chosen);
    }
    for i in start..subsets.len() {
        let s = subsets[i];
        if chosen.iter().all(|&c| c & s != c && c & s != s) {
            chosen.push(s);
            enumerate_antichains(subsets, i + 1, chosen, emit);
            chosen.pop();
        }
    }
}

/// A random complex on `n` vertices: a few random facets plus every vertex.
pub fn random_complex(r: &mut impl Rng, n: usize) -> SimplicialComplex {
    let k = r.gen_range(1..=4);
    let mut facets: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            let size = r.gen_range(1..=n.min(4));
            let mut v: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = r.gen_range(i..n);
                v.swap(i, j);
            }
            let mut f = v[..size].to_vec();
            f.sort_unstable();
            f
        })
        .collect();
    facets.extend((0..n).map(|v| vec![v]));
    SimplicialComplex::numbered(n, &facets).expect("valid facets")
}

fn integer_line() -> AtomicModule<NumberAtom> {
    AtomicModule::from_atoms(vec![NumberAtom::Integer])
}

/// `H^*(K; ℤ)` against `H^*(K′; ℤ)` for the barycentric subdivision, and
/// against the adelic cohomology of the face poset. Integral tables
/// determine the rational ones.
pub fn subdivision(seed: u64, max_vertices: usize, random_cases: usize) -> Result<Vec<PropertyResult>> {
    let ctx = AbelianContext::integers();
    let q = integer_line();
    let compare = |k: &SimplicialComplex| -> Result<(bool, bool)> {
        let h = simplicial_cohomology(&ctx, k, &constant_dual(k, q.clone()))?;
        let sd = order_complex(&k.face_poset());
        let h_sd = simplicial_cohomology(&ctx, &sd, &constant_dual(&sd, q.clone()))?;
        let adelic = subdivision_compare(&ctx, k, &q, Arc::new(IdentitySystem))?;
        Ok((h == h_sd, adelic.agree && adelic.adelic == h))
    };
    let mut bary = Tally::new("barycentric subdivision");
    let mut adelic = Tally::new("adelic equals simplicial");
    let mut run = |k: &SimplicialComplex, tag: String| match compare(k) {
        Ok((a, b)) => {
            bary.record(a, || tag.clone());
            adelic.record(b, || tag.clone());
        }
        Err(e) => {
            bary.error(e.clone(), || tag.clone());
            adelic.error(e, || tag.clone());
        }
    };
    for n in 1..=max_vertices.min(4) {
        for k in all_complexes(n) {
            let tag = format!("complex with {} simplices on {n} vertices", k.simplices.len());
            run(&k, tag);
        }
    }
    if max_vertices >= 5 {
        let mut r = rng(seed);
        for i in 0..random_cases {
            let k = random_complex(&mut r, max_vertices);
            run(&k, format!("random complex {i}"));
        }
    }
    Ok(vec![bary.finish(), adelic.finish()])
}

/// `H^2_{(x,y)}(ℚ[x,y])` in `[−10, 2]²`.
pub fn local_cohomology_xy() -> Result<(CohomologyTable, Window)> {
    let window = Window::cube(2, -10, 2)?;
    let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2)]);
    Ok((koszul_local_cohomology(2, &[vec![1, 0], vec![0, 1]], &r, window.clone())?, window))
}

/// Local cohomology of `ℚ[x,y]` at `(x,y)` against the closed form and
/// against the generator set `{x², y, xy}`.
pub fn radical() -> Result<Vec<PropertyResult>> {
    let (h, window) = local_cohomology_xy()?;
    let mut closed = Tally::new("closed form");
    for d in window.degrees() {
        let expected = usize::from(d[0] <= -1 && d[1] <= -1);
        for s in 0..h.num_degrees() {
            let want = if s == 2 { expected } else { 0 };
            closed.record(h.dim(s, &d) == want, || format!("H^{s} at {d:?}"));
        }
    }
    let r = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(2)]);
    let other = koszul_local_cohomology(2, &[vec![2, 0], vec![0, 1], vec![1, 1]], &r, window)?;
    let mut rad = Tally::new("radical invariance");
    let diff = table_differences(&h, &other);
    rad.record(diff.is_empty(), || format!("tables differ at {:?}", diff.keys().next()));
    Ok(vec![closed.finish(), rad.finish()])
}

/// A random element of `ℚ_p` with valuation in `-3..=3`.
pub fn random_target(r: &mut impl Rng, p: u64, precision: usize) -> Result<PAdicElement> {
    let num: i64 = r.gen_range(-500..=500);
    let den: i64 = r.gen_range(1..=60);
    let v: i32 = r.gen_range(-3..=3);
    let scale = Rational::from_integer(BigInt::from(p)).pow(v);
    PAdicElement::from_rational(&(Rational::new(num.into(), den.into()) * scale), p, precision)
}

/// Splits random targets in `⊕_p ℚ_p`, doubling the precision once on
/// `InsufficientPrecision`.
pub fn split_with_retry(primes: &[u64], make: impl Fn(usize) -> Result<Vec<PAdicElement>>, precision: usize) -> Result<bool> {
    let attempt = |k: usize| -> Result<bool> {
        let targets = make(k)?;
        let s = adelic_split(primes, &targets)?;
        verify_split(primes, &targets, &s)
    };
    match attempt(precision) {
        Err(Error::InsufficientPrecision(_)) => attempt(2 * precision),
        other => other,
    }
}

pub fn split(seed: u64, primes: &[u64], targets: usize, precision: usize) -> Result<Vec<PropertyResult>> {
    let mut r = rng(seed);
    let mut t = Tally::new("round trip");
    for i in 0..targets {
        let seeds: Vec<u64> = primes.iter().map(|_| r.gen()).collect();
        let make = |k: usize| -> Result<Vec<PAdicElement>> {
            primes.iter().zip(&seeds).map(|(&p, &s)| random_target(&mut rng(s), p, k)).collect()
        };
        match split_with_retry(primes, make, precision) {
            Ok(ok) => t.record(ok, || format!("target {i}")),
            Err(e) => t.error(e, || format!("target {i}")),
        }
    }
    Ok(vec![t.finish()])
}

pub fn filtration() -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for n in 1..=5 {
        let rep = tom_dieck_filtration(&TorusRank1Instance::first(n, (-12, 4)))?;
        for (name, ok) in [
            ("concentrated", rep.concentrated),
            ("matches orbit homology", rep.matches_homology),
            ("collapses", rep.collapses),
        ] {
            out.push(PropertyResult { property: format!("{name}, {n} subgroups"), passed: ok, cases: 1, detail: None });
        }
    }
    Ok(out)
}

/// `∏ ℚ[c]` against `⊕ ℚ[c]` under the rank-one torus Euler family, with
/// finite truncations as the oracle.
pub fn sum_product() -> Result<Vec<PropertyResult>> {
    let ctx = GradedContext::new(vec![2], Window::new(vec![-12], vec![4])?)?;
    let qc = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(1)]);
    let rp = RestrictedProduct::countable(BTreeMap::new(), qc.clone());
    let family = torus_euler_family();
    let rep = crate::coeff::sum_vs_product_cokernel(&ctx, &rp, &family)?;
    let mut iso = Tally::new("homology isomorphism");
    iso.record(rep.iso_on_cohomology, || "sum and product rows differ".into());
    let mut trunc = Tally::new("truncation oracle");
    for n in [3, 6, 12] {
        let finite = RestrictedProduct::finite(vec![qc.clone(); n]);
        let frep = crate::coeff::sum_vs_product_cokernel(&ctx, &finite, &family)?;
        for (key, piece) in &rep.cokernel {
            let d: i64 = key.trim_matches(|c| c == '(' || c == ')').parse().expect("rank-one key");
            // each index contributes ℚ[c, c⁻¹]/ℚ[c]
            let oracle = if d < 0 && d % 2 == 0 { n } else { 0 };
            let got = piece.truncated_dim(n);
            let fin = frep.cokernel[key].finite_dim().unwrap_or(usize::MAX);
            trunc.record(got == oracle && fin == oracle, || format!("{key} at size {n}: {got}, {fin}, expected {oracle}"));
        }
    }
    Ok(vec![iso.finish(), trunc.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexes_on_few_vertices() {
        // covering antichains: 1, 2 (two points, an edge), 9 on three vertices
        assert_eq!(all_complexes(1).len(), 1);
        assert_eq!(all_complexes(2).len(), 2);
        assert_eq!(all_complexes(3).len(), 9);
    }

    #[test]
    fn suites_pass_on_small_cases() {
        let opts = CheckOptions { cases: 2, max_vertices: 3, ..CheckOptions::default() };
        for s in Suite::ALL {
            let rep = run_suite(s, &opts).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
        assert_eq!("nope".parse::<Suite>().unwrap_err().code(), "unsupported");
    }
}
