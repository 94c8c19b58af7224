//! Abelian backend: atoms are rank-one modules over ℤ or a semilocal ring
//! ℤ_(S) (localizations, rationals, p-adic integers and numbers) and finite
//! cyclic groups.
//!
//! Over ℤ every complex is a complex of finitely presented groups and its
//! cohomology is computed by Smith normal form. Over ℤ_(S) the torsion-free
//! atoms are not finitely generated (ℤ_p, ℚ_p), so their cohomology is read
//! off from exact invariants:
//!
//! * the rational complex `C ⊗ ℚ`, splitting `ℚ_p = ℚ ⊕ V_p` so that every
//!   atom contributes a rational line and each p-adic atom a `V_p` line;
//! * the reductions `C ⊗ ℤ/p^K` for `p ∈ S`, at precision `K`, computed by
//!   Smith normal form.
//!
//! The universal coefficient sequence then separates the finitely generated
//! rank, bounded torsion, divisible rational lines and Prüfer summands.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::module::{Atom, AtomicModule, CochainComplex, ModuleMap};
use super::rank::rational_rank;
use super::snf::{kernel_basis, subquotient};
use super::table::{normalize_torsion, AbelianGroup, CohomologyTable};
use crate::{Error, Rational, Result};

/// Rank-one building blocks of modules over ℤ or ℤ_(S).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NumberAtom {
    /// ℤ (only over the base ring ℤ).
    Integer,
    /// ℤ_(T): rationals with denominators prime to every p in T (sorted).
    Localized(Vec<u64>),
    /// ℚ.
    Rational,
    /// ℤ_p^∧.
    Complete(u64),
    /// ℚ_p.
    LocalField(u64),
    /// ℤ/n.
    Cyclic(u64),
}

impl NumberAtom {
    pub fn localized(primes: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = primes.into_iter().collect();
        if set.is_empty() {
            NumberAtom::Rational
        } else {
            NumberAtom::Localized(set.into_iter().collect())
        }
    }

    pub fn is_torsion(&self) -> bool {
        matches!(self, NumberAtom::Cyclic(_))
    }

    /// Primes p such that this atom is not p-divisible.
    fn integral_primes(&self) -> Vec<u64> {
        match self {
            NumberAtom::Localized(t) => t.clone(),
            NumberAtom::Complete(p) => vec![*p],
            NumberAtom::Cyclic(n) => factorize(*n).into_iter().map(|(p, _)| p).collect(),
            _ => Vec::new(),
        }
    }
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// p-adic valuation of a nonzero rational.
pub fn valuation(c: &Rational, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut num = c.numer().abs();
    while !num.is_zero() && num.is_multiple_of(&pb) {
        num /= &pb;
        v += 1;
    }
    let mut den = c.denom().clone();
    while den.is_multiple_of(&pb) {
        den /= &pb;
        v -= 1;
    }
    v
}

fn is_integral_at(c: &Rational, p: u64) -> bool {
    c.is_zero() || !c.denom().is_multiple_of(&BigInt::from(p))
}

/// Residue of `c` modulo `m`, if the denominator is invertible.
pub fn residue(c: &Rational, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let g = c.denom().extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some((c.numer() * g.x).mod_floor(m))
}

impl Atom for NumberAtom {
    type Context = AbelianContext;

    fn canonical_to(&self, to: &Self) -> bool {
        use NumberAtom::*;
        match (self, to) {
            (Integer, _) => true,
            (Localized(t), Localized(u)) => u.iter().all(|p| t.contains(p)),
            (Localized(_), Rational) => true,
            (Localized(t), Complete(p)) => t.contains(p),
            (Localized(_), LocalField(_)) => true,
            (Localized(t), Cyclic(n)) => factorize(*n).iter().all(|(p, _)| t.contains(p)),
            (Rational, Rational) | (Rational, LocalField(_)) => true,
            (Complete(p), Complete(q)) | (Complete(p), LocalField(q)) => p == q,
            (Complete(p), Cyclic(n)) => factorize(*n).iter().all(|(q, _)| q == p),
            (LocalField(p), LocalField(q)) => p == q,
            (Cyclic(n), Cyclic(m)) => n % m == 0,
            _ => false,
        }
    }

    fn admissible(&self, to: &Self, c: &Rational) -> bool {
        use NumberAtom::*;
        if c.is_zero() {
            return true;
        }
        match (self, to) {
            (Integer, Integer) => c.is_integer(),
            (Cyclic(n), Cyclic(m)) => {
                // 1 ↦ c must be killed by n
                let Some(r) = residue(c, &BigInt::from(*m)) else { return false };
                (r * BigInt::from(*n)).is_multiple_of(&BigInt::from(*m))
            }
            (_, Cyclic(_)) if *self == Integer => to.integral_primes().iter().all(|p| is_integral_at(c, *p)),
            _ => self.canonical_to(to) && to.integral_primes().iter().all(|p| is_integral_at(c, *p)),
        }
    }

    fn label(&self) -> String {
        match self {
            NumberAtom::Integer => "Z".into(),
            NumberAtom::Localized(t) => {
                format!("Z_({})", t.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
            }
            NumberAtom::Rational => "Q".into(),
            NumberAtom::Complete(p) => format!("Z_{p}^"),
            NumberAtom::LocalField(p) => format!("Q_{p}"),
            NumberAtom::Cyclic(n) => format!("Z/{n}"),
        }
    }

    fn composite_vanishes(_ctx: &AbelianContext, f: &ModuleMap<Self>, g: &ModuleMap<Self>) -> bool {
        let prod = g.matrix.mul(&f.matrix);
        entries_vanish(&g.codomain, &prod)
    }

    fn composite_equals(_ctx: &AbelianContext, f: &ModuleMap<Self>, g: &ModuleMap<Self>, h: &ModuleMap<Self>) -> bool {
        let prod = g.matrix.mul(&f.matrix);
        let diff = prod.add(&h.matrix.scale(&-Rational::one()));
        entries_vanish(&h.codomain, &diff)
    }

    fn cohomology(ctx: &AbelianContext, c: &CochainComplex<Self>) -> Result<CohomologyTable> {
        abelian_cohomology(ctx, c)
    }
}

fn entries_vanish(codomain: &AtomicModule<NumberAtom>, m: &Matrix<Rational>) -> bool {
    m.entries().all(|(i, _, x)| match &codomain.atoms[i] {
        NumberAtom::Cyclic(n) => residue(x, &BigInt::from(*n)).is_some_and(|r| r.is_zero()),
        _ => x.is_zero(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseRing {
    Integers,
    /// ℤ_(S) for a finite set of primes S.
    Semilocal(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianContext {
    pub base: BaseRing,
    /// Exponent K of the reductions modulo p^K.
    pub precision: u32,
}

impl AbelianContext {
    pub fn integers() -> Self {
        AbelianContext { base: BaseRing::Integers, precision: 32 }
    }

    pub fn semilocal(primes: impl IntoIterator<Item = u64>, precision: u32) -> Self {
        let set: BTreeSet<u64> = primes.into_iter().collect();
        AbelianContext { base: BaseRing::Semilocal(set.into_iter().collect()), precision }
    }
}

/// A complex of finitely presented groups `ℤ^n / diag(orders)`.
struct Presented {
    orders: Vec<Vec<BigInt>>,
    maps: Vec<Matrix<BigInt>>,
}

impl Presented {
    fn cohomology(&self) -> Vec<(usize, Vec<BigInt>)> {
        let n = self.orders.len();
        let mut out = Vec::with_capacity(n);
        for s in 0..n {
            let dim = self.orders[s].len();
            // cycles: x with D x ∈ relations of the next group
            let z = if s + 1 < n {
                let rel_next = relation_matrix(&self.orders[s + 1]);
                let stacked = self.maps[s].hcat(&rel_next);
                let k = kernel_basis(&stacked);
                let rows: Vec<usize> = (0..dim).collect();
                k.select_rows(&rows)
            } else {
                Matrix::identity(dim)
            };
            let mut b = relation_matrix(&self.orders[s]);
            if s > 0 {
                b = self.maps[s - 1].hcat(&b);
            }
            let (rank, tors) = subquotient(&z, &b).expect("boundaries lie in cycles");
            out.push((rank, tors));
        }
        out
    }
}

fn relation_matrix(orders: &[BigInt]) -> Matrix<BigInt> {
    let cols: Vec<usize> = (0..orders.len()).filter(|&i| !orders[i].is_zero()).collect();
    let mut m = Matrix::zeros(orders.len(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        m[(i, j)] = orders[i].clone();
    }
    m
}

fn integer_entries(m: &Matrix<Rational>, modulus: Option<&BigInt>) -> Result<Matrix<BigInt>> {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for (i, j, x) in m.entries() {
        out[(i, j)] = match modulus {
            Some(md) => residue(x, md).ok_or_else(|| Error::InvalidMap(format!("{x} is not integral mod {md}")))?,
            None if x.is_integer() => x.to_integer(),
            None => return Err(Error::InvalidMap(format!("non-integral entry {x} over Z"))),
        };
    }
    Ok(out)
}

fn sub_complex_indices(c: &CochainComplex<NumberAtom>, keep: impl Fn(&NumberAtom) -> bool) -> Vec<Vec<usize>> {
    c.objects
        .iter()
        .map(|o| (0..o.len()).filter(|&i| keep(&o.atoms[i])).collect())
        .collect()
}

fn restricted_maps(c: &CochainComplex<NumberAtom>, idx: &[Vec<usize>]) -> Vec<Matrix<Rational>> {
    c.differentials
        .iter()
        .enumerate()
        .map(|(s, d)| d.matrix.select_rows(&idx[s + 1]).select_cols(&idx[s]))
        .collect()
}

fn rational_betti(maps: &[Matrix<Rational>], dims: &[usize]) -> Vec<usize> {
    let ranks: Vec<usize> = maps.iter().map(rational_rank).collect();
    (0..dims.len())
        .map(|s| {
            let out_rank = if s < ranks.len() { ranks[s] } else { 0 };
            let in_rank = if s > 0 { ranks[s - 1] } else { 0 };
            dims[s] - out_rank - in_rank
        })
        .collect()
}

fn abelian_cohomology(ctx: &AbelianContext, c: &CochainComplex<NumberAtom>) -> Result<CohomologyTable> {
    let n = c.len();
    if n == 0 {
        return Ok(CohomologyTable::Abelian { degrees: BTreeMap::new() });
    }
    match &ctx.base {
        BaseRing::Integers => {
            for o in &c.objects {
                if let Some(a) = o.atoms.iter().find(|a| !matches!(a, NumberAtom::Integer | NumberAtom::Cyclic(_))) {
                    return Err(Error::Unsupported(format!("atom {} over the base ring Z", a.label())));
                }
            }
            let orders = c
                .objects
                .iter()
                .map(|o| {
                    o.atoms
                        .iter()
                        .map(|a| match a {
                            NumberAtom::Cyclic(k) => BigInt::from(*k),
                            _ => BigInt::zero(),
                        })
                        .collect()
                })
                .collect();
            let maps = c
                .differentials
                .iter()
                .map(|d| integer_entries(&d.matrix, None))
                .collect::<Result<Vec<_>>>()?;
            let h = Presented { orders, maps }.cohomology();
            Ok(CohomologyTable::Abelian {
                degrees: h.into_iter().enumerate().map(|(s, (r, t))| (s, AbelianGroup::with_torsion(r, t))).collect(),
            })
        }
        BaseRing::Semilocal(primes) => semilocal_cohomology(primes, ctx.precision, c),
    }
}

fn semilocal_cohomology(primes: &[u64], precision: u32, c: &CochainComplex<NumberAtom>) -> Result<CohomologyTable> {
    let n = c.len();
    // torsion and torsion-free parts must split
    for d in &c.differentials {
        for (i, j, x) in d.matrix.entries() {
            if !x.is_zero() && d.codomain.atoms[i].is_torsion() != d.domain.atoms[j].is_torsion() {
                return Err(Error::Unsupported(
                    "maps between torsion and torsion-free atoms over a semilocal base".into(),
                ));
            }
        }
    }
    for o in &c.objects {
        for a in &o.atoms {
            let bad = match a {
                NumberAtom::Integer => true,
                NumberAtom::Cyclic(k) => {
                    let f = factorize(*k);
                    f.len() != 1 || !primes.contains(&f[0].0)
                }
                NumberAtom::Localized(t) => t.iter().any(|p| !primes.contains(p)),
                NumberAtom::Complete(p) | NumberAtom::LocalField(p) => !primes.contains(p),
                NumberAtom::Rational => false,
            };
            if bad {
                return Err(Error::Unsupported(format!("atom {} over Z_(S) with S = {primes:?}", a.label())));
            }
        }
    }
    let mut groups: Vec<AbelianGroup> = vec![AbelianGroup::default(); n];
    let mut torsion: Vec<Vec<BigInt>> = vec![Vec::new(); n];

    // torsion part, prime by prime
    for &p in primes {
        let idx = sub_complex_indices(c, |a| matches!(a, NumberAtom::Cyclic(k) if k % p == 0));
        if idx.iter().all(Vec::is_empty) {
            continue;
        }
        let orders: Vec<Vec<BigInt>> = idx
            .iter()
            .enumerate()
            .map(|(s, ix)| {
                ix.iter()
                    .map(|&i| match c.objects[s].atoms[i] {
                        NumberAtom::Cyclic(k) => BigInt::from(k),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        let modulus = orders.iter().flatten().fold(BigInt::one(), |a, b| a.lcm(b));
        let maps = restricted_maps(c, &idx)
            .iter()
            .map(|m| integer_entries(m, Some(&modulus)))
            .collect::<Result<Vec<_>>>()?;
        for (s, (_, t)) in (Presented { orders, maps }).cohomology().into_iter().enumerate() {
            torsion[s].extend(t);
        }
    }

    // torsion-free part: rational invariants
    let free_idx = sub_complex_indices(c, |a| !a.is_torsion());
    let free_maps = restricted_maps(c, &free_idx);
    let dims: Vec<usize> = free_idx.iter().map(Vec::len).collect();
    let rational = rational_betti(&free_maps, &dims);
    let mut local: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &p in primes {
        let idx = sub_complex_indices(c, |a| matches!(a, NumberAtom::Complete(q) | NumberAtom::LocalField(q) if *q == p));
        if idx.iter().all(Vec::is_empty) {
            continue;
        }
        let maps = restricted_maps(c, &idx);
        let dims: Vec<usize> = idx.iter().map(Vec::len).collect();
        local.insert(p, rational_betti(&maps, &dims));
    }

    // reductions modulo p^K
    let mut full: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut bounded: BTreeMap<u64, Vec<Vec<BigInt>>> = BTreeMap::new();
    for &p in primes {
        let pk = BigInt::from(p).pow(precision);
        let idx = sub_complex_indices(c, |a| match a {
            NumberAtom::Localized(t) => t.contains(&p),
            NumberAtom::Complete(q) => *q == p,
            _ => false,
        });
        let orders: Vec<Vec<BigInt>> = idx.iter().map(|ix| vec![pk.clone(); ix.len()]).collect();
        let maps = restricted_maps(c, &idx)
            .iter()
            .map(|m| integer_entries(m, Some(&pk)))
            .collect::<Result<Vec<_>>>()?;
        let h = Presented { orders, maps }.cohomology();
        let mut f = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (_, tors) in h {
            f.push(tors.iter().filter(|t| **t == pk).count());
            b.push(tors.into_iter().filter(|t| *t != pk).collect::<Vec<_>>());
        }
        full.insert(p, f);
        bounded.insert(p, b);
    }

    for s in 0..n {
        let r = rational[s];
        let g = full.values().map(|f| f[s]).min().map_or(r, |m| m.min(r));
        groups[s].rank = g;
        groups[s].divisible_rank = r - g;
        for (p, f) in &full {
            let extra = f[s] - g;
            if extra > 0 {
                if s + 1 >= n {
                    return Err(Error::InsufficientPrecision(format!(
                        "unexplained Z/{p}^{precision} summand in top degree {s}"
                    )));
                }
                *groups[s + 1].pruefer.entry(*p).or_default() += extra;
            }
        }
        for (p, v) in &local {
            if v[s] > 0 {
                groups[s].local_field.insert(*p, v[s]);
            }
        }
    }
    // bounded torsion of the free part, peeled from the top degree down
    for (_, b) in bounded {
        let mut above: Vec<BigInt> = Vec::new();
        for s in (0..n).rev() {
            let mut here = b[s].clone();
            for t in &above {
                if let Some(pos) = here.iter().position(|x| x == t) {
                    here.remove(pos);
                } else {
                    return Err(Error::InsufficientPrecision(format!("torsion bookkeeping failed in degree {s}")));
                }
            }
            torsion[s].extend(here.iter().cloned());
            above = here;
        }
    }
    for s in 0..n {
        groups[s].torsion = normalize_torsion(torsion[s].drain(..));
    }
    Ok(CohomologyTable::Abelian { degrees: groups.into_iter().enumerate().collect() })
}

/// Splits `ℤ/n` into its primary parts `ℤ/p^e`.
pub fn primary_parts(n: u64) -> Vec<NumberAtom> {
    factorize(n).into_iter().map(|(p, e)| NumberAtom::Cyclic(p.pow(e))).collect()
}

/// The p-primary part of `n`.
pub fn p_part(n: u64, p: u64) -> u64 {
    let mut q = 1;
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
        q *= p;
    }
    q
}

/// Integer value of a small rational scalar, if it is one.
pub fn small_integer(c: &Rational) -> Option<i64> {
    if c.is_integer() {
        c.to_integer().to_i64()
    } else {
        None
    }
}
