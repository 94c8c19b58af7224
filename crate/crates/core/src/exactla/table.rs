use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Multidegree = Vec<i64>;

/// A box `[lo, hi]` of multidegrees (inclusive).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidWindow("bounds of different lengths".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidWindow(format!("empty window {lo:?}..{hi:?}")));
        }
        Ok(Window { lo, hi })
    }

    /// The same interval in each of `n` coordinates.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    /// The unique degree of the ungraded (0-variable) case.
    pub fn point() -> Self {
        Window { lo: Vec::new(), hi: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, d: &[i64]) -> bool {
        d.len() == self.lo.len() && d.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn is_on_boundary(&self, d: &[i64]) -> bool {
        d.iter().zip(self.lo.iter().zip(&self.hi)).any(|(x, (a, b))| x == a || x == b)
    }

    /// All multidegrees, lexicographically ordered.
    pub fn degrees(&self) -> Vec<Multidegree> {
        let mut out = vec![Vec::new()];
        for (a, b) in self.lo.iter().zip(&self.hi) {
            let mut next = Vec::with_capacity(out.len() * (b - a + 1) as usize);
            for prefix in &out {
                for x in *a..=*b {
                    let mut d = prefix.clone();
                    d.push(x);
                    next.push(d);
                }
            }
            out = next;
        }
        out
    }
}

/// A module over the base ring, described by its invariants.
///
/// `rank` and `torsion` describe the finitely generated part. The remaining
/// fields are only nonzero for modules over a semilocal ring that are not
/// finitely generated: uniquely divisible rational lines, Prüfer summands
/// `Q_p/Z_p`, and summands of `Q_p` not accounted for by rational lines.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub rank: usize,
    /// Invariant factors, written as decimal strings.
    #[serde(with = "decimal_list")]
    pub torsion: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    pub divisible_rank: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pruefer: BTreeMap<u64, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub local_field: BTreeMap<u64, usize>,
}

mod decimal_list {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|x| x.parse().map_err(D::Error::custom)).collect()
    }
}

fn is_zero_usize(x: &usize) -> bool {
    *x == 0
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup { rank, ..Default::default() }
    }

    pub fn with_torsion(rank: usize, factors: impl IntoIterator<Item = BigInt>) -> Self {
        AbelianGroup { rank, torsion: normalize_torsion(factors), ..Default::default() }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
            && self.torsion.is_empty()
            && self.divisible_rank == 0
            && self.pruefer.values().all(|&v| v == 0)
            && self.local_field.values().all(|&v| v == 0)
    }

    pub fn is_finitely_generated(&self) -> bool {
        self.divisible_rank == 0 && self.pruefer.values().all(|&v| v == 0) && self.local_field.values().all(|&v| v == 0)
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |a, b| a * b)
    }
}

/// Brings a list of cyclic orders into successively dividing invariant factors.
pub fn normalize_torsion(factors: impl IntoIterator<Item = BigInt>) -> Vec<BigInt> {
    // primary decomposition, then recombine
    let mut primary: BTreeMap<BigInt, Vec<BigInt>> = BTreeMap::new();
    for f in factors {
        let mut n = if f < BigInt::zero() { -f } else { f };
        if n <= BigInt::one() {
            continue;
        }
        let mut p = BigInt::from(2);
        while &p * &p <= n {
            if n.is_multiple_of(&p) {
                let mut q = BigInt::one();
                while n.is_multiple_of(&p) {
                    n /= &p;
                    q *= &p;
                }
                primary.entry(p.clone()).or_default().push(q);
            }
            p += 1;
        }
        if n > BigInt::one() {
            primary.entry(n.clone()).or_default().push(n);
        }
    }
    let len = primary.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![BigInt::one(); len];
    for powers in primary.values_mut() {
        powers.sort();
        // largest powers go into the last factors
        for (k, q) in powers.iter().rev().enumerate() {
            out[len - 1 - k] *= q;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CohomologyTable {
    Abelian { degrees: BTreeMap<usize, AbelianGroup> },
    Graded {
        window: Window,
        /// degree → (multidegree → dimension), zero dimensions omitted.
        degrees: BTreeMap<usize, BTreeMap<String, usize>>,
        /// Multidegrees whose value could change if the window were enlarged.
        boundary: Vec<Multidegree>,
    },
}

pub fn multidegree_key(d: &[i64]) -> String {
    format!("({})", d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

pub fn parse_multidegree_key(s: &str) -> Option<Multidegree> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|t| t.trim().parse().ok()).collect()
}

impl CohomologyTable {
    pub fn graded(window: Window, len: usize) -> Self {
        CohomologyTable::Graded { window, degrees: (0..len).map(|s| (s, BTreeMap::new())).collect(), boundary: Vec::new() }
    }

    pub fn num_degrees(&self) -> usize {
        match self {
            CohomologyTable::Abelian { degrees } => degrees.len(),
            CohomologyTable::Graded { degrees, .. } => degrees.len(),
        }
    }

    /// Abelian entry in a degree (zero if out of range).
    pub fn group(&self, degree: usize) -> AbelianGroup {
        match self {
            CohomologyTable::Abelian { degrees } => degrees.get(&degree).cloned().unwrap_or_default(),
            CohomologyTable::Graded { .. } => AbelianGroup::default(),
        }
    }

    /// Dimension of a graded entry (zero if absent).
    pub fn dim(&self, degree: usize, multidegree: &[i64]) -> usize {
        match self {
            CohomologyTable::Graded { degrees, .. } => degrees
                .get(&degree)
                .and_then(|m| m.get(&multidegree_key(multidegree)))
                .copied()
                .unwrap_or(0),
            CohomologyTable::Abelian { .. } => 0,
        }
    }

    /// Graded entries of one cohomological degree, parsed back to vectors.
    pub fn graded_entries(&self, degree: usize) -> BTreeMap<Multidegree, usize> {
        match self {
            CohomologyTable::Graded { degrees, .. } => degrees
                .get(&degree)
                .map(|m| m.iter().filter_map(|(k, v)| Some((parse_multidegree_key(k)?, *v))).collect())
                .unwrap_or_default(),
            CohomologyTable::Abelian { .. } => BTreeMap::new(),
        }
    }

    /// Total dimension of a graded degree summed over the window.
    pub fn total_dim(&self, degree: usize) -> usize {
        self.graded_entries(degree).values().sum()
    }

    /// Whether every degree `>= from` vanishes.
    pub fn vanishes_from(&self, from: usize) -> bool {
        match self {
            CohomologyTable::Abelian { degrees } => degrees.range(from..).all(|(_, g)| g.is_zero()),
            CohomologyTable::Graded { degrees, .. } => degrees.range(from..).all(|(_, m)| m.values().all(|&v| v == 0)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    /// CSV with columns `degree,multidegree,rank,torsion`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,multidegree,rank,torsion\n");
        match self {
            CohomologyTable::Abelian { degrees } => {
                for (s, g) in degrees {
                    let tors = g.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
                    out.push_str(&format!("{s},,{},{tors}\n", g.rank));
                }
            }
            CohomologyTable::Graded { degrees, .. } => {
                for (s, m) in degrees {
                    for (d, v) in m {
                        out.push_str(&format!("{s},\"{d}\",{v},\n"));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for CohomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohomologyTable::Abelian { degrees } => {
                for (s, g) in degrees {
                    write!(f, "H^{s} = ")?;
                    let mut parts = Vec::new();
                    if g.rank > 0 {
                        parts.push(format!("R^{}", g.rank));
                    }
                    for t in &g.torsion {
                        parts.push(format!("Z/{t}"));
                    }
                    if g.divisible_rank > 0 {
                        parts.push(format!("Q^{}", g.divisible_rank));
                    }
                    for (p, n) in &g.pruefer {
                        parts.push(format!("(Q_{p}/Z_{p})^{n}"));
                    }
                    for (p, n) in &g.local_field {
                        parts.push(format!("(Q_{p}/Q)^{n}"));
                    }
                    if parts.is_empty() {
                        parts.push("0".into());
                    }
                    writeln!(f, "{}", parts.join(" ⊕ "))?;
                }
            }
            CohomologyTable::Graded { window, degrees, .. } => {
                writeln!(f, "window {:?}..{:?}", window.lo, window.hi)?;
                for (s, m) in degrees {
                    let total: usize = m.values().sum();
                    writeln!(f, "H^{s}: total dimension {total}")?;
                    for (d, v) in m {
                        writeln!(f, "  {d}: {v}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torsion_normalization() {
        let t = normalize_torsion([BigInt::from(2), BigInt::from(3)]);
        assert_eq!(t, vec![BigInt::from(6)]);
        let t = normalize_torsion([BigInt::from(4), BigInt::from(2), BigInt::from(1)]);
        assert_eq!(t, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn window_degrees_and_keys() {
        let w = Window::cube(2, -1, 0).unwrap();
        assert_eq!(w.degrees().len(), 4);
        assert!(Window::new(vec![1], vec![0]).is_err());
        assert_eq!(parse_multidegree_key(&multidegree_key(&[-3, 4])), Some(vec![-3, 4]));
        assert_eq!(Window::point().degrees(), vec![Vec::<i64>::new()]);
    }
}
