//! Finite posets, flags, dimension functions and simplicial complexes.
//!
//! Orders follow the convention that smaller means more special: closed
//! points are minimal and the generic point of an irreducible space is the
//! top element. A flag is a strictly decreasing chain `℘_0 > ℘_1 > … > ℘_s`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poset {
    ids: Vec<String>,
    /// `leq[p][q]` iff `q ≤ p`.
    leq: Vec<Vec<bool>>,
    /// Cover relations `(p, q)` with `q ⋖ p`.
    covers: Vec<(usize, usize)>,
}

impl Poset {
    /// Builds a poset from element identifiers and generating relations
    /// `(p, q)` meaning `q < p`; the order is their reflexive-transitive closure.
    pub fn new<S: AsRef<str>>(elements: &[S], relations: &[(S, S)]) -> Result<Self> {
        let ids: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidPoset(format!("duplicate element {id}")));
            }
        }
        let mut pairs = Vec::with_capacity(relations.len());
        for (p, q) in relations {
            let find = |s: &str| {
                index.get(s).copied().ok_or_else(|| Error::InvalidPoset(format!("unknown element {s}")))
            };
            pairs.push((find(p.as_ref())?, find(q.as_ref())?));
        }
        Self::from_indices(ids, &pairs)
    }

    /// As [`Poset::new`] with relations given by element positions.
    pub fn from_indices(ids: Vec<String>, relations: &[(usize, usize)]) -> Result<Self> {
        let n = ids.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(p, q) in relations {
            if p >= n || q >= n {
                return Err(Error::IndexOutOfRange(format!("relation ({p}, {q}) in a poset of size {n}")));
            }
            if p == q {
                return Err(Error::InvalidPoset(format!("{} < {} is not strict", ids[p], ids[q])));
            }
            leq[p][q] = true;
        }
        // Warshall closure
        for k in 0..n {
            let row = leq[k].clone();
            for r in leq.iter_mut().filter(|r| r[k]) {
                for (x, &y) in r.iter_mut().zip(&row) {
                    *x |= y;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::InvalidPoset(format!("{} and {} form a cycle", ids[i], ids[j])));
                }
            }
        }
        let mut covers = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p != q && leq[p][q] && !(0..n).any(|r| r != p && r != q && leq[p][r] && leq[r][q]) {
                    covers.push((p, q));
                }
            }
        }
        let poset = Poset { ids, leq, covers };
        debug_assert!(poset.is_valid());
        Ok(poset)
    }

    /// A chain `0 < 1 < … < n − 1` with identifiers `"0"`, `"1"`, ….
    pub fn chain(n: usize) -> Self {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let rel: Vec<(usize, usize)> = (1..n).map(|i| (i, i - 1)).collect();
        Self::from_indices(ids, &rel).expect("chains are posets")
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_indices((0..n).map(|i| format!("a{i}")).collect(), &[]).expect("antichains are posets")
    }

    /// Reflexivity, antisymmetry and transitivity of the stored order.
    pub fn is_valid(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| self.leq[i][i])
            && (0..n).all(|i| (0..n).all(|j| i == j || !(self.leq[i][j] && self.leq[j][i])))
            && (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(self.leq[i][j] && self.leq[j][k]) || self.leq[i][k])))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// `q ≤ p`.
    pub fn leq(&self, q: usize, p: usize) -> bool {
        self.leq[p][q]
    }

    /// `q < p`.
    pub fn lt(&self, q: usize, p: usize) -> bool {
        p != q && self.leq[p][q]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Elements strictly below `p`.
    pub fn below(&self, p: usize) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.lt(q, p)).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.below(p).is_empty()).collect()
    }

    /// Element positions in lexicographic order of their identifiers.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        idx
    }

    /// The same poset with a new bottom element below everything.
    pub fn with_bottom(&self, id: &str) -> Result<Self> {
        let mut ids = self.ids.clone();
        ids.push(id.to_string());
        let bottom = self.len();
        let mut rel: Vec<(usize, usize)> = self.covers.clone();
        rel.extend(self.minimal_elements().into_iter().map(|m| (m, bottom)));
        Self::from_indices(ids, &rel)
    }
}

/// A strictly decreasing chain of elements (positions in the poset).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Flag {
    pub vertices: Vec<usize>,
}

impl Flag {
    pub fn new(poset: &Poset, vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidPoset("empty flag".into()));
        }
        for w in vertices.windows(2) {
            if !poset.lt(w[1], w[0]) {
                return Err(Error::InvalidPoset(format!(
                    "{} > {} fails in a flag",
                    poset.id(w[0]),
                    poset.id(w[1])
                )));
            }
        }
        Ok(Flag { vertices })
    }

    pub fn point(p: usize) -> Self {
        Flag { vertices: vec![p] }
    }

    /// Simplex dimension `s` (length − 1).
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().expect("flags are non-empty")
    }

    pub fn display(&self, poset: &Poset) -> String {
        self.vertices.iter().map(|&v| poset.id(v)).collect::<Vec<_>>().join(">")
    }

    fn sort_key<'a>(&self, poset: &'a Poset) -> Vec<&'a str> {
        self.vertices.iter().map(|&v| poset.id(v)).collect()
    }
}

/// Canonical order of flags: lexicographic on the identifier sequences.
pub fn sort_flags(poset: &Poset, flags: &mut [Flag]) {
    flags.sort_by(|a, b| a.sort_key(poset).cmp(&b.sort_key(poset)));
}

/// All flags with `s + 1` vertices in canonical order.
pub fn enumerate_flags(poset: &Poset, s: usize) -> Vec<Flag> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..poset.len()).map(|p| vec![p]).collect();
    while let Some(chain) = stack.pop() {
        if chain.len() == s + 1 {
            out.push(Flag { vertices: chain });
            continue;
        }
        let last = *chain.last().expect("non-empty");
        for q in poset.below(last) {
            let mut next = chain.clone();
            next.push(q);
            stack.push(next);
        }
    }
    sort_flags(poset, &mut out);
    out
}

/// All flags of every length, grouped by simplex dimension.
pub fn all_flags(poset: &Poset) -> Vec<Vec<Flag>> {
    let mut out = Vec::new();
    for s in 0.. {
        let f = enumerate_flags(poset, s);
        if f.is_empty() {
            break;
        }
        out.push(f);
    }
    out
}

/// Deletes vertex `i`.
pub fn face(flag: &Flag, i: usize) -> Result<Flag> {
    if flag.vertices.len() < 2 {
        return Err(Error::IndexOutOfRange("a flag of length one has no faces".into()));
    }
    if i > flag.dim() {
        return Err(Error::IndexOutOfRange(format!("face {i} of a flag of dimension {}", flag.dim())));
    }
    let mut v = flag.vertices.clone();
    v.remove(i);
    Ok(Flag { vertices: v })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionData {
    pub is_catenary: bool,
    /// Length of the maximal descending chains from each element, when catenary.
    pub dim: Option<Vec<usize>>,
}

impl DimensionData {
    pub fn dims(&self) -> Result<&[usize]> {
        self.dim.as_deref().ok_or(Error::NonCatenary)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.dim.as_ref().map(|d| d.iter().copied().max().unwrap_or(0))
    }
}

pub fn dimension_data(poset: &Poset) -> DimensionData {
    let n = poset.len();
    // shortest and longest maximal descending chains, by memoized recursion over covers
    let mut lo: Vec<Option<usize>> = vec![None; n];
    let mut hi: Vec<Option<usize>> = vec![None; n];
    fn visit(p: usize, poset: &Poset, lo: &mut [Option<usize>], hi: &mut [Option<usize>]) {
        if lo[p].is_some() {
            return;
        }
        let below: Vec<usize> = poset.covers().iter().filter(|c| c.0 == p).map(|c| c.1).collect();
        if below.is_empty() {
            lo[p] = Some(0);
            hi[p] = Some(0);
            return;
        }
        let (mut a, mut b) = (usize::MAX, 0);
        for q in below {
            visit(q, poset, lo, hi);
            a = a.min(lo[q].unwrap() + 1);
            b = b.max(hi[q].unwrap() + 1);
        }
        lo[p] = Some(a);
        hi[p] = Some(b);
    }
    for p in 0..n {
        visit(p, poset, &mut lo, &mut hi);
    }
    let is_catenary = (0..n).all(|p| lo[p] == hi[p]);
    DimensionData { is_catenary, dim: is_catenary.then(|| lo.into_iter().map(|x| x.unwrap()).collect()) }
}

/// Dimensions of the vertices of a flag, strictly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DimensionVector(pub Vec<usize>);

impl DimensionVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidPoset(format!("{dims:?} is not strictly decreasing")));
        }
        Ok(DimensionVector(dims))
    }

    /// Deletes entry `i`.
    pub fn face(&self, i: usize) -> DimensionVector {
        let mut v = self.0.clone();
        v.remove(i);
        DimensionVector(v)
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(">"))
    }
}

pub fn dimension_vector(flag: &Flag, dims: &[usize]) -> DimensionVector {
    DimensionVector(flag.vertices.iter().map(|&v| dims[v]).collect())
}

/// A finite abstract simplicial complex on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub vertex_names: Vec<String>,
    /// Sorted vertex sets, closed under non-empty subsets.
    pub simplices: BTreeSet<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn new(vertex_names: Vec<String>, simplices: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for mut s in simplices {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidPoset("the empty set is not a simplex".into()));
            }
            if s.iter().any(|&v| v >= vertex_names.len()) {
                return Err(Error::IndexOutOfRange(format!("simplex {s:?}")));
            }
            set.insert(s);
        }
        for s in &set {
            for i in 0..s.len() {
                if s.len() > 1 {
                    let mut t = s.clone();
                    t.remove(i);
                    if !set.contains(&t) {
                        return Err(Error::InvalidPoset(format!("{t:?} is missing from the complex")));
                    }
                }
            }
        }
        Ok(SimplicialComplex { vertex_names, simplices: set })
    }

    /// Closure of a list of facets.
    pub fn from_facets(vertex_names: Vec<String>, facets: &[Vec<usize>]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            f.dedup();
            for mask in 1u64..(1 << f.len()) {
                set.insert((0..f.len()).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect::<Vec<_>>());
            }
        }
        Self::new(vertex_names, set)
    }

    /// Vertices named `v0, v1, …`.
    pub fn numbered(n: usize, facets: &[Vec<usize>]) -> Result<Self> {
        Self::from_facets((0..n).map(|i| format!("v{i}")).collect(), facets)
    }

    pub fn simplex_name(&self, s: &[usize]) -> String {
        format!("{{{}}}", s.iter().map(|&v| self.vertex_names[v].as_str()).collect::<Vec<_>>().join(","))
    }

    /// Simplices of dimension `k`, in lexicographic order.
    pub fn simplices_of_dim(&self, k: usize) -> Vec<Vec<usize>> {
        self.simplices.iter().filter(|s| s.len() == k + 1).cloned().collect()
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(|s| if s.len() % 2 == 1 { 1 } else { -1 }).sum()
    }

    /// Simplices ordered by inclusion (elements in lexicographic simplex order).
    pub fn face_poset(&self) -> Poset {
        let simp: Vec<&Vec<usize>> = self.simplices.iter().collect();
        let ids = simp.iter().map(|s| self.simplex_name(s)).collect();
        let mut rel = Vec::new();
        for (i, s) in simp.iter().enumerate() {
            for (j, t) in simp.iter().enumerate() {
                if t.len() + 1 == s.len() && t.iter().all(|v| s.contains(v)) {
                    rel.push((i, j));
                }
            }
        }
        Poset::from_indices(ids, &rel).expect("face posets are posets")
    }

    /// The face poset with the empty simplex `{}` as an initial element.
    pub fn augmented_face_poset(&self) -> Poset {
        self.face_poset().with_bottom("{}").expect("adding a bottom keeps a poset")
    }
}

/// All non-empty subsets of `a`: the punctured cube `Δ(A)`.
pub fn punctured_cube<S: AsRef<str>>(a: &[S]) -> Result<SimplicialComplex> {
    if a.is_empty() {
        return Err(Error::InvalidPoset("the punctured cube needs a non-empty set".into()));
    }
    let names: Vec<String> = a.iter().map(|s| s.as_ref().to_string()).collect();
    let all: Vec<usize> = (0..names.len()).collect();
    SimplicialComplex::from_facets(names, &[all])
}

/// Simplices are the flags; vertex names are the element identifiers.
pub fn order_complex(poset: &Poset) -> SimplicialComplex {
    let simplices = all_flags(poset).into_iter().flatten().map(|f| f.vertices);
    SimplicialComplex::new(poset.ids().to_vec(), simplices).expect("flags are closed under faces")
}

/// A random catenary poset: elements on levels `0..=dim`, each element above
/// level 0 covering at least one element on the level below.
pub fn random_catenary_poset(rng: &mut impl Rng, max_elements: usize, max_dim: usize) -> Poset {
    let dim = rng.gen_range(0..=max_dim.min(max_elements.saturating_sub(1)));
    let mut levels: Vec<usize> = vec![1; dim + 1];
    let extra = rng.gen_range(0..=max_elements - (dim + 1));
    for _ in 0..extra {
        let l = rng.gen_range(0..=dim);
        levels[l] += 1;
    }
    let mut ids = Vec::new();
    let mut by_level: Vec<Vec<usize>> = Vec::new();
    for (l, &count) in levels.iter().enumerate() {
        let mut row = Vec::new();
        for k in 0..count {
            row.push(ids.len());
            ids.push(format!("p{l}_{k}"));
        }
        by_level.push(row);
    }
    let mut rel = Vec::new();
    for l in 1..=dim {
        for &p in &by_level[l] {
            let below = &by_level[l - 1];
            let first = below[rng.gen_range(0..below.len())];
            rel.push((p, first));
            for &q in below {
                if q != first && rng.gen_bool(0.4) {
                    rel.push((p, q));
                }
            }
        }
    }
    Poset::from_indices(ids, &rel).expect("levelled relations are acyclic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_flags() {
        let p = Poset::chain(3);
        let f = enumerate_flags(&p, 1);
        assert_eq!(f.len(), 3);
        let shown: Vec<String> = f.iter().map(|x| x.display(&p)).collect();
        assert_eq!(shown, vec!["1>0", "2>0", "2>1"]);
        assert!(enumerate_flags(&Poset::antichain(2), 1).is_empty());
    }

    #[test]
    fn punctured_square_flags() {
        let k = punctured_cube(&["x", "y"]).unwrap();
        let p = k.face_poset();
        let f: Vec<String> = enumerate_flags(&p, 1).iter().map(|x| x.display(&p)).collect();
        assert_eq!(f, vec!["{x,y}>{x}", "{x,y}>{y}"]);
        assert_eq!(punctured_cube(&["x", "y", "z"]).unwrap().simplices.len(), 7);
        assert_eq!(punctured_cube(&["x"]).unwrap().simplices.len(), 1);
        assert!(punctured_cube::<&str>(&[]).is_err());
    }

    #[test]
    fn faces_of_flags() {
        let p = Poset::chain(3);
        let f = Flag::new(&p, vec![2, 1, 0]).unwrap();
        assert_eq!(face(&f, 1).unwrap().vertices, vec![2, 0]);
        assert_eq!(face(&f, 0).unwrap().vertices, vec![1, 0]);
        assert!(face(&f, 3).is_err());
        assert!(face(&Flag::point(0), 0).is_err());
    }

    #[test]
    fn catenary_detection() {
        let d = dimension_data(&Poset::chain(3));
        assert!(d.is_catenary);
        assert_eq!(d.dim, Some(vec![0, 1, 2]));
        let p = Poset::new(&["a", "b", "c", "d"], &[("c", "a"), ("c", "b"), ("d", "a"), ("c", "d")]).unwrap();
        let d = dimension_data(&p);
        assert!(!d.is_catenary);
        assert!(d.dim.is_none());
    }

    #[test]
    fn invalid_posets_are_rejected() {
        assert!(Poset::new(&["a", "a"], &[]).is_err());
        assert!(Poset::new(&["a", "b"], &[("a", "b"), ("b", "a")]).is_err());
        assert!(Poset::new(&["a"], &[("a", "z")]).is_err());
    }

    #[test]
    fn order_complexes() {
        let oc = order_complex(&Poset::chain(2));
        assert_eq!(oc.simplices.len(), 3);
        let sub = order_complex(&punctured_cube(&["x", "y"]).unwrap().face_poset());
        assert_eq!(sub.simplices_of_dim(0).len(), 3);
        assert_eq!(sub.simplices_of_dim(1).len(), 2);
        assert_eq!(order_complex(&Poset::antichain(4)).simplices.len(), 4);
    }

    #[test]
    fn augmented_poset_has_initial_element() {
        let p = punctured_cube(&["x", "y"]).unwrap().augmented_face_poset();
        let bottom = p.index_of("{}").unwrap();
        assert!((0..p.len()).all(|q| p.leq(bottom, q)));
    }
}
