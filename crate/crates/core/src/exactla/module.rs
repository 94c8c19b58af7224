//! Atomic modules: finite direct sums of rank-one building blocks whose
//! morphisms are scalar multiples of canonical maps.
//!
//! Every module appearing in the instance packs is a direct sum of "atoms"
//! (a localization of ℤ, a p-adic completion, a cyclic group, a box of
//! monomials, ...). A map between two atomic modules is a rational matrix:
//! entry `(i, j)` is the scalar multiplying the canonical map from domain atom
//! `j` to codomain atom `i`. The backend that owns an atom kind decides what
//! "canonical" means and how to compute cohomology.

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{One, Zero};
use serde::Serialize;

use super::matrix::Matrix;
use super::table::CohomologyTable;
use crate::{Error, Rational, Result};

pub trait Atom: Clone + Debug + Eq + Ord + Hash + Serialize + Send + Sync {
    /// Data fixed for a whole complex: base ring, window, precision.
    type Context: Clone + Debug + Send + Sync;

    /// Whether the canonical map `self → to` exists.
    fn canonical_to(&self, to: &Self) -> bool;

    /// Whether `c` times the canonical map is a valid morphism.
    fn admissible(&self, to: &Self, c: &Rational) -> bool {
        c.is_zero() || self.canonical_to(to)
    }

    /// Short human label, e.g. `Z_(2,3)` or `Q[x^±,y]`.
    fn label(&self) -> String;

    /// `g ∘ f == 0`, evaluated exactly in the backend's concrete model.
    fn composite_vanishes(ctx: &Self::Context, f: &ModuleMap<Self>, g: &ModuleMap<Self>) -> bool;

    /// `g ∘ f == h`, evaluated exactly in the backend's concrete model.
    fn composite_equals(ctx: &Self::Context, f: &ModuleMap<Self>, g: &ModuleMap<Self>, h: &ModuleMap<Self>) -> bool;

    fn cohomology(ctx: &Self::Context, c: &CochainComplex<Self>) -> Result<CohomologyTable>;
}

/// A labelled block of consecutive atoms, e.g. the value at one flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub label: String,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AtomicModule<A> {
    pub atoms: Vec<A>,
    pub blocks: Vec<Block>,
}

impl<A: Atom> AtomicModule<A> {
    pub fn zero() -> Self {
        AtomicModule { atoms: Vec::new(), blocks: Vec::new() }
    }

    /// A module forming a single block.
    pub fn new(label: impl Into<String>, atoms: Vec<A>) -> Self {
        let len = atoms.len();
        AtomicModule { atoms, blocks: vec![Block { label: label.into(), len }] }
    }

    pub fn from_atoms(atoms: Vec<A>) -> Self {
        Self::new("", atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Direct sum, concatenating blocks.
    pub fn direct_sum<'a>(parts: impl IntoIterator<Item = &'a AtomicModule<A>>) -> Self
    where
        A: 'a,
    {
        let mut out = Self::zero();
        for p in parts {
            out.atoms.extend(p.atoms.iter().cloned());
            out.blocks.extend(p.blocks.iter().cloned());
        }
        out
    }

    /// Atom range of each block, in order.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.len;
                start += b.len;
                r
            })
            .collect()
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        let len = self.atoms.len();
        self.blocks = vec![Block { label: label.into(), len }];
        self
    }

    pub fn describe(&self) -> String {
        if self.atoms.is_empty() {
            return "0".into();
        }
        self.atoms.iter().map(|a| a.label()).collect::<Vec<_>>().join(" ⊕ ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleMap<A> {
    pub domain: AtomicModule<A>,
    pub codomain: AtomicModule<A>,
    /// `codomain.len() × domain.len()` scalars.
    pub matrix: Matrix<Rational>,
}

impl<A: Atom> ModuleMap<A> {
    pub fn new(domain: AtomicModule<A>, codomain: AtomicModule<A>, matrix: Matrix<Rational>) -> Result<Self> {
        if matrix.shape() != (codomain.len(), domain.len()) {
            return Err(Error::ShapeMismatch(format!(
                "matrix {:?} for map {} -> {}",
                matrix.shape(),
                domain.len(),
                codomain.len()
            )));
        }
        let m = ModuleMap { domain, codomain, matrix };
        m.validate()?;
        Ok(m)
    }

    pub fn zero(domain: AtomicModule<A>, codomain: AtomicModule<A>) -> Self {
        let matrix = Matrix::zeros(codomain.len(), domain.len());
        ModuleMap { domain, codomain, matrix }
    }

    pub fn identity(m: AtomicModule<A>) -> Self {
        let matrix = Matrix::identity(m.len());
        ModuleMap { domain: m.clone(), codomain: m, matrix }
    }

    /// Every nonzero entry is an admissible multiple of a canonical map.
    pub fn validate(&self) -> Result<()> {
        for (i, j, c) in self.matrix.entries() {
            if !self.domain.atoms[j].admissible(&self.codomain.atoms[i], c) {
                return Err(Error::InvalidMap(format!(
                    "{} · ({} → {}) is not a morphism",
                    c,
                    self.domain.atoms[j].label(),
                    self.codomain.atoms[i].label()
                )));
            }
        }
        Ok(())
    }

    /// Formal sum of two parallel maps.
    pub fn add(&self, other: &ModuleMap<A>) -> Result<ModuleMap<A>> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::ShapeMismatch("sum of maps".into()));
        }
        Ok(ModuleMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn is_formally_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// Whether the map is an isomorphism that matches atoms one to one
    /// with invertible canonical scalars.
    pub fn is_atomwise_iso(&self) -> bool {
        if self.domain.len() != self.codomain.len() {
            return false;
        }
        for i in 0..self.codomain.len() {
            let nz: Vec<usize> = (0..self.domain.len()).filter(|&j| !self.matrix[(i, j)].is_zero()).collect();
            if nz.len() != 1 {
                return false;
            }
            let j = nz[0];
            let (a, b) = (&self.domain.atoms[j], &self.codomain.atoms[i]);
            let inv = Rational::one() / self.matrix[(i, j)].clone();
            if a != b || !b.admissible(a, &inv) {
                return false;
            }
        }
        (0..self.domain.len()).all(|j| (0..self.codomain.len()).filter(|&i| !self.matrix[(i, j)].is_zero()).count() == 1)
    }
}

/// A cochain complex of atomic modules in degrees `0..objects.len()`.
#[derive(Clone, Debug, Serialize)]
pub struct CochainComplex<A: Atom> {
    #[serde(skip)]
    pub context: A::Context,
    pub objects: Vec<AtomicModule<A>>,
    /// `differentials[s] : objects[s] → objects[s + 1]`.
    pub differentials: Vec<ModuleMap<A>>,
}

impl<A: Atom> CochainComplex<A> {
    pub fn new(context: A::Context, objects: Vec<AtomicModule<A>>, differentials: Vec<ModuleMap<A>>) -> Result<Self> {
        if objects.is_empty() && !differentials.is_empty() || !objects.is_empty() && differentials.len() + 1 != objects.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} objects but {} differentials",
                objects.len(),
                differentials.len()
            )));
        }
        for (s, d) in differentials.iter().enumerate() {
            if d.domain.atoms != objects[s].atoms || d.codomain.atoms != objects[s + 1].atoms {
                return Err(Error::ShapeMismatch(format!("differential {s} does not match its objects")));
            }
            d.validate()?;
        }
        Ok(CochainComplex { context, objects, differentials })
    }

    pub fn zero(context: A::Context) -> Self {
        CochainComplex { context, objects: Vec::new(), differentials: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

/// `true` iff every consecutive composite of differentials vanishes.
pub fn check_complex<A: Atom>(c: &CochainComplex<A>) -> bool {
    first_nonzero_composite(c).is_none()
}

pub fn first_nonzero_composite<A: Atom>(c: &CochainComplex<A>) -> Option<usize> {
    c.differentials
        .windows(2)
        .position(|w| !A::composite_vanishes(&c.context, &w[0], &w[1]))
}

/// Exact cohomology; rejects non-complexes with the offending degree.
pub fn cohomology<A: Atom>(c: &CochainComplex<A>) -> Result<CohomologyTable> {
    if let Some(degree) = first_nonzero_composite(c) {
        return Err(Error::NotAComplex { degree });
    }
    A::cohomology(&c.context, c)
}
