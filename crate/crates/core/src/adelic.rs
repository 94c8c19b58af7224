//! The adelic cochain complex of a coefficient system and a family of
//! pointed endofunctors, its decomposition by dimension vectors, and the
//! adelic cube.
//!
//! The value at a flag `℘₀ > … > ℘ₛ` is `A_{℘₀} ⋯ A_{℘ₛ} M(℘ₛ)`, built atom
//! by atom; products over finite posets are direct sums, one block per flag.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::coeff::{CoefficientSystem, LocalizationSystem, Variance};
use crate::exactla::cube::{cube_to_json, insertion_position, matrix_strings, totalize, CubeDiagram, CubeVertex};
use crate::exactla::matrix::Matrix;
use crate::exactla::{cohomology, Atom, AtomicModule, CochainComplex, CohomologyTable, ModuleMap};
use crate::poset::{dimension_data, enumerate_flags, face, sort_flags, Flag, Poset};
use crate::{Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProductPolicy {
    /// `∏_{℘ᵢ₊₁ < ℘ᵢ}`: products over specializations.
    SpecializationsOnly,
    /// Products that reach a closed point run over all closed points.
    AllClosedPoints,
}

/// A global object with compatible maps to every value, used to augment the
/// complex (the initial vertex of the cube).
#[derive(Clone, Debug)]
pub struct Augmentation<A: Atom> {
    pub global: AtomicModule<A>,
    /// `global → M(℘)` for every element `℘`.
    pub maps: Vec<ModuleMap<A>>,
}

#[derive(Clone)]
pub struct AdelicSpec<A: Atom> {
    pub context: A::Context,
    pub coefficients: CoefficientSystem<A>,
    pub localization: Arc<dyn LocalizationSystem<A>>,
    pub policy: ProductPolicy,
    pub augmentation: Option<Augmentation<A>>,
    /// Dimension of each element.
    pub dims: Vec<usize>,
}

impl<A: Atom> std::fmt::Debug for AdelicSpec<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdelicSpec")
            .field("poset", &self.coefficients.poset.ids())
            .field("localization", &self.localization.name())
            .field("policy", &self.policy)
            .finish()
    }
}

impl<A: Atom> AdelicSpec<A> {
    pub fn new(
        context: A::Context,
        coefficients: CoefficientSystem<A>,
        localization: Arc<dyn LocalizationSystem<A>>,
        policy: ProductPolicy,
    ) -> Result<Self> {
        if coefficients.variance != Variance::Contravariant {
            return Err(Error::InvalidSystem("adelic cochains need a coefficient system".into()));
        }
        let dd = dimension_data(&coefficients.poset);
        let dims = dd.dims()?.to_vec();
        Ok(AdelicSpec { context, coefficients, localization, policy, augmentation: None, dims })
    }

    pub fn with_augmentation(mut self, aug: Augmentation<A>) -> Result<Self> {
        let n = self.poset().len();
        if aug.maps.len() != n {
            return Err(Error::InvalidSystem(format!("{} augmentation maps for {n} elements", aug.maps.len())));
        }
        for (p, f) in aug.maps.iter().enumerate() {
            if f.domain.atoms != aug.global.atoms || f.codomain.atoms != self.coefficients.values[p].atoms {
                return Err(Error::InvalidSystem(format!("augmentation at {} has the wrong endpoints", self.poset().id(p))));
            }
        }
        self.augmentation = Some(aug);
        Ok(self)
    }

    pub fn poset(&self) -> &Poset {
        &self.coefficients.poset
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// Index set of the `s`-cochains under the product policy.
    pub fn flags(&self, s: usize) -> Result<Vec<Flag>> {
        let poset = self.poset();
        match self.policy {
            ProductPolicy::SpecializationsOnly => Ok(enumerate_flags(poset, s)),
            ProductPolicy::AllClosedPoints => {
                let closed: Vec<usize> = (0..poset.len()).filter(|&p| self.dims[p] == 0).collect();
                let mut out = Vec::new();
                for f in enumerate_flags(poset, s) {
                    if f.dim() > 0 && self.dims[f.last()] == 0 {
                        let prev = f.vertices[f.dim() - 1];
                        for &c in &closed {
                            if !poset.lt(c, prev) {
                                return Err(Error::Unsupported(format!(
                                    "closed point {} is not below {}, so products over all closed points leave the flags",
                                    poset.id(c),
                                    poset.id(prev)
                                )));
                            }
                        }
                    }
                    out.push(f);
                }
                sort_flags(poset, &mut out);
                Ok(out)
            }
        }
    }

    /// `A_{℘₀} ⋯ A_{℘ₛ}` applied to one atom of `M(℘ₛ)`.
    pub fn trace_atom(&self, flag: &Flag, atom: &A) -> Option<A> {
        let base = flag.last();
        let mut cur = atom.clone();
        for &p in flag.vertices.iter().rev() {
            cur = self.localization.apply(p, base, &cur)?;
        }
        Some(cur)
    }
}

/// Cochains in one degree together with the position of every surviving atom.
#[derive(Clone, Debug)]
pub struct Cochains<A: Atom> {
    pub flags: Vec<Flag>,
    pub module: AtomicModule<A>,
    /// `slots[f][k]`: position in `module` of atom `k` of `M(last(f))`.
    pub slots: Vec<Vec<Option<usize>>>,
}

impl<A: Atom> Cochains<A> {
    fn index_of(&self, f: &Flag) -> Option<usize> {
        self.flags.iter().position(|g| g == f)
    }
}

fn assemble<A: Atom>(spec: &AdelicSpec<A>, flags: Vec<Flag>) -> Cochains<A> {
    let poset = spec.poset();
    let mut parts = Vec::with_capacity(flags.len());
    let mut slots = Vec::with_capacity(flags.len());
    let mut offset = 0;
    for f in &flags {
        let m = &spec.coefficients.values[f.last()];
        let mut atoms = Vec::new();
        let mut slot = Vec::with_capacity(m.len());
        for a in &m.atoms {
            match spec.trace_atom(f, a) {
                Some(b) => {
                    slot.push(Some(offset + atoms.len()));
                    atoms.push(b);
                }
                None => slot.push(None),
            }
        }
        offset += atoms.len();
        parts.push(AtomicModule::new(f.display(poset), atoms));
        slots.push(slot);
    }
    Cochains { flags, module: AtomicModule::direct_sum(parts.iter()), slots }
}

pub fn adelic_cochains<A: Atom>(spec: &AdelicSpec<A>, s: usize) -> Result<Cochains<A>> {
    Ok(assemble(spec, spec.flags(s)?))
}

/// Unsigned component `δᵢ` from the face `face(target, i)` into `target`, as
/// `(row, col, scalar)` entries.
fn face_entries<A: Atom>(
    spec: &AdelicSpec<A>,
    src: &Cochains<A>,
    dst: &Cochains<A>,
    t: usize,
    i: usize,
) -> Result<Vec<(usize, usize, Rational)>> {
    let target = &dst.flags[t];
    let s1 = target.dim();
    let f = face(target, i)?;
    let Some(fi) = src.index_of(&f) else { return Ok(Vec::new()) };
    let mut out = Vec::new();
    if i < s1 {
        for (k, slot) in src.slots[fi].iter().enumerate() {
            if let (Some(c), Some(r)) = (slot, dst.slots[t][k]) {
                out.push((r, *c, Rational::one()));
            }
        }
    } else {
        let res = spec.coefficients.restriction(f.last(), target.last())?;
        for (r_atom, c_atom, x) in res.matrix.entries() {
            if x.is_zero() {
                continue;
            }
            if let (Some(c), Some(r)) = (src.slots[fi][c_atom], dst.slots[t][r_atom]) {
                out.push((r, c, x.clone()));
            }
        }
    }
    Ok(out)
}

fn delta_between<A: Atom>(spec: &AdelicSpec<A>, src: &Cochains<A>, dst: &Cochains<A>) -> Result<ModuleMap<A>> {
    let mut matrix = Matrix::<Rational>::zeros(dst.module.len(), src.module.len());
    for t in 0..dst.flags.len() {
        for i in 0..=dst.flags[t].dim() {
            let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
            for (r, c, x) in face_entries(spec, src, dst, t, i)? {
                matrix[(r, c)] = matrix[(r, c)].clone() + x * sign.clone();
            }
        }
    }
    ModuleMap::new(src.module.clone(), dst.module.clone(), matrix)
        .map_err(|e| Error::InvalidSystem(format!("units are not natural on the structure maps: {e}")))
}

/// `δ = Σᵢ (−1)^i δᵢ : C^s → C^{s+1}`.
pub fn delta<A: Atom>(spec: &AdelicSpec<A>, s: usize) -> Result<ModuleMap<A>> {
    delta_between(spec, &adelic_cochains(spec, s)?, &adelic_cochains(spec, s + 1)?)
}

/// The adelic complex in degrees `0..=max_dim`.
pub fn adelic_complex<A: Atom>(spec: &AdelicSpec<A>) -> Result<CochainComplex<A>> {
    let top = spec.max_dim();
    let cochains: Vec<Cochains<A>> = (0..=top).map(|s| adelic_cochains(spec, s)).collect::<Result<_>>()?;
    let differentials =
        cochains.windows(2).map(|w| delta_between(spec, &w[0], &w[1])).collect::<Result<Vec<_>>>()?;
    CochainComplex::new(spec.context.clone(), cochains.into_iter().map(|c| c.module).collect(), differentials)
}

fn augmentation_map<A: Atom>(spec: &AdelicSpec<A>, c0: &Cochains<A>) -> Result<ModuleMap<A>> {
    let aug = spec
        .augmentation
        .as_ref()
        .ok_or_else(|| Error::InvalidSystem("the spec has no augmentation".into()))?;
    let mut matrix = Matrix::zeros(c0.module.len(), aug.global.len());
    for (fi, f) in c0.flags.iter().enumerate() {
        let m = &aug.maps[f.first()];
        for (r_atom, g, x) in m.matrix.entries() {
            if let Some(r) = c0.slots[fi][r_atom] {
                matrix[(r, g)] = x.clone();
            }
        }
    }
    ModuleMap::new(aug.global.clone(), c0.module.clone(), matrix)
        .map_err(|e| Error::InvalidSystem(format!("augmentation is not compatible with the units: {e}")))
}

/// `global → C^0 → C^1 → …`, the global object in degree 0.
pub fn augmented_complex<A: Atom>(spec: &AdelicSpec<A>) -> Result<CochainComplex<A>> {
    let c = adelic_complex(spec)?;
    let c0 = adelic_cochains(spec, 0)?;
    let eps = augmentation_map(spec, &c0)?;
    let mut objects = vec![eps.domain.clone()];
    objects.extend(c.objects);
    let mut differentials = vec![eps];
    differentials.extend(c.differentials);
    CochainComplex::new(spec.context.clone(), objects, differentials)
}

pub fn adelic_cohomology<A: Atom>(spec: &AdelicSpec<A>) -> Result<CohomologyTable> {
    cohomology(&adelic_complex(spec)?)
}

/// Cochains grouped by dimension vector: the vertex `𝐝` carries the flags
/// whose vertex dimensions are `𝐝`, and the edge `𝐝 → 𝐝 ∪ {d}` carries the
/// unsigned face component deleting the vertex of dimension `d`.
pub fn decompose_by_dimension<A: Atom>(spec: &AdelicSpec<A>) -> Result<CubeDiagram<A>> {
    build_cube(spec, false)
}

/// The adelic cube: the decomposition together with the global object at
/// the initial vertex.
pub fn build_adelic_cube<A: Atom>(spec: &AdelicSpec<A>) -> Result<CubeDiagram<A>> {
    build_cube(spec, true)
}

fn build_cube<A: Atom>(spec: &AdelicSpec<A>, augmented: bool) -> Result<CubeDiagram<A>> {
    let r = spec.max_dim();
    let mut cube = CubeDiagram::new(spec.context.clone(), r);
    let mut by_vertex: BTreeMap<CubeVertex, Cochains<A>> = BTreeMap::new();
    for mask in 1u32..(1 << (r + 1)) {
        let v: CubeVertex = (0..=r).rev().filter(|d| mask >> d & 1 == 1).collect();
        let s = v.len() - 1;
        let flags: Vec<Flag> =
            spec.flags(s)?.into_iter().filter(|f| f.vertices.iter().map(|&p| spec.dims[p]).eq(v.iter().copied())).collect();
        let ch = assemble(spec, flags);
        cube.vertices.insert(v.clone(), ch.module.clone());
        by_vertex.insert(v, ch);
    }
    for (v, src) in &by_vertex {
        for d in 0..=r {
            let Some(i) = insertion_position(v, d) else { continue };
            let mut w = v.clone();
            w.insert(i, d);
            let dst = &by_vertex[&w];
            let mut matrix = Matrix::<Rational>::zeros(dst.module.len(), src.module.len());
            for t in 0..dst.flags.len() {
                for (row, col, x) in face_entries(spec, src, dst, t, i)? {
                    matrix[(row, col)] = x;
                }
            }
            let e = ModuleMap::new(src.module.clone(), dst.module.clone(), matrix)
                .map_err(|e| Error::InvalidSystem(format!("cube edge: {e}")))?;
            cube.edges.insert((v.clone(), w), e);
        }
    }
    if augmented {
        let aug = spec
            .augmentation
            .as_ref()
            .ok_or_else(|| Error::InvalidSystem("the adelic cube needs a global object".into()))?;
        cube.vertices.insert(Vec::new(), aug.global.clone());
        for d in 0..=r {
            let c0 = &by_vertex[&vec![d]];
            let eps = augmentation_map(spec, c0)?;
            cube.edges.insert((Vec::new(), vec![d]), eps);
        }
    }
    cube.check_faces()?;
    Ok(cube)
}

/// Cohomology of the punctured and augmented totalizations of the adelic
/// cube. The cube is a pullback in the cohomological sense when the augmented
/// complex is acyclic, i.e. `H⁰ ≅ global` and `H^{>0} = 0` for the punctured one.
#[derive(Clone, Debug)]
pub struct PullbackReport {
    pub punctured: CohomologyTable,
    pub augmented: CohomologyTable,
    pub acyclic: bool,
}

pub fn pullback_report<A: Atom>(spec: &AdelicSpec<A>) -> Result<PullbackReport> {
    let cube = build_adelic_cube(spec)?;
    let augmented = cohomology(&totalize(&cube)?)?;
    let mut punctured_cube = cube.clone();
    punctured_cube.vertices.remove(&Vec::new());
    punctured_cube.edges.retain(|(from, _), _| !from.is_empty());
    let punctured = cohomology(&totalize(&punctured_cube)?)?;
    let acyclic = (0..augmented.num_degrees()).all(|s| augmented.group(s).is_zero() && augmented.total_dim(s) == 0);
    Ok(PullbackReport { punctured, augmented, acyclic })
}

/// JSON description of a complex: objects with atoms and blocks,
/// differentials as `"p/q"` string matrices.
pub fn complex_to_json<A: Atom>(c: &CochainComplex<A>) -> Value {
    let objects: Vec<Value> = c
        .objects
        .iter()
        .enumerate()
        .map(|(s, o)| {
            json!({
                "degree": s,
                "atoms": o.atoms.iter().map(|a| a.label()).collect::<Vec<_>>(),
                "blocks": o.blocks.iter().map(|b| json!({"label": b.label, "len": b.len})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let differentials: Vec<Value> = c
        .differentials
        .iter()
        .enumerate()
        .map(|(s, d)| json!({"from": s, "to": s + 1, "matrix": matrix_strings(&d.matrix)}))
        .collect();
    json!({"objects": objects, "differentials": differentials})
}

/// Complex and punctured cube of a spec, for external inspection.
pub fn dump_json<A: Atom>(spec: &AdelicSpec<A>) -> Result<Value> {
    let c = adelic_complex(spec)?;
    let cube = decompose_by_dimension(spec)?;
    Ok(json!({
        "poset": spec.poset().ids(),
        "dimensions": spec.dims,
        "localization": spec.localization.name(),
        "complex": complex_to_json(&c),
        "cube": cube_to_json(&cube),
    }))
}
