//! Diagrams on a punctured (or augmented) cube and their totalization.
//!
//! Vertices are dimension subsets written as strictly decreasing vectors
//! `(d_0 > … > d_s)`; the edge `𝐝 → 𝐝 ∪ {d}` carries the position `i` at
//! which `d` is inserted, and totalization gives it the sign `(−1)^i`.

use std::collections::BTreeMap;

use num_traits::One;
use serde_json::{json, Value};

use super::matrix::Matrix;
use super::module::{Atom, AtomicModule, CochainComplex, ModuleMap};
use crate::{Error, Rational, Result};

/// Vertex key: a strictly decreasing dimension vector (empty for the initial vertex).
pub type CubeVertex = Vec<usize>;

/// Position at which `d` must be inserted into the decreasing vector `v`,
/// or `None` if it is already present.
pub fn insertion_position(v: &[usize], d: usize) -> Option<usize> {
    if v.contains(&d) {
        return None;
    }
    Some(v.iter().take_while(|&&x| x > d).count())
}

pub fn insert_dimension(v: &[usize], d: usize) -> Option<CubeVertex> {
    let i = insertion_position(v, d)?;
    let mut out = v.to_vec();
    out.insert(i, d);
    Some(out)
}

#[derive(Clone, Debug)]
pub struct CubeDiagram<A: Atom> {
    pub context: A::Context,
    /// Dimensions `0..=r`; the cube has `r + 1` coordinates.
    pub top_dimension: usize,
    pub vertices: BTreeMap<CubeVertex, AtomicModule<A>>,
    /// Unsigned edge maps, keyed by (source, target).
    pub edges: BTreeMap<(CubeVertex, CubeVertex), ModuleMap<A>>,
}

impl<A: Atom> CubeDiagram<A> {
    pub fn new(context: A::Context, top_dimension: usize) -> Self {
        CubeDiagram { context, top_dimension, vertices: BTreeMap::new(), edges: BTreeMap::new() }
    }

    pub fn is_augmented(&self) -> bool {
        self.vertices.contains_key(&Vec::new())
    }

    /// Characteristic function of a vertex, most significant coordinate `r`.
    pub fn coordinates(&self, v: &[usize]) -> String {
        (0..=self.top_dimension).rev().map(|d| if v.contains(&d) { '1' } else { '0' }).collect()
    }

    /// Vertices ordered by size, then lexicographically.
    pub fn ordered_vertices(&self) -> Vec<CubeVertex> {
        let mut vs: Vec<CubeVertex> = self.vertices.keys().cloned().collect();
        vs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        vs
    }

    fn edge_or_zero(&self, from: &CubeVertex, to: &CubeVertex) -> ModuleMap<A> {
        self.edges
            .get(&(from.clone(), to.clone()))
            .cloned()
            .unwrap_or_else(|| ModuleMap::zero(self.vertices[from].clone(), self.vertices[to].clone()))
    }

    /// Checks that every square face commutes.
    pub fn check_faces(&self) -> Result<()> {
        for (v, m) in &self.vertices {
            for a in 0..=self.top_dimension {
                for b in a + 1..=self.top_dimension {
                    let (Some(va), Some(vb)) = (insert_dimension(v, a), insert_dimension(v, b)) else { continue };
                    let vab = insert_dimension(&va, b).expect("distinct dimensions");
                    let (Some(ma), Some(mb), Some(_)) =
                        (self.vertices.get(&va), self.vertices.get(&vb), self.vertices.get(&vab))
                    else {
                        continue;
                    };
                    // g1∘f1 − g2∘f2 as the composite [g1, −g2] ∘ [f1; f2]
                    let f1 = self.edge_or_zero(v, &va);
                    let f2 = self.edge_or_zero(v, &vb);
                    let g1 = self.edge_or_zero(&va, &vab);
                    let g2 = self.edge_or_zero(&vb, &vab);
                    let mid = AtomicModule::direct_sum([ma, mb]);
                    let stacked = ModuleMap {
                        domain: m.clone(),
                        codomain: mid.clone(),
                        matrix: stack_rows(&f1.matrix, &f2.matrix),
                    };
                    let joined = ModuleMap {
                        domain: mid,
                        codomain: g1.codomain.clone(),
                        matrix: g1.matrix.hcat(&g2.matrix.scale(&-Rational::one())),
                    };
                    if !A::composite_vanishes(&self.context, &stacked, &joined) {
                        return Err(Error::NonCommutingFace(format!("{v:?} with dimensions {a} and {b}")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn stack_rows(a: &Matrix<Rational>, b: &Matrix<Rational>) -> Matrix<Rational> {
    a.transpose().hcat(&b.transpose()).transpose()
}

/// Totalization: degree `s` collects the vertices of size `s + 1` (or `s`
/// for an augmented cube), the differential is `Σ (−1)^i` over edges that
/// insert at position `i`.
pub fn totalize<A: Atom>(cube: &CubeDiagram<A>) -> Result<CochainComplex<A>> {
    cube.check_faces()?;
    let offset = usize::from(!cube.is_augmented());
    let order = cube.ordered_vertices();
    let max_len = order.iter().map(Vec::len).max().unwrap_or(0);
    if order.is_empty() {
        return Ok(CochainComplex::zero(cube.context.clone()));
    }
    let levels: Vec<Vec<CubeVertex>> =
        (offset..=max_len).map(|k| order.iter().filter(|v| v.len() == k).cloned().collect()).collect();
    let objects: Vec<AtomicModule<A>> = levels
        .iter()
        .map(|vs| {
            let parts: Vec<AtomicModule<A>> = vs
                .iter()
                .map(|v| {
                    let m = &cube.vertices[v];
                    let label = cube.coordinates(v).to_string();
                    if m.blocks.len() <= 1 {
                        m.clone().relabel(label)
                    } else {
                        m.clone()
                    }
                })
                .collect();
            AtomicModule::direct_sum(parts.iter())
        })
        .collect();
    let mut differentials = Vec::new();
    for s in 0..levels.len().saturating_sub(1) {
        let mut matrix = Matrix::zeros(objects[s + 1].len(), objects[s].len());
        let mut col = 0;
        for v in &levels[s] {
            let width = cube.vertices[v].len();
            let mut row = 0;
            for w in &levels[s + 1] {
                let height = cube.vertices[w].len();
                if let Some(e) = cube.edges.get(&(v.clone(), w.clone())) {
                    let added: Vec<usize> = w.iter().filter(|d| !v.contains(d)).cloned().collect();
                    let i = insertion_position(v, added[0]).expect("edge adds one dimension");
                    let sign = if i.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
                    for (a, b, x) in e.matrix.entries() {
                        matrix[(row + a, col + b)] = x.clone() * sign.clone();
                    }
                }
                row += height;
            }
            col += width;
        }
        differentials.push(ModuleMap::new(objects[s].clone(), objects[s + 1].clone(), matrix)?);
    }
    CochainComplex::new(cube.context.clone(), objects, differentials)
}

/// JSON description of a cube: vertices with coordinates and atoms, edges
/// with their matrices as `"p/q"` strings.
pub fn cube_to_json<A: Atom>(cube: &CubeDiagram<A>) -> Value {
    let vertices: Vec<Value> = cube
        .ordered_vertices()
        .iter()
        .map(|v| {
            let m = &cube.vertices[v];
            json!({
                "dimensions": v,
                "coordinates": cube.coordinates(v),
                "atoms": m.atoms.iter().map(|a| a.label()).collect::<Vec<_>>(),
                "blocks": m.blocks.iter().map(|b| json!({"label": b.label, "len": b.len})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Value> = cube
        .edges
        .iter()
        .map(|((from, to), e)| {
            json!({
                "from": cube.coordinates(from),
                "to": cube.coordinates(to),
                "matrix": matrix_strings(&e.matrix),
            })
        })
        .collect();
    json!({ "top_dimension": cube.top_dimension, "vertices": vertices, "edges": edges })
}

/// Row-major rational entries as strings.
pub fn matrix_strings(m: &Matrix<Rational>) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::graded::{GradedContext, MonomialAtom};
    use crate::exactla::module::{check_complex, cohomology};
    use crate::exactla::table::Window;
    use crate::rat;

    #[test]
    fn insertion_positions() {
        assert_eq!(insertion_position(&[2, 0], 1), Some(1));
        assert_eq!(insertion_position(&[2, 0], 3), Some(0));
        assert_eq!(insertion_position(&[2, 0], 0), None);
        assert_eq!(insert_dimension(&[1], 0), Some(vec![1, 0]));
    }

    #[test]
    fn koszul_square_totalizes_to_three_terms() {
        // M → M[1/x] ⊕ M[1/y] → M[1/xy] on the augmented square
        let ctx = GradedContext::fine(Window::cube(2, -3, 1).unwrap());
        let r = MonomialAtom::polynomial(2);
        let one = |a: &MonomialAtom, b: &MonomialAtom| {
            ModuleMap::new(
                AtomicModule::from_atoms(vec![a.clone()]),
                AtomicModule::from_atoms(vec![b.clone()]),
                Matrix::from_rows(vec![vec![rat(1)]]),
            )
            .unwrap()
        };
        let rx = r.invert(&[0]).unwrap();
        let ry = r.invert(&[1]).unwrap();
        let rxy = r.invert(&[0, 1]).unwrap();
        let mut cube = CubeDiagram::new(ctx, 1);
        for (v, a) in [(vec![], &r), (vec![1], &rx), (vec![0], &ry), (vec![1, 0], &rxy)] {
            cube.vertices.insert(v, AtomicModule::from_atoms(vec![a.clone()]));
        }
        cube.edges.insert((vec![], vec![1]), one(&r, &rx));
        cube.edges.insert((vec![], vec![0]), one(&r, &ry));
        cube.edges.insert((vec![1], vec![1, 0]), one(&rx, &rxy));
        cube.edges.insert((vec![0], vec![1, 0]), one(&ry, &rxy));
        let c = totalize(&cube).unwrap();
        assert_eq!(c.objects.iter().map(|o| o.len()).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert!(check_complex(&c));
        let h = cohomology(&c).unwrap();
        assert_eq!(h.total_dim(0) + h.total_dim(1), 0);
        assert_eq!(h.dim(2, &[-1, -1]), 1);
        assert_eq!(h.total_dim(2), 9);
    }

    #[test]
    fn non_commuting_face_is_rejected() {
        let ctx = GradedContext::fine(Window::point());
        let q = AtomicModule::from_atoms(vec![MonomialAtom::polynomial(0)]);
        let m = |c: i64| ModuleMap::new(q.clone(), q.clone(), Matrix::from_rows(vec![vec![rat(c)]])).unwrap();
        let mut cube = CubeDiagram::new(ctx, 1);
        for v in [vec![], vec![1], vec![0], vec![1, 0]] {
            cube.vertices.insert(v, q.clone());
        }
        cube.edges.insert((vec![], vec![1]), m(1));
        cube.edges.insert((vec![], vec![0]), m(1));
        cube.edges.insert((vec![1], vec![1, 0]), m(1));
        cube.edges.insert((vec![0], vec![1, 0]), m(2));
        assert!(matches!(totalize(&cube), Err(Error::NonCommutingFace(_))));
    }
}
