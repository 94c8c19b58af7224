//! Filtrations by summand level and their subquotient complexes.

use std::collections::BTreeSet;

use super::module::{cohomology, Atom, AtomicModule, Block, CochainComplex, ModuleMap};
use super::table::CohomologyTable;
use crate::{Error, Result};

/// The subquotient `F^n / F^{n+1}` and its cohomology.
#[derive(Clone, Debug)]
pub struct Subquotient<A: Atom> {
    pub level: usize,
    pub complex: CochainComplex<A>,
    pub cohomology: CohomologyTable,
}

fn atom_levels<A: Atom>(m: &AtomicModule<A>, block_levels: &[usize]) -> Result<Vec<usize>> {
    if block_levels.len() != m.blocks.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} levels for {} summands",
            block_levels.len(),
            m.blocks.len()
        )));
    }
    Ok(m.blocks.iter().zip(block_levels).flat_map(|(b, &l)| std::iter::repeat_n(l, b.len)).collect())
}

/// Splits `c` into the subquotients of the filtration where `F^n` is spanned
/// by the summands (blocks) of level `≥ n`. `levels[s][k]` is the level of
/// block `k` in degree `s`. The differential must not decrease levels.
pub fn filtration_subquotients<A: Atom>(c: &CochainComplex<A>, levels: &[Vec<usize>]) -> Result<Vec<Subquotient<A>>> {
    if levels.len() != c.len() {
        return Err(Error::ShapeMismatch(format!("levels for {} degrees, complex has {}", levels.len(), c.len())));
    }
    let atom_lv: Vec<Vec<usize>> =
        c.objects.iter().zip(levels).map(|(o, l)| atom_levels(o, l)).collect::<Result<_>>()?;
    for (s, d) in c.differentials.iter().enumerate() {
        for (i, j, x) in d.matrix.entries() {
            if !num_traits::Zero::is_zero(x) && atom_lv[s + 1][i] < atom_lv[s][j] {
                return Err(Error::FiltrationViolated(format!(
                    "degree {s}: level {} summand maps to level {}",
                    atom_lv[s][j],
                    atom_lv[s + 1][i]
                )));
            }
        }
    }
    let all: BTreeSet<usize> = levels.iter().flatten().cloned().collect();
    let mut out = Vec::new();
    for n in all {
        let keep: Vec<Vec<usize>> =
            atom_lv.iter().map(|lv| (0..lv.len()).filter(|&i| lv[i] == n).collect()).collect();
        let objects: Vec<AtomicModule<A>> = c
            .objects
            .iter()
            .zip(levels)
            .zip(&keep)
            .map(|((o, bl), k)| AtomicModule {
                atoms: k.iter().map(|&i| o.atoms[i].clone()).collect(),
                blocks: o
                    .blocks
                    .iter()
                    .zip(bl)
                    .filter(|(_, &l)| l == n)
                    .map(|(b, _)| Block { label: b.label.clone(), len: b.len })
                    .collect(),
            })
            .collect();
        let differentials = c
            .differentials
            .iter()
            .enumerate()
            .map(|(s, d)| ModuleMap {
                domain: objects[s].clone(),
                codomain: objects[s + 1].clone(),
                matrix: d.matrix.select_rows(&keep[s + 1]).select_cols(&keep[s]),
            })
            .collect();
        let complex = CochainComplex::new(c.context.clone(), objects, differentials)?;
        let cohomology = cohomology(&complex)?;
        out.push(Subquotient { level: n, complex, cohomology });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::graded::{GradedContext, MonomialAtom};
    use crate::exactla::matrix::Matrix;
    use crate::exactla::table::Window;
    use crate::rat;

    fn two_term() -> CochainComplex<MonomialAtom> {
        let ctx = GradedContext::fine(Window::point());
        let q = |l: &str| AtomicModule::new(l, vec![MonomialAtom::polynomial(0)]);
        let c0 = AtomicModule::direct_sum([&q("a"), &q("b")]);
        let c1 = q("c");
        let d = ModuleMap::new(c0.clone(), c1.clone(), Matrix::from_rows(vec![vec![rat(1), rat(1)]])).unwrap();
        CochainComplex::new(ctx, vec![c0, c1], vec![d]).unwrap()
    }

    #[test]
    fn trivial_level_gives_the_complex() {
        let c = two_term();
        let sq = filtration_subquotients(&c, &[vec![0, 0], vec![0]]).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq[0].complex.differentials[0].matrix, c.differentials[0].matrix);
    }

    #[test]
    fn levels_must_not_decrease() {
        let c = two_term();
        assert!(filtration_subquotients(&c, &[vec![0, 1], vec![1]]).is_ok());
        assert!(matches!(
            filtration_subquotients(&c, &[vec![0, 1], vec![0]]),
            Err(Error::FiltrationViolated(_))
        ));
    }
}
