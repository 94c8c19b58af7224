//! Exact linear algebra: matrices, Smith normal form, fraction-free ranks,
//! atomic modules and their two cohomology backends, cubes and filtrations.

pub mod abelian;
pub mod cube;
pub mod filtration;
pub mod graded;
pub mod matrix;
pub mod module;
pub mod rank;
pub mod snf;
pub mod table;

pub use module::{check_complex, cohomology, Atom, AtomicModule, Block, CochainComplex, ModuleMap};
pub use table::{AbelianGroup, CohomologyTable, Multidegree, Window};
