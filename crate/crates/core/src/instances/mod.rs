//! Instance packs: simplicial complexes, Čech/Koszul local cohomology,
//! number rings with their localizations and completions, and the rank-one
//! torus.

pub mod cech;
pub mod hasse;
pub mod padic;
pub mod simplicial;
pub mod torus;

pub use padic::PAdicElement;
