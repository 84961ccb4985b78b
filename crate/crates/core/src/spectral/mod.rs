//! Field representations on the torus and the lattice, transforms, `Ext`,
//! projections, the aliasing fold and Laplacian symbols.

pub mod field;
pub mod io;
pub mod lattice;
pub mod ops;
pub mod params;

pub use field::{box_frequencies, FourierField, KVec};
pub use lattice::{ext, ext_inverse, transform_to_lattice, LatticeField};
pub use ops::{alias_fold, laplacian_symbol, pi_n, project_pn, q_n, Symbol};
pub use params::RegularityParams;
