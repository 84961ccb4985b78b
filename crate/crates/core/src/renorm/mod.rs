//! Counterterms, Wick powers, Duhamel trees and the renormalized norm dashboard.

pub mod constants;
pub mod dashboard;
pub mod trees;
pub mod wick;

pub use constants::{
    c0_lattice, c0_mollified, c1_lattice, compute_c0, compute_c1_tilde, coverage_warning, mollified_cutoff,
    mollifier_weight, phi_tilde, RenormConstants, TwoLoop,
};
pub use dashboard::{tree_norm_report, DashboardEntry, ENTRY_NAMES};
pub use trees::{build_trees, duhamel_tree, resonant_renorm, Duhamel, TreeConfig, TreeSet};
pub use wick::{plain_power, wick_power, wick_scalar, ProductRule};
