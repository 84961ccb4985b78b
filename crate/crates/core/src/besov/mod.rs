//! Littlewood–Paley blocks, Besov norms, paraproducts, the commutator and heat flow.

pub mod norm;
pub mod paraproduct;
pub mod partition;

pub use norm::{besov_norm, besov_norm_with, block_lp_norms, combine_blocks, BesovIndex, Quadrature};
pub use paraproduct::{
    commutator_c, heat_flow, mollifier_commutator, para_low, paraproduct_decompose, paraproduct_decompose_on,
    resonant, Paraproducts,
};
pub use partition::DyadicPartition;
