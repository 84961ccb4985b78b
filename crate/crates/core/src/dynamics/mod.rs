//! Time integration of the renormalized equations and path-wise diagnostics.

pub mod config;
pub mod record;
pub mod refine;
pub mod scheme;

pub use config::{hex_digest, CountertermSource, SimConfig, Variant};
pub use record::{member_driver, simulate, simulate_ensemble, simulate_with, AccumulatorRow, TestFunction, TestTrack, TrajectoryRecord};
pub use refine::{extract_remainder, ladder_distances, linear_tail_l2_mean, refinement_distance, tree_config_for, DistanceCurve};
pub use scheme::{drift_eval, etd_step, Stepper};
