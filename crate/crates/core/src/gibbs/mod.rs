//! Lattice Gibbs measure, its Metropolis-adjusted sampler, and Dirichlet-form diagnostics.

pub mod checks;
pub mod cylinder;
pub mod energy;
pub mod measure;
pub mod sampler;

pub use checks::{
    check_ibp, check_invariance, check_reversibility, dirichlet_form_estimate, evolve_starts, reversibility_statistics, moment_bound_report, poincare_estimate, MomentReport, MomentRow,
    PoincareEstimate, TestStatistic,
};
pub use cylinder::{dictionary, ibp_directions, CylinderFunction, Outer, DICTIONARY_VERSION};
pub use energy::{energy_solution_diagnostics, EnergyEntry, EnergyReport};
pub use measure::{gibbs_log_density, log_derivative, mode_direction, GibbsSpec, Part};
pub use sampler::{chain_start, sample_chain_map, sample_gibbs, step_size_warning, ChainConfig, ChainRun, GibbsSamples};
