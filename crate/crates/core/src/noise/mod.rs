//! Brownian driver and exact sampling of the linear (Ornstein–Uhlenbeck) dynamics.

pub mod driver;
pub mod ou;

pub use driver::{brownian_increment, derive_seed, mode_key, tag, ModeDriver, ModeStreams};
pub use ou::{
    mode_rates, ou_noise_variance, ou_stationary_sample, ou_transition_step, phi1,
    stochastic_convolution_increment, OUState,
};
