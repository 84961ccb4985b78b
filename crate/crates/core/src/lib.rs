//! Spectral and lattice tools for the stochastically quantized Φ⁴ model on the
//! torus `[-1,1]^d`, `d ∈ {2, 3}`.

pub mod besov;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod gibbs;
pub mod noise;
pub mod renorm;
pub mod run;
pub mod smooth;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
