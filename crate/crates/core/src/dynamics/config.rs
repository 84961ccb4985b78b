use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::renorm::constants::{c0_lattice, c0_mollified, c1_lattice, compute_c1_tilde, RenormConstants};
use crate::renorm::wick::ProductRule;
use crate::spectral::ops::Symbol;
use crate::spectral::params::RegularityParams;

/// Which regularized equation is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Lattice equation: lattice Laplacian, aliased cube `Q_N(Φ³)`, constants `C₀`, `C₁` of `Λ_ε`.
    Lattice,
    /// Mollified equation: `ρ_ε∗dW` with `ε = 1/N`, Galerkin cube, constants `C̄₀`, `C̃₁`.
    Mollified,
}

/// Origin of the counterterms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountertermSource {
    /// Mode sums matching the variant.
    Computed,
    Zero,
    Manual { c0: f64, c1: f64 },
}

/// Parameters of one simulation (or one ensemble member family).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dim: usize,
    pub n: usize,
    pub delta: f64,
    pub horizon: f64,
    pub params: RegularityParams,
    pub mass: f64,
    pub coupling: f64,
    pub seed: u64,
    pub ensemble: usize,
    /// Snapshot every `stride` steps.
    pub stride: usize,
    pub variant: Variant,
    pub counterterms: CountertermSource,
    pub mean_zero: bool,
    /// Replace the lattice dispersion by `π²|k|²` (needed for nested refinement comparisons).
    pub continuum_symbol: bool,
    pub noise: bool,
    /// Sitewise `|Φ|` above this aborts the run.
    pub ceiling: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            n: 4,
            delta: 1e-3,
            horizon: 0.1,
            params: RegularityParams::default(),
            mass: 0.0,
            coupling: 0.1,
            seed: 0,
            ensemble: 1,
            stride: 10,
            variant: Variant::Lattice,
            counterterms: CountertermSource::Computed,
            mean_zero: true,
            continuum_symbol: false,
            noise: true,
            ceiling: 1e6,
        }
    }
}

impl SimConfig {
    /// Collects every violated precondition; empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.params.validate();
        if !(2..=3).contains(&self.dim) {
            v.push(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.n < 1 {
            v.push("N must be >= 1".into());
        }
        if !(self.delta > 0.0) {
            v.push("δ > 0".into());
        }
        if !(self.horizon == 0.0 || self.horizon >= self.delta) {
            v.push("T = 0 or T ≥ δ".into());
        }
        if self.stride == 0 {
            v.push("stride ≥ 1".into());
        }
        if self.ensemble == 0 {
            v.push("ensemble ≥ 1".into());
        }
        if !self.mean_zero && !(self.mass > 0.0) {
            v.push("m > 0 when the zero mode is kept".into());
        }
        if !(self.ceiling > 0.0) {
            v.push("ceiling > 0".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.delta).round() as usize
    }

    pub fn eps(&self) -> f64 {
        match self.variant {
            Variant::Lattice => 2.0 / (2 * self.n + 1) as f64,
            Variant::Mollified => 1.0 / self.n as f64,
        }
    }

    pub fn symbol(&self) -> Symbol {
        match (self.variant, self.continuum_symbol) {
            (Variant::Lattice, false) => Symbol::lattice_for(self.n),
            _ => Symbol::Continuum,
        }
    }

    pub fn rule(&self) -> ProductRule {
        match self.variant {
            Variant::Lattice => ProductRule::Lattice,
            Variant::Mollified => ProductRule::Galerkin,
        }
    }

    /// Mollifier scale applied to the noise, if any.
    pub fn noise_mollifier(&self) -> Option<f64> {
        (self.variant == Variant::Mollified).then(|| self.eps())
    }

    pub fn constants(&self) -> RenormConstants {
        let (c0, c1) = match self.counterterms {
            CountertermSource::Zero => (0.0, 0.0),
            CountertermSource::Manual { c0, c1 } => (c0, c1),
            CountertermSource::Computed => match self.variant {
                Variant::Lattice => (c0_lattice(self.dim, self.n), c1_lattice(self.dim, self.n)),
                Variant::Mollified => {
                    let eps = self.eps();
                    (c0_mollified(self.dim, eps), compute_c1_tilde(self.dim, eps, self.n))
                }
            },
        };
        RenormConstants::new(c0, c1, self.mass, self.coupling)
    }

    /// SHA-256 of the canonical JSON form (field order fixed by the struct).
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex_digest(text.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
