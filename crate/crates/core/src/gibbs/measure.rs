use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::config::{CountertermSource, SimConfig, Variant};
use crate::dynamics::scheme::drift_eval;
use crate::error::{Error, Result};
use crate::renorm::constants::{c0_lattice, c1_lattice, RenormConstants};
use crate::spectral::field::{FourierField, KVec};
use crate::spectral::lattice::LatticeField;
use crate::spectral::ops::Symbol;
use crate::spectral::params::RegularityParams;

/// Lattice `Φ⁴` measure on `Λ_ε`, `ε = 2/(2N+1)`; the zero mode is always kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub dim: usize,
    pub n: usize,
    pub counterterms: CountertermSource,
    pub mass: f64,
    pub coupling: f64,
}

impl Default for GibbsSpec {
    fn default() -> Self {
        Self { dim: 3, n: 1, counterterms: CountertermSource::Computed, mass: 1.0, coupling: 1.0 }
    }
}

impl GibbsSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(2..=3).contains(&self.dim) {
            v.push(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.n < 1 {
            v.push("N must be >= 1".into());
        }
        // the Gaussian reference of the proposal needs a positive zero-mode rate
        if !(self.mass > 0.0) {
            v.push("m > 0 when the zero mode is kept".into());
        }
        if !(self.coupling >= 0.0) {
            v.push("λ ≥ 0".into());
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

    pub fn eps(&self) -> f64 {
        2.0 / (2 * self.n + 1) as f64
    }

    pub fn constants(&self) -> RenormConstants {
        let (c0, c1) = match self.counterterms {
            CountertermSource::Zero => (0.0, 0.0),
            CountertermSource::Manual { c0, c1 } => (c0, c1),
            CountertermSource::Computed => (c0_lattice(self.dim, self.n), c1_lattice(self.dim, self.n)),
        };
        RenormConstants::new(c0, c1, self.mass, self.coupling)
    }

    /// Lattice dynamics whose invariant law is this measure; `c0`, `c1` are pinned so no sums are recomputed.
    pub fn dynamics(&self, delta: f64, horizon: f64, seed: u64) -> SimConfig {
        let c = self.constants();
        SimConfig {
            dim: self.dim,
            n: self.n,
            delta,
            horizon,
            params: RegularityParams::default(),
            mass: self.mass,
            coupling: self.coupling,
            seed,
            ensemble: 1,
            stride: usize::MAX,
            variant: Variant::Lattice,
            counterterms: CountertermSource::Manual { c0: c.c0, c1: c.c1 },
            mean_zero: false,
            continuum_symbol: false,
            noise: true,
            ceiling: 1e6,
        }
    }
}

/// Unnormalized log density evaluated on lattice values:
/// `−ε^{d−2} Σ_{nearest pairs}(x(ξ₁)−x(ξ₂))² + a ε^d Σ x² − (λ/2) ε^d Σ x⁴`, `a = 3λC₀ − 9λ²C₁ − m`.
pub fn gibbs_log_density(spec: &GibbsSpec, x: &LatticeField) -> f64 {
    gibbs_log_density_with(&spec.constants(), x)
}

pub fn gibbs_log_density_with(consts: &RenormConstants, x: &LatticeField) -> f64 {
    let dim = x.dim();
    let side = x.side();
    let eps = x.eps();
    let v = x.values();
    let mut grad = 0.0;
    let mut quad = 0.0;
    let mut quart = 0.0;
    let mut stride = 1;
    for axis in (0..dim).rev() {
        for (p, &xp) in v.iter().enumerate() {
            let c = (p / stride) % side;
            let q = if c + 1 == side { p + stride - side * stride } else { p + stride };
            grad += (v[q] - xp).powi(2);
            if axis == 0 {
                let s = xp * xp;
                quad += s;
                quart += s * s;
            }
        }
        stride *= side;
    }
    let vol = eps.powi(dim as i32);
    -eps.powi(dim as i32 - 2) * grad + consts.linear_coefficient() * vol * quad - 0.5 * consts.coupling * vol * quart
}

/// Log-derivative field `b = 2Δ_ε x − 2(λ x³ − a x)` (lattice cube, folded); its pairing with a unit
/// real direction `h` is the derivative of the log density along `h`.
pub fn log_derivative(spec: &GibbsSpec, x: &FourierField) -> FourierField {
    log_derivative_with(&spec.constants(), spec.n, x)
}

pub fn log_derivative_with(consts: &RenormConstants, n: usize, x: &FourierField) -> FourierField {
    let symbol = Symbol::lattice_for(n);
    let x = x.resized(n);
    let mut b = drift_eval(&x, consts, Variant::Lattice);
    b.add_scaled(1.0, &x.with_multiplier(|k| -symbol.eval(k)));
    b.scaled(2.0)
}

/// Real part of a Fourier pair as a unit direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    Cos,
    Sin,
}

/// Unit real direction `(e_k + e_{-k})/√2` (cos) or `(e_k − e_{-k})/(i√2)` (sin); `e_0` for `k = 0`.
pub fn mode_direction(dim: usize, cutoff: usize, k: &KVec, part: Part) -> FourierField {
    let mut f = FourierField::zeros(dim, cutoff, false);
    if *k == [0; 3] {
        if part == Part::Cos {
            f.set(k, Complex64::new(1.0, 0.0));
        }
        return f;
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = match part {
        Part::Cos => Complex64::new(h, 0.0),
        Part::Sin => Complex64::new(0.0, -h),
    };
    f.set_pair(k, c);
    f
}
