use num_complex::Complex64;

use crate::dynamics::config::{SimConfig, Variant};
use crate::error::{Error, Result};
use crate::noise::ou::{mode_rates, ou_noise_variance, phi1};
use crate::renorm::constants::{mollifier_weight, RenormConstants};
use crate::spectral::field::FourierField;
use crate::spectral::lattice::{ext, ext_inverse};
use crate::spectral::ops::product_grid_len;

/// `−λ·cube(Φ) + (3λC₀ − 9λ²C₁)Φ` on the box `N`, and the largest sitewise `|Φ|` seen.
///
/// The lattice variant cubes on `Λ_ε` (so the result is `Q_N(Φ³)` exactly); the mollified
/// variant cubes on an alias-free grid and projects with `P_N`. The mass is not included.
fn nonlinear_part(x: &FourierField, consts: &RenormConstants, variant: Variant, n: usize) -> (FourierField, f64) {
    let lam = consts.coupling;
    let (mut out, sup) = match variant {
        Variant::Lattice => {
            let mut lat = ext_inverse(x, n);
            let sup = lat.max_abs();
            for v in lat.values_mut() {
                *v = -lam * *v * *v * *v;
            }
            (ext(&lat), sup)
        }
        Variant::Mollified => {
            let len = product_grid_len(3 * x.cutoff(), n);
            let mut grid = x.to_grid(len);
            let sup = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for v in grid.iter_mut() {
                *v = -lam * *v * *v * *v;
            }
            (FourierField::from_grid(x.dim(), len, &grid, n, false).expect("grid sized for output"), sup)
        }
    };
    out.add_scaled(consts.linear_coefficient() + consts.mass, &x.resized(n));
    out.set_mean_zero(x.mean_zero());
    (out, sup)
}

/// `−λ·Q_N[Φ³] + (3λC₀ − 9λ²C₁ − m)Φ` (lattice) or its Galerkin counterpart (mollified).
///
/// The Laplacian is not included; it acts through the exponential factor of the stepper.
pub fn drift_eval(state: &FourierField, consts: &RenormConstants, variant: Variant) -> FourierField {
    let n = state.cutoff();
    let (mut out, _) = nonlinear_part(state, consts, variant, n);
    out.add_scaled(-consts.mass, state);
    out
}

/// Exponential-Euler integrator with exact stochastic convolution, mode-wise.
///
/// `X ← e^{-μδ}X + φ₁(μ,δ)·F(X) + σ_k ζ` with `μ = λ_k + m`, `F` the mass-free drift and
/// `σ_k² = g_k²(1 − e^{-2μδ})/(2μ)` (`g ≡ 1` for the lattice variant).
#[derive(Clone, Debug)]
pub struct Stepper {
    variant: Variant,
    n: usize,
    delta: f64,
    consts: RenormConstants,
    decay: Vec<f64>,
    weight: Vec<f64>,
    noise_scale: Vec<f64>,
    /// `√δ·g_k`: the Brownian increment carried by the same unit draw.
    increment_scale: Vec<f64>,
    ceiling: f64,
}

impl Stepper {
    pub fn new(cfg: &SimConfig, consts: RenormConstants) -> Self {
        let template = FourierField::zeros(cfg.dim, cfg.n, cfg.mean_zero);
        let rates = mode_rates(&template, cfg.symbol(), cfg.mass);
        let g: Vec<f64> = match cfg.noise_mollifier() {
            Some(eps) => template.frequencies().iter().map(|k| mollifier_weight(eps, k)).collect(),
            None => vec![1.0; rates.len()],
        };
        let on = if cfg.noise { 1.0 } else { 0.0 };
        Self {
            variant: cfg.variant,
            n: cfg.n,
            delta: cfg.delta,
            consts,
            decay: rates.iter().map(|r| (-r * cfg.delta).exp()).collect(),
            weight: rates.iter().map(|r| phi1(*r, cfg.delta)).collect(),
            noise_scale: rates.iter().zip(&g).map(|(r, g)| on * g * ou_noise_variance(*r, cfg.delta).sqrt()).collect(),
            increment_scale: g.iter().map(|g| on * g * cfg.delta.sqrt()).collect(),
            ceiling: cfg.ceiling,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constants(&self) -> &RenormConstants {
        &self.consts
    }

    /// Full drift including `−mΦ`, as seen by the weak formulation.
    pub fn drift(&self, state: &FourierField) -> FourierField {
        drift_eval(state, &self.consts, self.variant)
    }

    /// Brownian increment `√δ·g·ζ` matching the stochastic convolution of `unit`.
    pub fn brownian_increment(&self, unit: &FourierField) -> FourierField {
        let mut out = unit.clone();
        for (c, s) in out.coeffs_mut().iter_mut().zip(&self.increment_scale) {
            *c *= s;
        }
        out
    }

    /// Noise-free part `e^{-μδ}X + φ₁(μ,δ)F(X)` of a step; aborts past the ceiling.
    pub fn mean_step(&self, state: &FourierField, time: f64) -> Result<FourierField> {
        let (f, sup) = nonlinear_part(state, &self.consts, self.variant, self.n);
        if !(sup <= self.ceiling) {
            return Err(Error::Instability { time, value: sup, ceiling: self.ceiling });
        }
        let mut next = state.resized(self.n);
        let it = next.coeffs_mut().iter_mut().zip(f.coeffs());
        for ((x, f), (a, w)) in it.zip(self.decay.iter().zip(&self.weight)) {
            *x = *x * a + f * w;
        }
        if next.mean_zero() {
            next.set(&[0; 3], Complex64::new(0.0, 0.0));
        }
        Ok(next)
    }

    /// Per-mode standard deviation `σ_k` of the stochastic-convolution increment.
    pub fn noise_scales(&self) -> &[f64] {
        &self.noise_scale
    }

    /// One step from `state` at `time` with unit draw `unit`; aborts past the ceiling.
    pub fn step(&self, state: &FourierField, unit: &FourierField, time: f64) -> Result<FourierField> {
        let mut next = self.mean_step(state, time)?;
        for ((x, z), s) in next.coeffs_mut().iter_mut().zip(unit.coeffs()).zip(&self.noise_scale) {
            *x += z * s;
        }
        if next.mean_zero() {
            next.set(&[0; 3], Complex64::new(0.0, 0.0));
        }
        Ok(next)
    }

    /// Raises `Instability` if the sitewise magnitude of `state` exceeds the ceiling.
    pub fn check(&self, state: &FourierField, time: f64) -> Result<()> {
        let sup = ext_inverse(state, self.n).max_abs();
        if sup <= self.ceiling {
            Ok(())
        } else {
            Err(Error::Instability { time, value: sup, ceiling: self.ceiling })
        }
    }
}

/// Single step with freshly built stepper; convenient for tests and one-off use.
pub fn etd_step(state: &FourierField, cfg: &SimConfig, consts: RenormConstants, unit: &FourierField) -> Result<FourierField> {
    Stepper::new(cfg, consts).step(state, unit, 0.0)
}
