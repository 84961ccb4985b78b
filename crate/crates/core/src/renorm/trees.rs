use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::paraproduct::resonant;
use crate::error::{Error, Result};
use crate::noise::driver::ModeDriver;
use crate::noise::ou::{mode_rates, phi1, stochastic_convolution_increment};
use crate::renorm::constants::mollifier_weight;
use crate::renorm::wick::{plain_power, wick_power, ProductRule};
use crate::spectral::field::FourierField;
use crate::spectral::ops::Symbol;

/// Mode-wise exponential quadrature of `∫_0^t e^{-(t-s)A} f(s) ds` with left-point integrand.
#[derive(Clone, Debug)]
pub struct Duhamel {
    decay: Vec<f64>,
    weight: Vec<f64>,
    state: FourierField,
}

impl Duhamel {
    /// Zero initial value on the box of `template`; rates `λ_k + mass`.
    pub fn new(template: &FourierField, symbol: Symbol, mass: f64, delta: f64) -> Self {
        let rates = mode_rates(template, symbol, mass);
        Self {
            decay: rates.iter().map(|r| (-r * delta).exp()).collect(),
            weight: rates.iter().map(|r| phi1(*r, delta)).collect(),
            state: FourierField::zeros(template.dim(), template.cutoff(), template.mean_zero()),
        }
    }

    pub fn state(&self) -> &FourierField {
        &self.state
    }

    /// `X ← e^{-Aδ}X + φ₁(Aδ)·f`.
    pub fn step(&mut self, input: &FourierField) {
        assert_eq!(input.cutoff(), self.state.cutoff(), "Duhamel input box mismatch");
        let it = self.state.coeffs_mut().iter_mut().zip(input.coeffs()).zip(self.decay.iter().zip(&self.weight));
        for ((x, f), (a, w)) in it {
            *x = *x * a + f * w;
        }
        if self.state.mean_zero() {
            self.state.set(&[0; 3], Complex64::new(0.0, 0.0));
        }
    }
}

/// `out[i]` approximates `∫_0^{t_i} P_{t_i−s} f(s) ds` for `t_i = iδ`, using `path[0..i]`.
pub fn duhamel_tree(path: &[FourierField], symbol: Symbol, delta: f64) -> Vec<FourierField> {
    let Some(first) = path.first() else { return Vec::new() };
    let mut acc = Duhamel::new(first, symbol, 0.0, delta);
    let mut out = Vec::with_capacity(path.len());
    for f in path {
        out.push(acc.state().clone());
        acc.step(f);
    }
    out
}

/// `π_0(a, b) − multiplicity·counterterm·factor`, `factor ≡ 1` when absent.
pub fn resonant_renorm(
    a: &FourierField,
    b: &FourierField,
    counterterm: f64,
    multiplicity: f64,
    factor: Option<&FourierField>,
) -> Result<FourierField> {
    if a.dim() != b.dim() || factor.is_some_and(|f| f.dim() != a.dim()) {
        return Err(Error::SizeMismatch { expected: format!("dim {}", a.dim()), found: format!("dim {}", b.dim()) });
    }
    let mut out = resonant(a, b);
    let c = multiplicity * counterterm;
    if c != 0.0 {
        match factor {
            Some(f) => {
                let g = f.resized(out.cutoff().max(f.cutoff()));
                out = out.resized(g.cutoff());
                out.add_scaled(-c, &g);
            }
            None => {
                let unit = 2f64.powf(a.dim() as f64 / 2.0);
                let z = out.get(&[0; 3]);
                out.set(&[0; 3], z - Complex64::new(c * unit, 0.0));
            }
        }
    }
    Ok(out)
}

/// Construction parameters of a tree set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub dim: usize,
    pub cutoff: usize,
    pub symbol: Symbol,
    pub delta: f64,
    pub steps: usize,
    /// Record every `stride` steps (the final time is always recorded).
    pub stride: usize,
    pub rule: ProductRule,
    /// `Some(ε)`: the recorded `Φ₁` is `g(εD)Φ₁`, all powers are taken of it.
    pub mollifier_eps: Option<f64>,
    pub wick_constant: f64,
    /// `Φ₂ = −coupling·I(Φ₁^{⋄3})`.
    pub coupling: f64,
    pub mass: f64,
    pub mean_zero: bool,
    /// `false` replaces Wick powers by plain powers and keeps their mean.
    pub renormalized: bool,
}

/// Recorded tree paths on a common time grid.
#[derive(Clone, Debug)]
pub struct TreeSet {
    pub config: TreeConfig,
    /// Seed of the Brownian driver and the driver step of `times[0]`.
    pub driver_seed: u64,
    pub first_step: u64,
    pub times: Vec<f64>,
    pub phi1: Vec<FourierField>,
    pub wick2: Vec<FourierField>,
    pub phi2: Vec<FourierField>,
    pub k: Vec<FourierField>,
}

/// Builds `Φ₁, Φ₁^{⋄2}, Φ₂, K` from the OU start `phi1_start` and the Brownian driver.
///
/// Step `i` uses driver step `first_step + i`, the same increments `simulate` draws.
pub fn build_trees(cfg: &TreeConfig, phi1_start: &FourierField, driver: &ModeDriver, first_step: u64) -> Result<TreeSet> {
    if phi1_start.cutoff() != cfg.cutoff || phi1_start.dim() != cfg.dim {
        return Err(Error::SizeMismatch {
            expected: format!("dim {} cutoff {}", cfg.dim, cfg.cutoff),
            found: format!("dim {} cutoff {}", phi1_start.dim(), phi1_start.cutoff()),
        });
    }
    if cfg.stride == 0 || !(cfg.delta > 0.0) {
        return Err(Error::InvalidParameter("tree stride and step must be positive".into()));
    }
    let mut x = phi1_start.clone();
    x.set_mean_zero(cfg.mean_zero);
    let rates = mode_rates(&x, cfg.symbol, cfg.mass);
    let decay: Vec<f64> = rates.iter().map(|r| (-r * cfg.delta).exp()).collect();
    let mut streams = driver.streams(cfg.dim, cfg.cutoff, !cfg.mean_zero, first_step);
    let mut unit = FourierField::zeros(cfg.dim, cfg.cutoff, cfg.mean_zero);
    let power_box = FourierField::zeros(cfg.dim, cfg.cutoff, cfg.mean_zero && cfg.renormalized);
    let mut k_acc = Duhamel::new(&power_box, cfg.symbol, cfg.mass, cfg.delta);
    let mut p2_acc = Duhamel::new(&power_box, cfg.symbol, cfg.mass, cfg.delta);
    let mut set = TreeSet {
        config: cfg.clone(),
        driver_seed: driver.seed(),
        first_step,
        times: vec![], phi1: vec![], wick2: vec![], phi2: vec![], k: vec![] };
    for i in 0..=cfg.steps {
        let xm = match cfg.mollifier_eps {
            Some(eps) => x.with_multiplier(|k| mollifier_weight(eps, k)),
            None => x.clone(),
        };
        let (mut w2, mut w3) = if cfg.renormalized {
            (wick_power(&xm, 2, cfg.wick_constant, cfg.rule)?, wick_power(&xm, 3, cfg.wick_constant, cfg.rule)?)
        } else {
            (plain_power(&xm, 2, cfg.rule), plain_power(&xm, 3, cfg.rule))
        };
        w2.set_mean_zero(power_box.mean_zero());
        w3.set_mean_zero(power_box.mean_zero());
        if i % cfg.stride == 0 || i == cfg.steps {
            set.times.push(i as f64 * cfg.delta);
            set.phi1.push(xm);
            set.wick2.push(w2.clone());
            set.phi2.push(p2_acc.state().scaled(-cfg.coupling));
            set.k.push(k_acc.state().clone());
        }
        if i == cfg.steps {
            break;
        }
        k_acc.step(&w2);
        p2_acc.step(&w3);
        streams.fill_next(&mut unit);
        let eta = stochastic_convolution_increment(&unit, &rates, cfg.delta);
        for ((c, e), a) in x.coeffs_mut().iter_mut().zip(eta.coeffs()).zip(&decay) {
            *c = *c * a + e;
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ou::ou_stationary_sample;

    #[test]
    fn duhamel_constant_single_mode() {
        let k = [1, 2, 0];
        let a = 0.8;
        let f = FourierField::cosine_pair(3, 2, &k).scaled(a);
        let delta = 0.01;
        let out = duhamel_tree(&vec![f; 51], Symbol::Continuum, delta);
        assert_eq!(out[0].max_abs_coeff(), 0.0);
        let lam = Symbol::Continuum.eval(&k);
        for (i, o) in out.iter().enumerate() {
            let t = i as f64 * delta;
            assert!((o.get(&k).re - a * (1.0 - (-lam * t).exp()) / lam).abs() < 1e-14);
        }
    }

    #[test]
    fn duhamel_is_linear() {
        let f = FourierField::cosine_pair(2, 3, &[1, 1, 0]);
        let g = FourierField::cosine_pair(2, 3, &[0, 3, 0]);
        let fg: Vec<FourierField> = (0..5).map(|i| {
            let mut s = f.scaled(i as f64);
            s.add_scaled(2.0, &g);
            s
        }).collect();
        let fs: Vec<FourierField> = (0..5).map(|i| f.scaled(i as f64)).collect();
        let gs = vec![g.clone(); 5];
        let a = duhamel_tree(&fg, Symbol::Continuum, 0.1);
        let b = duhamel_tree(&fs, Symbol::Continuum, 0.1);
        let c = duhamel_tree(&gs, Symbol::Continuum, 0.1);
        for i in 0..5 {
            let mut s = b[i].clone();
            s.add_scaled(2.0, &c[i]);
            assert!(a[i].difference(&s).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn resonant_counterterms() {
        let a = FourierField::cosine_pair(3, 2, &[1, 0, 0]);
        let b = FourierField::cosine_pair(3, 2, &[1, 0, 0]);
        let plain = resonant_renorm(&a, &b, 0.0, 1.0, None).unwrap();
        assert!(plain.difference(&resonant(&a, &b)).max_abs_coeff() == 0.0);
        let z = FourierField::zeros(3, 2, false);
        let only = resonant_renorm(&z, &z, 0.3, 2.0, None).unwrap();
        assert!((only.get(&[0; 3]).re + 0.6 * 2f64.powf(1.5)).abs() < 1e-14);
        let with_field = resonant_renorm(&z, &z, 0.5, 3.0, Some(&a)).unwrap();
        assert!((with_field.get(&[1, 0, 0]).re + 1.5).abs() < 1e-14);
    }

    #[test]
    fn trees_start_at_zero_and_stay_hermitian() {
        let d = ModeDriver::brownian(5);
        let start = ou_stationary_sample(&ModeDriver::new(5, crate::noise::tag::INITIAL), 3, 3, Symbol::Continuum, 0.0, true, 0)
            .unwrap()
            .field;
        let cfg = TreeConfig {
            dim: 3,
            cutoff: 3,
            symbol: Symbol::Continuum,
            delta: 1e-3,
            steps: 20,
            stride: 10,
            rule: ProductRule::Galerkin,
            mollifier_eps: Some(1.0 / 3.0),
            wick_constant: 0.1,
            coupling: 1.0,
            mass: 0.0,
            mean_zero: true,
            renormalized: true,
        };
        let t = build_trees(&cfg, &start, &d, 0).unwrap();
        assert_eq!(t.times, vec![0.0, 0.01, 0.02]);
        assert_eq!(t.k[0].max_abs_coeff(), 0.0);
        assert_eq!(t.phi2[0].max_abs_coeff(), 0.0);
        for f in t.phi1.iter().chain(&t.wick2).chain(&t.phi2).chain(&t.k) {
            assert!(f.hermitian_defect() < 1e-14);
        }
        assert!(t.k[2].max_abs_coeff() > 0.0);
    }
}
