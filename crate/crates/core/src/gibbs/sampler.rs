use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::scheme::Stepper;
use crate::error::{Error, Result};
use crate::gibbs::measure::{gibbs_log_density_with, GibbsSpec};
use crate::noise::driver::{derive_seed, tag, ModeDriver};
use crate::noise::ou::ou_stationary_sample;
use crate::spectral::field::{FourierField, KVec};
use crate::spectral::lattice::ext_inverse;
use crate::spectral::ops::Symbol;
use crate::stats::{effective_sample_size, r_hat};

/// Metropolis-adjusted exponential-Euler Langevin chain settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Time step of the Langevin proposal.
    pub step: f64,
    pub burn_in: usize,
    pub thin: usize,
    /// Recorded states per chain.
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    /// `false` proposes the noise-free drift step (always accepted at a fixed point).
    pub proposal_noise: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { step: 1.0, burn_in: 200, thin: 5, samples: 1000, chains: 2, seed: 0, proposal_noise: true }
    }
}

impl ChainConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.step > 0.0) {
            v.push("chain step > 0".into());
        }
        if self.thin == 0 || self.samples == 0 || self.chains == 0 {
            v.push("thin, samples and chains ≥ 1".into());
        }
        v
    }
}

/// Output of one chain: observed values at the recorded states.
#[derive(Clone, Debug)]
pub struct ChainRun<T> {
    pub values: Vec<T>,
    pub accepted: usize,
    pub proposed: usize,
}

impl<T> ChainRun<T> {
    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }
}

/// Advisory emitted when the acceptance rate leaves `[0.1, 0.9]`.
pub fn step_size_warning(acceptance: f64, step: f64) -> Option<String> {
    (!(0.1..=0.9).contains(&acceptance)).then(|| format!("acceptance rate {acceptance:.3} outside [0.1, 0.9] at step {step}; adjust the chain step"))
}

/// Starting state of chain `chain`: an exact draw of the Gaussian part (rates `λ_k + m`).
pub fn chain_start(spec: &GibbsSpec, seed: u64, chain: usize) -> Result<FourierField> {
    let driver = ModeDriver::new(derive_seed(seed, &[tag::INITIAL, chain as u64]), tag::INITIAL);
    Ok(ou_stationary_sample(&driver, spec.dim, spec.n, Symbol::lattice_for(spec.n), spec.mass, false, 0)?.field)
}

/// Runs chain `chain` from `start` and applies `observe` to every recorded state.
pub fn sample_chain_map<T>(
    spec: &GibbsSpec,
    cfg: &ChainConfig,
    chain: usize,
    start: FourierField,
    mut observe: impl FnMut(&FourierField) -> T,
) -> Result<ChainRun<T>> {
    spec.validate()?;
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let consts = spec.constants();
    let mut sim = spec.dynamics(cfg.step, cfg.step, cfg.seed);
    sim.noise = cfg.proposal_noise;
    let stepper = Stepper::new(&sim, consts.clone());
    let scales = stepper.noise_scales().to_vec();
    let chain_seed = derive_seed(cfg.seed, &[tag::CHAIN, chain as u64]);
    let mut streams = ModeDriver::new(chain_seed, tag::CHAIN).streams(spec.dim, spec.n, true, 0);
    let mut uniform = ChaCha8Rng::seed_from_u64(derive_seed(chain_seed, &[1]));
    let log_target = |x: &FourierField| gibbs_log_density_with(&consts, &ext_inverse(x, spec.n));
    // log q(to | from) up to a constant, given the proposal mean from `from`
    let log_q = |to: &FourierField, mean: &FourierField| -> f64 {
        if !cfg.proposal_noise {
            return 0.0;
        }
        to.coeffs().iter().zip(mean.coeffs()).zip(&scales).map(|((a, b), s)| -(a - b).norm_sqr() / (2.0 * s * s)).sum()
    };
    let mut x = start.resized(spec.n);
    x.set_mean_zero(false);
    let mut lx = log_target(&x);
    let mut mx = stepper.mean_step(&x, 0.0)?;
    let mut unit = FourierField::zeros(spec.dim, spec.n, false);
    let total = cfg.burn_in + cfg.samples * cfg.thin;
    let mut run = ChainRun { values: Vec::with_capacity(cfg.samples), accepted: 0, proposed: 0 };
    for it in 1..=total {
        streams.fill_next(&mut unit);
        let mut y = mx.clone();
        for ((c, z), s) in y.coeffs_mut().iter_mut().zip(unit.coeffs()).zip(&scales) {
            *c += z * s;
        }
        let u: f64 = uniform.random();
        let my = stepper.mean_step(&y, it as f64 * cfg.step)?;
        let ly = log_target(&y);
        let log_alpha = ly - lx + log_q(&x, &my) - log_q(&y, &mx);
        run.proposed += 1;
        if u.ln() < log_alpha {
            x = y;
            lx = ly;
            mx = my;
            run.accepted += 1;
        }
        if it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 {
            run.values.push(observe(&x));
        }
    }
    Ok(run)
}

/// Recorded states of all chains together with their diagnostics.
#[derive(Clone, Debug)]
pub struct GibbsSamples {
    pub chains: Vec<Vec<FourierField>>,
    pub acceptance: Vec<f64>,
    pub warnings: Vec<String>,
}

impl GibbsSamples {
    /// All recorded states, chain after chain.
    pub fn pooled(&self) -> Vec<FourierField> {
        self.chains.iter().flatten().cloned().collect()
    }

    fn series(&self, f: impl Fn(&FourierField) -> f64) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c.iter().map(&f).collect()).collect()
    }

    /// Potential scale reduction of `|⟨x, e_k⟩|²`.
    pub fn mode_r_hat(&self, k: &KVec) -> f64 {
        r_hat(&self.series(|x| x.get(k).norm_sqr()))
    }

    /// Largest potential scale reduction over the canonical modes of the box.
    pub fn max_r_hat(&self) -> f64 {
        let Some(first) = self.chains.first().and_then(|c| c.first()) else { return f64::NAN };
        crate::noise::driver::canonical_modes(first.dim(), first.cutoff(), true)
            .iter()
            .map(|k| self.mode_r_hat(k))
            .fold(0.0, f64::max)
    }

    /// Effective sample size of an observable, summed over chains.
    pub fn ess(&self, f: impl Fn(&FourierField) -> f64) -> f64 {
        self.series(f).iter().map(|s| effective_sample_size(s)).sum()
    }
}

/// Runs `cfg.chains` chains in parallel from [`chain_start`] states.
pub fn sample_gibbs(spec: &GibbsSpec, cfg: &ChainConfig) -> Result<GibbsSamples> {
    let runs: Vec<ChainRun<FourierField>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| sample_chain_map(spec, cfg, c, chain_start(spec, cfg.seed, c)?, FourierField::clone))
        .collect::<Result<_>>()?;
    let acceptance: Vec<f64> = runs.iter().map(ChainRun::acceptance).collect();
    let warnings = acceptance.iter().filter_map(|a| step_size_warning(*a, cfg.step)).collect();
    Ok(GibbsSamples { chains: runs.into_iter().map(|r| r.values).collect(), acceptance, warnings })
}
