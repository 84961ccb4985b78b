use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::config::SimConfig;
use crate::dynamics::scheme::Stepper;
use crate::error::{Error, Result};
use crate::noise::driver::{derive_seed, tag, ModeDriver};
use crate::spectral::field::FourierField;

/// Brownian driver of ensemble member `member`.
pub fn member_driver(seed: u64, member: usize) -> ModeDriver {
    ModeDriver::brownian(derive_seed(seed, &[tag::ENSEMBLE, member as u64]))
}

/// Per-step scalar series of one test function `φ` along a trajectory.
///
/// Index `j` refers to the state `X_j = X(jδ)`; `noise[j]` is `⟨W_{j+1} − W_j, φ⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestTrack {
    pub id: String,
    /// `|P_N φ|²`.
    pub norm_sq: f64,
    pub delta: f64,
    /// `⟨X_j, φ⟩`.
    pub pairing: Vec<f64>,
    /// `⟨X_j, Δφ⟩`.
    pub laplacian: Vec<f64>,
    /// `⟨drift(X_j), φ⟩`, mass included.
    pub drift: Vec<f64>,
    pub noise: Vec<f64>,
}

impl TestTrack {
    pub fn steps(&self) -> usize {
        self.noise.len()
    }

    /// `H_n = −δ Σ_{j<n} ⟨drift(X_j), φ⟩`.
    pub fn drift_functional(&self, n: usize) -> f64 {
        -self.delta * self.drift[..n].iter().sum::<f64>()
    }

    /// `M_n = Σ_{j<n} ⟨ΔW_j, φ⟩`.
    pub fn martingale(&self, n: usize) -> f64 {
        self.noise[..n].iter().sum()
    }

    pub fn qv_martingale(&self, n: usize) -> f64 {
        self.noise[..n].iter().map(|v| v * v).sum()
    }

    pub fn qv_drift(&self, n: usize) -> f64 {
        self.delta * self.delta * self.drift[..n].iter().map(|v| v * v).sum::<f64>()
    }

    /// `⟨X_n − X_0, φ⟩ − (δ Σ ⟨X_j, Δφ⟩ − H_n + M_n)`; O(δ) by construction.
    pub fn residual(&self, n: usize) -> f64 {
        let lap = self.delta * self.laplacian[..n].iter().sum::<f64>();
        self.pairing[n] - self.pairing[0] - (lap - self.drift_functional(n) + self.martingale(n))
    }

    /// Same series along `X̂_j = X_{S−j}`, with the martingale increments implied by the weak form.
    pub fn reversed(&self) -> Self {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        let pairing = rev(&self.pairing);
        let laplacian = rev(&self.laplacian);
        let drift = rev(&self.drift);
        let noise = (0..self.steps())
            .map(|j| pairing[j + 1] - pairing[j] - self.delta * (laplacian[j] + drift[j]))
            .collect();
        Self { id: format!("{}~rev", self.id), norm_sq: self.norm_sq, delta: self.delta, pairing, laplacian, drift, noise }
    }
}

/// One accumulator row at a recorded step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulatorRow {
    pub time: f64,
    pub phi_id: String,
    pub h: f64,
    pub m: f64,
    pub qv_m: f64,
    pub qv_h: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub config_digest: String,
    /// Seed of the Brownian driver that produced the path.
    pub driver_seed: u64,
    pub delta: f64,
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub snapshots: Vec<FourierField>,
    pub tracks: Vec<TestTrack>,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &FourierField {
        self.snapshots.last().expect("record holds the initial snapshot")
    }

    pub fn accumulator_rows(&self) -> Vec<AccumulatorRow> {
        let mut rows = Vec::new();
        for (&s, &t) in self.steps.iter().zip(&self.times) {
            for tr in &self.tracks {
                rows.push(AccumulatorRow {
                    time: t,
                    phi_id: tr.id.clone(),
                    h: tr.drift_functional(s),
                    m: tr.martingale(s),
                    qv_m: tr.qv_martingale(s),
                    qv_h: tr.qv_drift(s),
                });
            }
        }
        rows
    }
}

/// A named test function; it is projected onto the simulation box.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: String,
    pub field: FourierField,
}

impl TestFunction {
    pub fn new(id: impl Into<String>, field: FourierField) -> Self {
        Self { id: id.into(), field }
    }
}

/// Integrates one path from `initial` with `driver`, recording every `stride` steps and the end.
pub fn simulate_with(cfg: &SimConfig, initial: &FourierField, driver: &ModeDriver, tests: &[TestFunction]) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if initial.dim() != cfg.dim || initial.support_radius(0.0) > cfg.n {
        return Err(Error::SupportViolation { found: initial.support_radius(0.0), limit: cfg.n });
    }
    let stepper = Stepper::new(cfg, cfg.constants());
    let symbol = cfg.symbol();
    let mut x = initial.resized(cfg.n);
    x.set_mean_zero(cfg.mean_zero);
    let projected: Vec<(FourierField, FourierField)> = tests
        .iter()
        .map(|t| {
            let mut p = t.field.resized(cfg.n);
            p.set_mean_zero(cfg.mean_zero);
            let lap = p.with_multiplier(|k| -symbol.eval(k));
            (p, lap)
        })
        .collect();
    let total = cfg.steps();
    let mut tracks: Vec<TestTrack> = tests
        .iter()
        .zip(&projected)
        .map(|(t, (p, _))| TestTrack {
            id: t.id.clone(),
            norm_sq: p.inner(p),
            delta: cfg.delta,
            pairing: Vec::with_capacity(total + 1),
            laplacian: Vec::with_capacity(total + 1),
            drift: Vec::with_capacity(total + 1),
            noise: Vec::with_capacity(total),
        })
        .collect();
    let mut rec = TrajectoryRecord {
        config_digest: cfg.digest(),
        driver_seed: driver.seed(),
        delta: cfg.delta,
        steps: vec![],
        times: vec![],
        snapshots: vec![],
        tracks: vec![],
    };
    stepper.check(&x, 0.0)?;
    let mut streams = driver.streams(cfg.dim, cfg.n, !cfg.mean_zero, 0);
    let mut unit = FourierField::zeros(cfg.dim, cfg.n, cfg.mean_zero);
    for i in 0..=total {
        let time = i as f64 * cfg.delta;
        if !tracks.is_empty() {
            let drift = stepper.drift(&x);
            for (tr, (p, lap)) in tracks.iter_mut().zip(&projected) {
                tr.pairing.push(x.inner(p));
                tr.laplacian.push(x.inner(lap));
                tr.drift.push(drift.inner(p));
            }
        }
        if i % cfg.stride == 0 || i == total {
            rec.steps.push(i);
            rec.times.push(time);
            rec.snapshots.push(x.clone());
        }
        if i == total {
            break;
        }
        streams.fill_next(&mut unit);
        if !tracks.is_empty() {
            let dw = stepper.brownian_increment(&unit);
            for (tr, (p, _)) in tracks.iter_mut().zip(&projected) {
                tr.noise.push(dw.inner(p));
            }
        }
        x = stepper.step(&x, &unit, time)?;
    }
    stepper.check(&x, total as f64 * cfg.delta)?;
    rec.tracks = tracks;
    Ok(rec)
}

/// Ensemble member `member` of `cfg` (driver from [`member_driver`]).
pub fn simulate(cfg: &SimConfig, initial: &FourierField, member: usize, tests: &[TestFunction]) -> Result<TrajectoryRecord> {
    simulate_with(cfg, initial, &member_driver(cfg.seed, member), tests)
}

/// All `cfg.ensemble` members in parallel; `initial(member)` supplies each start. Output is in member order.
pub fn simulate_ensemble(
    cfg: &SimConfig,
    initial: impl Fn(usize) -> Result<FourierField> + Sync,
    tests: &[TestFunction],
) -> Result<Vec<TrajectoryRecord>> {
    (0..cfg.ensemble).into_par_iter().map(|m| simulate(cfg, &initial(m)?, m, tests)).collect()
}
