use serde::{Deserialize, Serialize};

use crate::besov::norm::{besov_norm, BesovIndex};
use crate::dynamics::config::SimConfig;
use crate::dynamics::record::{member_driver, simulate_with, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::renorm::trees::{TreeConfig, TreeSet};
use crate::spectral::field::{box_frequencies, sup_norm, FourierField};

/// Tree construction matching the linear part, constants and noise of `cfg`.
pub fn tree_config_for(cfg: &SimConfig, renormalized: bool) -> TreeConfig {
    TreeConfig {
        dim: cfg.dim,
        cutoff: cfg.n,
        symbol: cfg.symbol(),
        delta: cfg.delta,
        steps: cfg.steps(),
        stride: cfg.stride,
        rule: cfg.rule(),
        mollifier_eps: cfg.noise_mollifier(),
        wick_constant: cfg.constants().c0,
        coupling: cfg.coupling,
        mass: cfg.mass,
        mean_zero: cfg.mean_zero,
        renormalized,
    }
}

/// `Φ₃ = Φ − Φ₁ − Φ₂` at every recorded time.
///
/// Both inputs must come from the same Brownian driver started at step 0 on the same time grid.
pub fn extract_remainder(record: &TrajectoryRecord, trees: &TreeSet) -> Result<Vec<FourierField>> {
    if record.driver_seed != trees.driver_seed || trees.first_step != 0 {
        return Err(Error::DriverMismatch(format!(
            "trajectory seed {:#x}, trees seed {:#x} from step {}",
            record.driver_seed, trees.driver_seed, trees.first_step
        )));
    }
    let same_grid = record.times.len() == trees.times.len()
        && record.times.iter().zip(&trees.times).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    if !same_grid {
        return Err(Error::DriverMismatch("recorded time grids differ".into()));
    }
    let mut out = Vec::with_capacity(record.times.len());
    for (i, snap) in record.snapshots.iter().enumerate() {
        if trees.phi1[i].cutoff() != snap.cutoff() {
            return Err(Error::SizeMismatch {
                expected: format!("cutoff {}", snap.cutoff()),
                found: format!("cutoff {}", trees.phi1[i].cutoff()),
            });
        }
        let mut r = snap.clone();
        r.add_scaled(-1.0, &trees.phi1[i]);
        r.add_scaled(-1.0, &trees.phi2[i]);
        out.push(r);
    }
    Ok(out)
}

/// Distances between a coarse and a fine solution on shared Brownian modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub times: Vec<f64>,
    /// `‖X_fine − X_coarse‖_{B^{-z}_{∞,∞}}`.
    pub besov: Vec<f64>,
    /// `‖X_fine − X_coarse‖²_{L²}`.
    pub l2_sq: Vec<f64>,
}

impl DistanceCurve {
    pub fn sup(&self) -> f64 {
        self.besov.iter().fold(0.0, |m, v| m.max(*v))
    }
}

fn nested(coarse: &SimConfig, fine: &SimConfig) -> Result<()> {
    let mut bad = Vec::new();
    if fine.n < coarse.n {
        bad.push("fine cutoff below coarse cutoff");
    }
    if fine.dim != coarse.dim {
        bad.push("dimension");
    }
    if fine.delta != coarse.delta || fine.horizon != coarse.horizon || fine.stride != coarse.stride {
        bad.push("time grid");
    }
    if fine.seed != coarse.seed {
        bad.push("seed");
    }
    if fine.variant != coarse.variant || fine.mean_zero != coarse.mean_zero || fine.noise != coarse.noise {
        bad.push("equation");
    }
    if fine.mass != coarse.mass || fine.coupling != coarse.coupling {
        bad.push("mass or coupling");
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("configurations are not nested: {}", bad.join(", "))))
    }
}

/// Runs member `member` at both cutoffs from `initial` and measures their distance in `B^{-z}_{∞,∞}`,
/// `z` taken from the coarse configuration. The coarse path is included into the fine box by zero padding.
pub fn refinement_distance(coarse: &SimConfig, fine: &SimConfig, initial: &FourierField, member: usize) -> Result<DistanceCurve> {
    Ok(ladder_distances(&[coarse.clone(), fine.clone()], initial, member)?.remove(0))
}

/// Distances between consecutive levels of a cutoff ladder, every level simulated once on the
/// Brownian driver of `member`. Entry `i` compares `levels[i]` with `levels[i + 1]` in `B^{-z}_{∞,∞}`,
/// `z` from `levels[i]`.
pub fn ladder_distances(levels: &[SimConfig], initial: &FourierField, member: usize) -> Result<Vec<DistanceCurve>> {
    if levels.len() < 2 {
        return Err(Error::InvalidParameter("a refinement ladder needs two levels".into()));
    }
    for w in levels.windows(2) {
        nested(&w[0], &w[1])?;
    }
    let driver = member_driver(levels[0].seed, member);
    let records: Vec<TrajectoryRecord> =
        levels.iter().map(|c| simulate_with(c, &initial.resized(c.n), &driver, &[])).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (w, c) in records.windows(2).zip(levels) {
        let (a, b) = (&w[0], &w[1]);
        let fine_n = b.final_state().cutoff();
        let index = BesovIndex::holder(-c.params.z);
        let mut curve = DistanceCurve { times: a.times.clone(), besov: vec![], l2_sq: vec![] };
        for (xa, xb) in a.snapshots.iter().zip(&b.snapshots) {
            let diff = xb.difference(&xa.resized(fine_n));
            curve.besov.push(besov_norm(&diff, &index));
            curve.l2_sq.push(diff.inner(&diff));
        }
        out.push(curve);
    }
    Ok(out)
}

/// `E‖X_fine − X_coarse‖²_{L²}` at time `t` for the linear equation from zero data:
/// the sum over modes `N < |k|_∞ ≤ N′` of `(1 − e^{-2μt})/(2μ)`, `μ = π²|k|² + m`.
pub fn linear_tail_l2_mean(dim: usize, n: usize, n_fine: usize, mass: f64, t: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    box_frequencies(dim, n_fine)
        .iter()
        .filter(|k| sup_norm(k) as usize > n)
        .map(|k| {
            let mu = pi2 * k.iter().map(|&c| (c * c) as f64).sum::<f64>() + mass;
            -(-2.0 * mu * t).exp_m1() / (2.0 * mu)
        })
        .sum()
}
