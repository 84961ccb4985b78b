use serde::{Deserialize, Serialize};

use crate::dynamics::record::{TestTrack, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::stats::Estimate;

/// Path diagnostics of one test function, pooled over an ensemble of stationary trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub phi_id: String,
    pub reversed: bool,
    /// `|P_N φ|² T`.
    pub expected_qv: f64,
    /// Mean realized `QV(M^φ)` over `[0,T]`.
    pub qv_m: f64,
    pub qv_m_se: f64,
    /// Mean realized `QV(H^φ)` over `[0,T]`.
    pub qv_h: f64,
    /// Largest `|E⟨X_t,φ⟩² − E⟨X_0,φ⟩²|` in standard errors over the recorded steps.
    pub moment_drift_z: f64,
}

impl EnergyEntry {
    pub fn qv_m_relative_error(&self) -> f64 {
        if self.expected_qv == 0.0 {
            return self.qv_m.abs();
        }
        (self.qv_m / self.expected_qv - 1.0).abs()
    }

    pub fn qv_h_ratio(&self) -> f64 {
        if self.qv_m == 0.0 {
            return 0.0;
        }
        self.qv_h / self.qv_m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub delta: f64,
    pub horizon: f64,
    pub paths: usize,
    pub entries: Vec<EnergyEntry>,
}

impl EnergyReport {
    pub fn entry(&self, phi_id: &str, reversed: bool) -> Option<&EnergyEntry> {
        self.entries.iter().find(|e| e.phi_id == phi_id && e.reversed == reversed)
    }
}

fn summarize(tracks: &[&TestTrack], reversed: bool, steps: &[usize]) -> EnergyEntry {
    let owned: Vec<TestTrack> = tracks.iter().map(|t| if reversed { t.reversed() } else { (*t).clone() }).collect();
    let s = owned[0].steps();
    let horizon = s as f64 * owned[0].delta;
    let qv_m: Vec<f64> = owned.iter().map(|t| t.qv_martingale(s)).collect();
    let qv_h: Vec<f64> = owned.iter().map(|t| t.qv_drift(s)).collect();
    let sq_at = |j: usize| -> Estimate { Estimate::iid(&owned.iter().map(|t| t.pairing[j].powi(2)).collect::<Vec<_>>()) };
    let e0 = sq_at(0);
    let moment_drift_z = steps
        .iter()
        .map(|&j| {
            let d = sq_at(j).minus(&e0);
            if d.mean == 0.0 {
                0.0
            } else {
                d.mean.abs() / d.se
            }
        })
        .fold(0.0, f64::max);
    let qm = Estimate::iid(&qv_m);
    EnergyEntry {
        phi_id: owned[0].id.trim_end_matches("~rev").to_string(),
        reversed,
        expected_qv: owned[0].norm_sq * horizon,
        qv_m: qm.mean,
        qv_m_se: qm.se,
        qv_h: qv_h.iter().sum::<f64>() / qv_h.len() as f64,
        moment_drift_z,
    }
}

/// Martingale and drift quadratic variations, marginal-moment constancy, and the same
/// on the time-reversed paths, for every test function carried by the records.
///
/// Marginal moments of the two-time comparison use `⟨X_t, φ⟩²` at the recorded steps.
pub fn energy_solution_diagnostics(records: &[TrajectoryRecord]) -> Result<EnergyReport> {
    let first = records.first().ok_or_else(|| Error::InvalidParameter("no trajectories".into()))?;
    if records.iter().any(|r| r.tracks.len() != first.tracks.len() || r.delta != first.delta || r.steps != first.steps) {
        return Err(Error::InvalidParameter("trajectories differ in time grid or test functions".into()));
    }
    let mut entries = Vec::new();
    for i in 0..first.tracks.len() {
        let tracks: Vec<&TestTrack> = records.iter().map(|r| &r.tracks[i]).collect();
        for reversed in [false, true] {
            entries.push(summarize(&tracks, reversed, &first.steps));
        }
    }
    let horizon = first.steps.last().copied().unwrap_or(0) as f64 * first.delta;
    Ok(EnergyReport { delta: first.delta, horizon, paths: records.len(), entries })
}
