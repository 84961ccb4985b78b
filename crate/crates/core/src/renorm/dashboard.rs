use serde::{Deserialize, Serialize};

use crate::besov::norm::{besov_norm_with, BesovIndex, Quadrature};
use crate::besov::partition::DyadicPartition;
use crate::error::Result;
use crate::renorm::constants::{mollifier_weight, TwoLoop};
use crate::renorm::trees::{resonant_renorm, TreeSet};
use crate::spectral::field::FourierField;
use crate::spectral::params::RegularityParams;

/// Time exponent of the Hölder entry.
pub const HOLDER_TIME: f64 = 0.125;

/// One norm of the dashboard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DashboardEntry {
    pub name: String,
    /// Spatial regularity index of the `𝓒^α` norm.
    pub alpha: f64,
    pub value: f64,
}

/// Names in emission order; `raw_` variants come from un-renormalized trees.
pub const ENTRY_NAMES: [&str; 7] =
    ["phi1", "wick2", "phi2", "res_phi2_phi1", "res_phi2_wick2", "res_k_wick2", "phi2_holder"];

fn holder(field: &FourierField, alpha: f64, quad: Quadrature) -> f64 {
    let p = DyadicPartition::new(field.dim(), field.cutoff());
    besov_norm_with(field, &BesovIndex::holder(alpha), &p, quad)
}

/// Sup-in-time `𝓒^α` norms of the trees and their resonant products.
///
/// `two_loop` supplies `C̃₁ + φ̃(t)`; pass `None` for raw trees (no subtraction).
/// `ρ_ε` (from the tree config) is applied to `K` and `Φ₂` before pairing.
pub fn tree_norm_report(
    trees: &TreeSet,
    params: &RegularityParams,
    two_loop: Option<&TwoLoop>,
    quad: Quadrature,
) -> Result<Vec<DashboardEntry>> {
    let k2 = 2.0 * params.kappa;
    let alphas = [-0.5 - k2, -1.0 - k2, 0.5 - k2, -k2, -0.5 - k2, -k2, 0.25 - k2];
    let mut sup = [0.0f64; 7];
    let smooth = |f: &FourierField| match trees.config.mollifier_eps {
        Some(eps) => f.with_multiplier(|k| mollifier_weight(eps, k)),
        None => f.clone(),
    };
    let coupling = trees.config.coupling;
    for (i, &t) in trees.times.iter().enumerate() {
        let ct = two_loop.map_or(0.0, |tl| tl.constant() + tl.phi(t));
        let phi1 = &trees.phi1[i];
        let w2 = &trees.wick2[i];
        let phi2 = &trees.phi2[i];
        // −Φ₂ = coupling·I(Φ₁^{⋄3}) carries the +3(C̃₁+φ̃)Φ₁ contraction
        let minus_phi2 = smooth(phi2).scaled(-1.0);
        let values = [
            holder(phi1, alphas[0], quad),
            holder(w2, alphas[1], quad),
            holder(phi2, alphas[2], quad),
            holder(&resonant_renorm(phi2, phi1, 0.0, 1.0, None)?, alphas[3], quad),
            holder(&resonant_renorm(&minus_phi2, w2, ct, 3.0 * coupling, Some(phi1))?, alphas[4], quad),
            holder(&resonant_renorm(&smooth(&trees.k[i]), w2, ct, 1.0, None)?, alphas[5], quad),
        ];
        for (s, v) in sup.iter_mut().zip(values) {
            *s = s.max(v);
        }
    }
    for i in 0..trees.times.len() {
        for j in i + 1..trees.times.len() {
            let dt = trees.times[j] - trees.times[i];
            let inc = trees.phi2[j].difference(&trees.phi2[i]);
            sup[6] = sup[6].max(holder(&inc, alphas[6], quad) / dt.powf(HOLDER_TIME));
        }
    }
    let prefix = if trees.config.renormalized { "" } else { "raw_" };
    Ok(ENTRY_NAMES
        .iter()
        .zip(alphas.iter().zip(sup))
        .map(|(n, (&alpha, value))| DashboardEntry { name: format!("{prefix}{n}"), alpha, value })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::driver::ModeDriver;
    use crate::renorm::trees::{build_trees, TreeConfig};
    use crate::renorm::wick::ProductRule;
    use crate::spectral::ops::Symbol;

    fn config(renormalized: bool) -> TreeConfig {
        TreeConfig {
            dim: 3,
            cutoff: 3,
            symbol: Symbol::Continuum,
            delta: 1e-3,
            steps: 10,
            stride: 5,
            rule: ProductRule::Galerkin,
            mollifier_eps: Some(1.0 / 3.0),
            wick_constant: 0.0,
            coupling: 1.0,
            mass: 0.0,
            mean_zero: true,
            renormalized,
        }
    }

    #[test]
    fn zero_trees_give_zero_entries() {
        let start = FourierField::zeros(3, 3, true);
        let mut cfg = config(true);
        cfg.steps = 0;
        let trees = build_trees(&cfg, &start, &ModeDriver::brownian(1), 0).unwrap();
        let report = tree_norm_report(&trees, &RegularityParams::default(), None, Quadrature::Nyquist).unwrap();
        assert_eq!(report.len(), 7);
        assert!(report.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn report_is_total() {
        let start = FourierField::cosine_pair(3, 3, &[1, 0, 0]);
        let tl = TwoLoop::mollified(3, 1.0 / 3.0, 3);
        for renorm in [true, false] {
            let trees = build_trees(&config(renorm), &start, &ModeDriver::brownian(2), 0).unwrap();
            let report = tree_norm_report(&trees, &RegularityParams::default(), Some(&tl), Quadrature::Nyquist).unwrap();
            assert!(report.iter().all(|e| e.value.is_finite() && e.value >= 0.0));
            assert_eq!(report[0].name.starts_with("raw_"), !renorm);
        }
    }
}
