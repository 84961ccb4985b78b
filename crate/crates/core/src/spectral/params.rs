use serde::{Deserialize, Serialize};

/// Regularity exponents `(z, κ, γ)` of the solution theory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub z: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for RegularityParams {
    fn default() -> Self {
        Self { z: 0.55, kappa: 0.004, gamma: 0.10 }
    }
}

pub const Z_RANGE: &str = "z ∈ (1/2, 2/3)";
pub const Z_KAPPA: &str = "z−1/2 > 2κ";
pub const KAPPA_GAMMA: &str = "6κ < γ";
pub const BUDGET: &str = "10κ+3γ < 2−3z";

impl RegularityParams {
    pub fn new(z: f64, kappa: f64, gamma: f64) -> Self {
        Self { z, kappa, gamma }
    }

    /// Names of every violated inequality, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let Self { z, kappa, gamma } = *self;
        let mut out = Vec::new();
        for (name, v) in [("z > 0", z), ("κ > 0", kappa), ("γ > 0", gamma)] {
            if !(v > 0.0) || !v.is_finite() {
                out.push(name.to_string());
            }
        }
        if !(z > 0.5 && z < 2.0 / 3.0) {
            out.push(Z_RANGE.to_string());
        }
        if !(z - 0.5 > 2.0 * kappa) {
            out.push(Z_KAPPA.to_string());
        }
        if !(6.0 * kappa < gamma) {
            out.push(KAPPA_GAMMA.to_string());
        }
        if !(10.0 * kappa + 3.0 * gamma < 2.0 - 3.0 * z) {
            out.push(BUDGET.to_string());
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_triple_is_valid() {
        assert!(RegularityParams::new(0.55, 0.004, 0.10).is_valid());
    }

    #[test]
    fn budget_violation_is_named() {
        let v = RegularityParams::new(0.55, 0.01, 0.11).validate();
        assert_eq!(v, vec![BUDGET.to_string()]);
    }

    #[test]
    fn boundary_z_is_rejected() {
        let v = RegularityParams::new(0.5, 0.004, 0.10).validate();
        assert!(v.contains(&Z_RANGE.to_string()));
        assert!(v.contains(&Z_KAPPA.to_string()));
    }
}
