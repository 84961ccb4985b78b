use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::field::FourierField;
use crate::spectral::lattice::{ext, ext_inverse};
use crate::spectral::ops::polynomial_truncated;

/// Where sitewise nonlinearities are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProductRule {
    /// On the lattice `Λ_ε` of the field's own cutoff, then `Ext` (aliasing included, as in `Q_N`).
    Lattice,
    /// Exactly on an oversampled grid, then `P_N` (Galerkin truncation).
    #[default]
    Galerkin,
}

/// Hermite-renormalized power: `x² − c` or `x³ − 3cx`.
pub fn wick_scalar(x: f64, n: u32, c: f64) -> Result<f64> {
    match n {
        2 => Ok(x * x - c),
        3 => Ok(x * x * x - 3.0 * c * x),
        _ => Err(Error::InvalidParameter(format!("Wick power must be 2 or 3, got {n}"))),
    }
}

/// Sitewise Wick power of `x` with variance constant `c`, returned on the box of `x`.
pub fn wick_power(x: &FourierField, n: u32, c: f64, rule: ProductRule) -> Result<FourierField> {
    wick_scalar(0.0, n, c)?;
    let f = |v: f64| wick_scalar(v, n, c).expect("degree checked");
    Ok(sitewise(x, n as usize, rule, f))
}

/// Plain power `xⁿ` with the same product rule (the un-renormalized counterpart).
pub fn plain_power(x: &FourierField, n: u32, rule: ProductRule) -> FourierField {
    sitewise(x, n as usize, rule, |v| v.powi(n as i32))
}

fn sitewise(x: &FourierField, degree: usize, rule: ProductRule, f: impl Fn(f64) -> f64) -> FourierField {
    match rule {
        ProductRule::Lattice => {
            let mut lat = ext_inverse(x, x.cutoff());
            for v in lat.values_mut() {
                *v = f(*v);
            }
            ext(&lat)
        }
        ProductRule::Galerkin => polynomial_truncated(x, degree, x.cutoff(), f),
    }
}
