use crate::error::{Error, Result};
use crate::noise::driver::{ModeDriver, ModeStreams};
use crate::spectral::field::FourierField;
use crate::spectral::ops::Symbol;

/// `(1 − e^{-r δ}) / r`, continuous at `r = 0`.
pub fn phi1(rate: f64, delta: f64) -> f64 {
    if rate.abs() * delta < 1e-12 {
        return delta * (1.0 - 0.5 * rate * delta);
    }
    -(-rate * delta).exp_m1() / rate
}

/// Variance `(1 − e^{-2 r δ}) / (2 r)` of the exact stochastic-convolution increment.
pub fn ou_noise_variance(rate: f64, delta: f64) -> f64 {
    phi1(2.0 * rate, delta)
}

/// A realization of the linear (Ornstein–Uhlenbeck) part at one time.
#[derive(Clone, Debug)]
pub struct OUState {
    pub field: FourierField,
    pub time: f64,
    pub symbol: Symbol,
    pub mass: f64,
}

impl OUState {
    /// Per-mode relaxation rate `λ_k + m`.
    pub fn rates(&self) -> Vec<f64> {
        mode_rates(&self.field, self.symbol, self.mass)
    }
}

pub fn mode_rates(template: &FourierField, symbol: Symbol, mass: f64) -> Vec<f64> {
    template.frequencies().iter().map(|k| symbol.eval(k) + mass).collect()
}

/// Exact draw from the stationary law: each real mode `N(0, 1/(2(λ_k+m)))`.
///
/// `sample` indexes independent draws from the same driver.
pub fn ou_stationary_sample(
    driver: &ModeDriver,
    dim: usize,
    cutoff: usize,
    symbol: Symbol,
    mass: f64,
    mean_zero: bool,
    sample: u64,
) -> Result<OUState> {
    let mut field = driver.unit_field(dim, cutoff, !mean_zero, sample);
    let rates = mode_rates(&field, symbol, mass);
    for (i, (c, r)) in field.coeffs_mut().iter_mut().zip(&rates).enumerate() {
        if c.norm() == 0.0 && *r == 0.0 {
            continue;
        }
        if !(*r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stationary law needs λ_k + m > 0; mode index {i} has rate {r}"
            )));
        }
        *c *= (0.5 / r).sqrt();
    }
    Ok(OUState { field, time: 0.0, symbol, mass })
}

/// `X_k(t+δ) = e^{-(λ_k+m)δ} X_k(t) + η_k` with the exact Gaussian `η_k`.
pub fn ou_transition_step(state: &OUState, delta: f64, streams: &mut ModeStreams) -> OUState {
    let mut unit = FourierField::zeros(state.field.dim(), state.field.cutoff(), state.field.mean_zero());
    streams.fill_next(&mut unit);
    let rates = state.rates();
    let mut next = state.field.clone();
    for ((x, z), r) in next.coeffs_mut().iter_mut().zip(unit.coeffs()).zip(&rates) {
        *x = *x * (-r * delta).exp() + z * ou_noise_variance(*r, delta).sqrt();
    }
    OUState { field: next, time: state.time + delta, symbol: state.symbol, mass: state.mass }
}

/// Stochastic-convolution increment for rates `rates` from the unit increment `unit`.
pub fn stochastic_convolution_increment(unit: &FourierField, rates: &[f64], delta: f64) -> FourierField {
    let mut out = unit.clone();
    for (c, r) in out.coeffs_mut().iter_mut().zip(rates) {
        *c *= ou_noise_variance(*r, delta).sqrt();
    }
    out
}
