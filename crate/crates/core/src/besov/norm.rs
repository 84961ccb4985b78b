use serde::{Deserialize, Serialize};

use crate::besov::partition::{DyadicPartition, OUTER};
use crate::fft::fast_len;
use crate::spectral::field::FourierField;
use crate::spectral::ops::torus_lp_norm_on_grid;

/// Indices `(α, p, q)` of `B^α_{p,q}`; `f64::INFINITY` encodes `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovIndex {
    pub fn new(alpha: f64, p: f64, q: f64) -> Self {
        assert!(p >= 1.0 && q >= 1.0, "Besov exponents must be >= 1");
        Self { alpha, p, q }
    }

    /// `𝓒^α = B^α_{∞,∞}`.
    pub fn holder(alpha: f64) -> Self {
        Self::new(alpha, f64::INFINITY, f64::INFINITY)
    }
}

/// How finely block `L^p` norms are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Quadrature {
    /// Grid of at least `4M+2` points per axis for a block of band `M`: exact for `p ∈ {2, 4}`.
    #[default]
    Oversampled,
    /// Grid of `2M+1` points per axis: exact for `p = 2` only; cheaper sup-norm estimate.
    Nyquist,
}

impl Quadrature {
    pub fn grid_len(&self, band: usize) -> usize {
        match self {
            Quadrature::Oversampled => fast_len(4 * band + 2),
            Quadrature::Nyquist => fast_len(2 * band + 1),
        }
    }
}

/// Largest `|k|_inf` that block `j` can charge.
pub fn block_band(j: i32, cutoff: usize) -> usize {
    let r = if j < 0 { OUTER } else { 2f64.powi(j + 1) * OUTER };
    (r.floor() as usize).min(cutoff)
}

/// `‖Δ_j u‖_{L^p}` for `j = -1..=j_max`, each block sampled on a grid matched to its band.
pub fn block_lp_norms(field: &FourierField, partition: &DyadicPartition, p: f64, quad: Quadrature) -> Vec<f64> {
    let dim = field.dim();
    let js: Vec<i32> = (-1..=partition.j_max()).collect();
    let mut out = vec![0.0; js.len()];
    // pair consecutive blocks into one complex transform
    let mut i = 0;
    while i < js.len() {
        let j0 = js[i];
        let b0 = block_band(j0, field.cutoff());
        let block0 = field.resized(b0).with_multiplier(|k| DyadicPartition::weight(j0, k));
        if i + 1 < js.len() {
            let j1 = js[i + 1];
            let b1 = block_band(j1, field.cutoff());
            let block1 = field.resized(b1).with_multiplier(|k| DyadicPartition::weight(j1, k));
            let len = quad.grid_len(b0.max(b1));
            let (g0, g1) = FourierField::to_grid_pair(&block0, &block1, len);
            out[i] = torus_lp_norm_on_grid(&g0, dim, p);
            out[i + 1] = torus_lp_norm_on_grid(&g1, dim, p);
            i += 2;
        } else {
            let g0 = block0.to_grid(quad.grid_len(b0));
            out[i] = torus_lp_norm_on_grid(&g0, dim, p);
            i += 1;
        }
    }
    out
}

/// Combines block norms `n_j` (indexed from `j = -1`) into `(Σ_j (2^{jα} n_j)^q)^{1/q}`.
pub fn combine_blocks(block_norms: &[f64], alpha: f64, q: f64) -> f64 {
    let weighted = block_norms.iter().enumerate().map(|(i, n)| 2f64.powf((i as f64 - 1.0) * alpha) * n);
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|w| w.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

pub fn besov_norm_with(field: &FourierField, index: &BesovIndex, partition: &DyadicPartition, quad: Quadrature) -> f64 {
    combine_blocks(&block_lp_norms(field, partition, index.p, quad), index.alpha, index.q)
}

/// `‖u‖_{B^α_{p,q}}` with the partition sized to the field's box.
pub fn besov_norm(field: &FourierField, index: &BesovIndex) -> f64 {
    let partition = DyadicPartition::new(field.dim(), field.cutoff());
    besov_norm_with(field, index, &partition, Quadrature::default())
}
