use crate::error::{Error, Result};
use crate::smooth::plateau;
use crate::spectral::field::{norm_sq, FourierField, KVec};

/// Plateau radius: `χ ≡ 1` on `|z| <= INNER`.
pub const INNER: f64 = 0.75;
/// Support radius of `χ`; `θ(z) = χ(z/2) − χ(z)` lives in `INNER <= |z| <= 2·OUTER`.
pub const OUTER: f64 = 4.0 / 3.0;

/// Smooth dyadic partition of unity `χ + Σ_{j>=0} θ(2^{-j}·) = 1` on integer frequencies.
///
/// The radial profile is evaluated at the Euclidean length `|k|`.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    dim: usize,
    cutoff: usize,
    j_max: i32,
}

impl DyadicPartition {
    /// Partition covering every frequency of the box `|k|_inf <= cutoff`.
    pub fn new(dim: usize, cutoff: usize) -> Self {
        let cutoff = cutoff.max(1);
        let k_max = (dim as f64).sqrt() * cutoff as f64;
        // smallest j with 2^{j+1}·INNER >= |k|_max: blocks beyond j vanish on the box
        let mut j = -1i32;
        while 2f64.powi(j + 1) * INNER < k_max {
            j += 1;
        }
        Self { dim, cutoff, j_max: j }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Identifier recorded next to every norm value.
    pub fn id(&self) -> String {
        format!("plateau-r{INNER:.4}-R{OUTER:.4}-jmax{}", self.j_max)
    }

    fn chi_radius(r: f64) -> f64 {
        plateau(r, INNER, OUTER)
    }

    pub fn chi(k: &KVec) -> f64 {
        Self::chi_radius(norm_sq(k).sqrt())
    }

    pub fn theta(k: &KVec) -> f64 {
        Self::weight_radius(0, norm_sq(k).sqrt())
    }

    fn weight_radius(j: i32, r: f64) -> f64 {
        if j < 0 {
            return Self::chi_radius(r);
        }
        let s = 2f64.powi(j);
        Self::chi_radius(r / (2.0 * s)) - Self::chi_radius(r / s)
    }

    /// Multiplier of block `j` (`χ` for `j = -1`, `θ(2^{-j}·)` otherwise).
    pub fn weight(j: i32, k: &KVec) -> f64 {
        Self::weight_radius(j, norm_sq(k).sqrt())
    }

    pub fn check_block(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(())
    }

    /// `Δ_j u`.
    pub fn block(&self, field: &FourierField, j: i32) -> Result<FourierField> {
        self.check_block(j)?;
        Ok(field.with_multiplier(|k| Self::weight(j, k)))
    }

    /// All blocks `Δ_{-1} u, …, Δ_{j_max} u`.
    pub fn blocks(&self, field: &FourierField) -> Vec<FourierField> {
        (-1..=self.j_max).map(|j| self.block(field, j).unwrap()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::box_frequencies;

    #[test]
    fn origin_is_low_block() {
        let k = [0, 0, 0];
        assert_eq!(DyadicPartition::weight(-1, &k), 1.0);
        for j in 0..8 {
            assert_eq!(DyadicPartition::weight(j, &k), 0.0);
        }
    }

    #[test]
    fn partition_of_unity_on_box() {
        for (dim, cutoff) in [(2, 20), (3, 12)] {
            let p = DyadicPartition::new(dim, cutoff);
            for k in box_frequencies(dim, cutoff) {
                let s: f64 = (-1..=p.j_max()).map(|j| DyadicPartition::weight(j, &k)).sum();
                assert!((s - 1.0).abs() < 1e-12, "k = {k:?}, sum = {s}");
                assert_eq!(DyadicPartition::weight(p.j_max() + 1, &k), 0.0);
            }
        }
    }

    #[test]
    fn supports_are_almost_disjoint() {
        let p = DyadicPartition::new(3, 10);
        for k in box_frequencies(3, 10) {
            for i in -1..=p.j_max() {
                for j in -1..=p.j_max() {
                    let both = DyadicPartition::weight(i, &k) * DyadicPartition::weight(j, &k);
                    if (i - j).abs() > 1 || (i == -1 && j >= 1) {
                        assert_eq!(both, 0.0, "blocks {i},{j} overlap at {k:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn dyadic_shell_touches_three_blocks_at_most() {
        for j in 1..5 {
            let k = [1i64 << j, 0, 0];
            let active: Vec<i32> = (-1..8).filter(|&i| DyadicPartition::weight(i, &k) != 0.0).collect();
            assert!(active.iter().all(|i| (i - j).abs() <= 1), "{active:?}");
        }
    }
}
