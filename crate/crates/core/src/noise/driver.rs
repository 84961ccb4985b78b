use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::field::{box_frequencies, FourierField, KVec};

/// Purpose tags separating the generator families derived from one seed.
pub mod tag {
    pub const BROWNIAN: u64 = 0x4252_4f57;
    pub const INITIAL: u64 = 0x494e_4954;
    pub const CHAIN: u64 = 0x4348_4149;
    pub const ENSEMBLE: u64 = 0x454e_5345;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed splitting rule: `child = mix64(parent ^ mix64(label))`, applied along `path`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &label| mix64(s ^ mix64(label)))
}

/// Canonical representative of the unordered pair `{k, -k}`: first nonzero coordinate positive.
pub fn canonical(k: &KVec) -> KVec {
    match k.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => [-k[0], -k[1], -k[2]],
        _ => *k,
    }
}

/// Stream id of a canonical frequency; independent of any cutoff.
pub fn mode_key(k: &KVec) -> u64 {
    const OFF: i64 = 1 << 20;
    k.iter().fold(0u64, |acc, &c| (acc << 21) | ((c + OFF) as u64 & 0x1f_ffff))
}

/// Canonical frequencies of the box in storage order (zero first when included).
pub fn canonical_modes(dim: usize, cutoff: usize, include_zero: bool) -> Vec<KVec> {
    let ks = box_frequencies(dim, cutoff);
    let half = ks.len() / 2;
    let mut out = Vec::with_capacity(half + 1);
    if include_zero {
        out.push([0; 3]);
    }
    out.extend_from_slice(&ks[half + 1..]);
    out
}

const WORDS_PER_STEP: u128 = 4;

/// Counter-based Gaussian source keyed by `(seed, tag, k, step)`.
///
/// Every mode pair owns a ChaCha8 stream (stream id = `mode_key(k)`); step `s` reads
/// words `[4s, 4s+4)`, so any subset of modes or steps is reproducible in isolation.
#[derive(Clone, Debug)]
pub struct ModeDriver {
    seed: u64,
    tag: u64,
}

impl ModeDriver {
    pub fn new(seed: u64, tag: u64) -> Self {
        Self { seed, tag }
    }

    pub fn brownian(seed: u64) -> Self {
        Self::new(seed, tag::BROWNIAN)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    fn rng_for(&self, k: &KVec, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[self.tag]));
        rng.set_stream(mode_key(k));
        rng.set_word_pos(WORDS_PER_STEP * step as u128);
        rng
    }

    /// Two independent standard normals for mode `k` at `step`.
    pub fn normal_pair(&self, k: &KVec, step: u64) -> (f64, f64) {
        box_muller(&mut self.rng_for(&canonical(k), step))
    }

    /// Sequential streams for all canonical modes of a box, positioned at `step`.
    pub fn streams(&self, dim: usize, cutoff: usize, include_zero: bool, step: u64) -> ModeStreams {
        let modes = canonical_modes(dim, cutoff, include_zero);
        let rngs = modes.iter().map(|k| self.rng_for(k, step)).collect();
        ModeStreams { dim, cutoff, include_zero, modes, rngs }
    }

    /// Unit increment field `ζ` at `step`: `E|ζ_k|² = 1` per complex pair, `ζ_0` real `N(0,1)`.
    pub fn unit_field(&self, dim: usize, cutoff: usize, include_zero: bool, step: u64) -> FourierField {
        let mut s = self.streams(dim, cutoff, include_zero, step);
        let mut out = FourierField::zeros(dim, cutoff, !include_zero);
        s.fill_next(&mut out);
        out
    }
}

fn box_muller(rng: &mut impl RngCore) -> (f64, f64) {
    // u1 ∈ (0, 1] keeps the logarithm finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
    (r * c, r * s)
}

/// Per-mode generators advanced one step per call.
#[derive(Clone, Debug)]
pub struct ModeStreams {
    dim: usize,
    cutoff: usize,
    include_zero: bool,
    modes: Vec<KVec>,
    rngs: Vec<ChaCha8Rng>,
}

impl ModeStreams {
    pub fn modes(&self) -> &[KVec] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Writes the next unit increment into `out` (box of the same cutoff).
    ///
    /// A pair `{k,-k}` receives `(z₁ − i z₂)/√2`, the zero mode receives `z₁`.
    pub fn fill_next(&mut self, out: &mut FourierField) {
        assert_eq!((out.dim(), out.cutoff()), (self.dim, self.cutoff), "stream/field box mismatch");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (k, rng) in self.modes.iter().zip(self.rngs.iter_mut()) {
            let (z1, z2) = box_muller(rng);
            if *k == [0; 3] {
                out.set(k, Complex64::new(z1, 0.0));
            } else {
                out.set_pair(k, Complex64::new(z1 * h, -z2 * h));
            }
        }
        if !self.include_zero {
            out.set(&[0; 3], Complex64::new(0.0, 0.0));
        }
    }
}

/// Brownian increment of `W_N` over a step of length `δ`: per-real-mode variance `δ`.
pub fn brownian_increment(driver: &ModeDriver, dim: usize, cutoff: usize, include_zero: bool, step: u64, delta: f64) -> FourierField {
    driver.unit_field(dim, cutoff, include_zero, step).scaled(delta.sqrt())
}
