use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::fft_nd;

/// Integer frequency. Coordinates beyond `dim` are zero.
pub type KVec = [i64; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Frequencies of the box `|k|_inf <= cutoff` in storage order.
pub fn box_frequencies(dim: usize, cutoff: usize) -> Vec<KVec> {
    let m = cutoff as i64;
    let side = 2 * cutoff + 1;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut k = [0i64; 3];
        for a in (0..dim).rev() {
            k[a] = (i % side) as i64 - m;
            i /= side;
        }
        out.push(k);
    }
    out
}

pub fn sup_norm(k: &KVec) -> i64 {
    k.iter().map(|c| c.abs()).max().unwrap_or(0)
}

pub fn norm_sq(k: &KVec) -> f64 {
    k.iter().map(|&c| (c * c) as f64).sum()
}

pub fn negate(k: &KVec) -> KVec {
    [-k[0], -k[1], -k[2]]
}

/// Real trigonometric polynomial stored as Fourier coefficients on a dense box.
///
/// Basis `e_k(x) = 2^{-d/2} exp(iπ k·x)` on `[-1,1]^d`, so the family is orthonormal
/// in `L²` of the torus. Coefficients satisfy `c(-k) = conj c(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    dim: usize,
    cutoff: usize,
    mean_zero: bool,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(dim: usize, cutoff: usize, mean_zero: bool) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        let side = 2 * cutoff + 1;
        Self { dim, cutoff, mean_zero, coeffs: vec![ZERO; side.pow(dim as u32)] }
    }

    /// Builds a field from a coefficient function; the result is symmetrized.
    pub fn from_fn(dim: usize, cutoff: usize, mean_zero: bool, f: impl Fn(&KVec) -> Complex64) -> Self {
        let mut out = Self::zeros(dim, cutoff, mean_zero);
        for (c, k) in out.coeffs.iter_mut().zip(box_frequencies(dim, cutoff)) {
            *c = f(&k);
        }
        out.symmetrize();
        out
    }

    /// Wraps raw coefficients in storage order without symmetrizing.
    pub fn from_coeffs(dim: usize, cutoff: usize, mean_zero: bool, coeffs: Vec<Complex64>) -> Result<Self> {
        let side = 2 * cutoff + 1;
        let expected = side.pow(dim as u32);
        if coeffs.len() != expected || !(dim == 2 || dim == 3) {
            return Err(Error::SizeMismatch {
                expected: format!("{expected} coefficients (dim {dim}, cutoff {cutoff})"),
                found: format!("{}", coeffs.len()),
            });
        }
        Ok(Self { dim, cutoff, mean_zero, coeffs })
    }

    /// `e_k + e_{-k}` (or `e_0` for `k = 0`).
    pub fn cosine_pair(dim: usize, cutoff: usize, k: &KVec) -> Self {
        let mut f = Self::zeros(dim, cutoff, false);
        f.set_pair(k, Complex64::new(1.0, 0.0));
        if *k == [0; 3] {
            f.set(k, Complex64::new(1.0, 0.0));
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mean_zero(&self) -> bool {
        self.mean_zero
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn frequencies(&self) -> Vec<KVec> {
        box_frequencies(self.dim, self.cutoff)
    }

    pub fn index(&self, k: &KVec) -> Option<usize> {
        let m = self.cutoff as i64;
        let side = 2 * m + 1;
        let mut idx = 0i64;
        for a in 0..3 {
            if a >= self.dim {
                if k[a] != 0 {
                    return None;
                }
                continue;
            }
            if k[a].abs() > m {
                return None;
            }
            idx = idx * side + k[a] + m;
        }
        Some(idx as usize)
    }

    /// Coefficient at `k`; zero outside the box.
    pub fn get(&self, k: &KVec) -> Complex64 {
        self.index(k).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &KVec, v: Complex64) {
        let i = self.index(k).expect("frequency outside box");
        self.coeffs[i] = v;
    }

    /// Sets `c(k) = v` and `c(-k) = conj v`.
    pub fn set_pair(&mut self, k: &KVec, v: Complex64) {
        self.set(k, v);
        self.set(&negate(k), v.conj());
    }

    pub fn set_mean_zero(&mut self, on: bool) {
        self.mean_zero = on;
        if on {
            let mid = self.coeffs.len() / 2;
            self.coeffs[mid] = ZERO;
        }
    }

    /// Largest `|c(-k) - conj c(k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.coeffs.len();
        // storage is point-symmetric: index of -k is n-1-i
        (0..n).map(|i| (self.coeffs[n - 1 - i] - self.coeffs[i].conj()).norm()).fold(0.0, f64::max)
    }

    /// Projects onto the Hermitian subspace; also clears the zero mode when mean-zero.
    pub fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        for i in 0..=n / 2 {
            let j = n - 1 - i;
            let v = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
            self.coeffs[i] = v;
            self.coeffs[j] = v.conj();
        }
        if self.mean_zero {
            self.coeffs[n / 2] = ZERO;
        }
    }

    /// Embeds into (or truncates to) the box of side `2 cutoff + 1`.
    pub fn resized(&self, cutoff: usize) -> Self {
        if cutoff == self.cutoff {
            return self.clone();
        }
        let mut out = Self::zeros(self.dim, cutoff, self.mean_zero);
        let keep = cutoff.min(self.cutoff);
        for k in box_frequencies(self.dim, keep) {
            out.set(&k, self.get(&k));
        }
        out
    }

    /// Largest `|k|_inf` carrying a coefficient above `tol`.
    pub fn support_radius(&self, tol: f64) -> usize {
        self.frequencies()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, _)| sup_norm(k) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`; `other` must fit inside this box.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if other.cutoff == self.cutoff {
            for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *c += o * a;
            }
            return;
        }
        assert!(other.cutoff <= self.cutoff, "add_scaled: operand exceeds box");
        for k in other.frequencies() {
            let i = self.index(&k).unwrap();
            self.coeffs[i] += other.get(&k) * a;
        }
    }

    /// `self - other` on the larger of the two boxes.
    pub fn difference(&self, other: &Self) -> Self {
        let m = self.cutoff.max(other.cutoff);
        let mut out = self.resized(m);
        out.mean_zero = self.mean_zero && other.mean_zero;
        out.add_scaled(-1.0, other);
        out
    }

    /// Real `L²` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if self.cutoff == other.cutoff {
            return self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        }
        let (small, large) = if self.cutoff < other.cutoff { (self, other) } else { (other, self) };
        small
            .frequencies()
            .iter()
            .zip(&small.coeffs)
            .map(|(k, a)| (a * large.get(k).conj()).re)
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Multiplies each coefficient by a real symbol.
    pub fn apply_multiplier(&mut self, symbol: impl Fn(&KVec) -> f64) {
        for (c, k) in self.coeffs.iter_mut().zip(box_frequencies(self.dim, self.cutoff)) {
            *c *= symbol(&k);
        }
    }

    pub fn with_multiplier(&self, symbol: impl Fn(&KVec) -> f64) -> Self {
        let mut out = self.clone();
        out.apply_multiplier(symbol);
        out
    }

    /// Direct evaluation at a point of `[-1,1]^d`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let norm = 2f64.powf(-(self.dim as f64) / 2.0);
        self.frequencies()
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| {
                let phase: f64 = (0..self.dim).map(|a| k[a] as f64 * x[a]).sum::<f64>() * std::f64::consts::PI;
                (c * Complex64::from_polar(norm, phase)).re
            })
            .sum()
    }

    /// Samples the field at `x_p = 2p/len`, `p ∈ {0..len-1}^d`. Requires `len > 2 cutoff`.
    pub fn to_grid(&self, len: usize) -> Vec<f64> {
        let mut buf = self.spread(len, None);
        fft_nd(&mut buf, self.dim, len, FftDirection::Inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Samples two fields with one complex transform.
    pub fn to_grid_pair(a: &Self, b: &Self, len: usize) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(a.dim, b.dim, "dimension mismatch");
        let mut buf = a.spread(len, Some(b));
        fft_nd(&mut buf, a.dim, len, FftDirection::Inverse);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    fn spread(&self, len: usize, imag: Option<&Self>) -> Vec<Complex64> {
        assert!(len > 2 * self.cutoff, "grid of size {len} cannot resolve cutoff {}", self.cutoff);
        if let Some(b) = imag {
            assert!(len > 2 * b.cutoff, "grid of size {len} cannot resolve cutoff {}", b.cutoff);
        }
        let dim = self.dim;
        let norm = 2f64.powf(-(dim as f64) / 2.0);
        let mut buf = vec![ZERO; len.pow(dim as u32)];
        let pos = |k: &KVec| -> usize {
            (0..dim).fold(0usize, |acc, a| acc * len + k[a].rem_euclid(len as i64) as usize)
        };
        for (k, c) in self.frequencies().iter().zip(&self.coeffs) {
            buf[pos(k)] += c * norm;
        }
        if let Some(b) = imag {
            let i = Complex64::new(0.0, 1.0);
            for (k, c) in b.frequencies().iter().zip(&b.coeffs) {
                buf[pos(k)] += c * i * norm;
            }
        }
        buf
    }

    /// Coefficients `|k|_inf <= cutoff` of the trigonometric interpolant of grid samples.
    ///
    /// Exact whenever the sampled function has no frequency aliasing onto the box.
    pub fn from_grid(dim: usize, len: usize, values: &[f64], cutoff: usize, mean_zero: bool) -> Result<Self> {
        let total = len.pow(dim as u32);
        if values.len() != total {
            return Err(Error::SizeMismatch { expected: format!("{total} samples"), found: format!("{}", values.len()) });
        }
        if 2 * cutoff >= len {
            return Err(Error::Headroom { need: 2 * cutoff + 1, have: len });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, dim, len, FftDirection::Forward);
        let w = (2.0 / len as f64).powi(dim as i32) * 2f64.powf(-(dim as f64) / 2.0);
        let mut out = Self::zeros(dim, cutoff, mean_zero);
        for (c, k) in out.coeffs.iter_mut().zip(box_frequencies(dim, cutoff)) {
            let p = (0..dim).fold(0usize, |acc, a| acc * len + k[a].rem_euclid(len as i64) as usize);
            *c = buf[p] * w;
        }
        out.symmetrize();
        Ok(out)
    }
}

/// Grid coordinate `2p/len` mapped to `[-1, 1)`.
pub fn grid_coordinate(p: usize, len: usize) -> f64 {
    let x = 2.0 * p as f64 / len as f64;
    if x >= 1.0 {
        x - 2.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize, cutoff: usize, seed: u64) -> FourierField {
        FourierField::from_fn(dim, cutoff, false, |k| {
            let h = (k[0] * 31 + k[1] * 17 + k[2] * 7 + seed as i64) as f64;
            Complex64::new((h * 0.731).sin(), (h * 1.37).cos())
        })
    }

    #[test]
    fn storage_is_point_symmetric() {
        let f = FourierField::zeros(3, 2, false);
        let ks = f.frequencies();
        let n = ks.len();
        for (i, k) in ks.iter().enumerate() {
            assert_eq!(ks[n - 1 - i], negate(k));
            assert_eq!(f.index(k), Some(i));
        }
    }

    #[test]
    fn grid_round_trip() {
        for dim in [2, 3] {
            let f = sample(dim, 3, 1);
            assert!(f.hermitian_defect() < 1e-15);
            for len in [7, 9, 16] {
                let g = f.to_grid(len);
                let back = FourierField::from_grid(dim, len, &g, 3, false).unwrap();
                assert!(back.difference(&f).max_abs_coeff() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_matches_direct_evaluation() {
        let f = sample(2, 2, 5);
        let len = 6;
        let g = f.to_grid(len);
        for p0 in 0..len {
            for p1 in 0..len {
                let x = [grid_coordinate(p0, len), grid_coordinate(p1, len)];
                assert!((g[p0 * len + p1] - f.evaluate(&x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pair_sampling_matches_single() {
        let a = sample(3, 2, 2);
        let b = sample(3, 1, 9);
        let (ga, gb) = FourierField::to_grid_pair(&a, &b, 8);
        let (sa, sb) = (a.to_grid(8), b.to_grid(8));
        for i in 0..ga.len() {
            assert!((ga[i] - sa[i]).abs() < 1e-12 && (gb[i] - sb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn resize_embeds_and_truncates() {
        let f = sample(2, 3, 4);
        let up = f.resized(5);
        assert_eq!(up.resized(3), f);
        let down = f.resized(1);
        assert_eq!(down.get(&[1, 1, 0]), f.get(&[1, 1, 0]));
        assert_eq!(down.get(&[2, 0, 0]), Complex64::new(0.0, 0.0));
    }
}
