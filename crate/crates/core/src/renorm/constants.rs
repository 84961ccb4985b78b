use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::smooth::mollifier;
use crate::spectral::field::{box_frequencies, norm_sq, KVec};
use crate::spectral::ops::Symbol;

/// `g(ε|k|)` with the plateau mollifier.
pub fn mollifier_weight(eps: f64, k: &KVec) -> f64 {
    mollifier(eps * norm_sq(k).sqrt())
}

/// Stationary one-point variance `2^{-d} Σ_{0<|k|_inf<=cutoff} w(k)/(2λ_k)`.
///
/// `mollifier_eps = Some(ε)` weights each mode by `g(εk)²`; `None` uses `w ≡ 1`.
pub fn compute_c0(dim: usize, cutoff: usize, symbol: Symbol, mollifier_eps: Option<f64>) -> f64 {
    let sum: f64 = box_frequencies(dim, cutoff)
        .iter()
        .filter(|k| **k != [0; 3])
        .map(|k| {
            let w = mollifier_eps.map_or(1.0, |e| mollifier_weight(e, k).powi(2));
            w / (2.0 * symbol.eval(k))
        })
        .sum();
    sum * 2f64.powi(-(dim as i32))
}

/// `C₀` of the lattice of side `2N+1` with its own dispersion.
pub fn c0_lattice(dim: usize, n: usize) -> f64 {
    compute_c0(dim, n, Symbol::lattice_for(n), None)
}

/// `C̄₀` at mollification scale `ε` with the continuum symbol; the box covers `supp g(ε·)`.
pub fn c0_mollified(dim: usize, eps: f64) -> f64 {
    compute_c0(dim, mollified_cutoff(eps), Symbol::Continuum, Some(eps))
}

/// Smallest box cutoff containing `supp g(ε·) = {|k| <= 1/ε}`.
pub fn mollified_cutoff(eps: f64) -> usize {
    (1.0 / eps).floor() as usize
}

/// Two-loop sums `2^{-2d-1} Σ_{k₁,k₂} w₁w₂w₁₂ e^{-t(λ₁+λ₂+λ₁₂)} / (λ₁λ₂(λ₁+λ₂+λ₁₂))`.
///
/// Evaluated as `2^{-2d-1}∫_t^∞ I(s) ds` with `I(s) = Σ_K b_s(K)(a_s ∗ a_s)(K)`,
/// `a_s(k) = w(k)e^{-sλ_k}/λ_k`, `b_s(K) = w(K)e^{-sλ_K}`. The convolution is formed
/// by a cosine transform of period `L` (all weights are even in every coordinate),
/// the `s`-integral by composite Gauss–Legendre in `log s`.
#[derive(Clone, Debug)]
pub struct TwoLoop {
    dim: usize,
    cutoff: usize,
    b_cutoff: usize,
    period: usize,
    a_rate: Vec<f64>,
    a_weight: Vec<f64>,
    b_rate: Vec<f64>,
    b_weight: Vec<f64>,
    cos_a: Vec<f64>,
    cos_b: Vec<f64>,
    x_mult: Vec<f64>,
    s_lo: f64,
    s_hi: f64,
    panel_width: f64,
    rule: GaussLegendre,
}

/// Quadrature resolution in `u = log s`.
pub const PANEL_WIDTH: f64 = 2.0;
pub const PANEL_POINTS: usize = 8;

fn half_box(dim: usize, c: usize) -> Vec<KVec> {
    let side = c + 1;
    (0..side.pow(dim as u32))
        .map(|mut i| {
            let mut k = [0i64; 3];
            for a in (0..dim).rev() {
                k[a] = (i % side) as i64;
                i /= side;
            }
            k
        })
        .collect()
}

fn multiplicity(k: &KVec) -> f64 {
    k.iter().map(|&c| if c == 0 { 1.0 } else { 2.0 }).product()
}

fn cos_table(h: usize, c: usize, period: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity((h + 1) * (c + 1));
    for x in 0..=h {
        for k in 0..=c {
            let phase = ((k * x) % period) as f64 / period as f64;
            t.push((2.0 * std::f64::consts::PI * phase).cos());
        }
    }
    t
}

/// Contracts `axis` of a row-major cube `dims` against `table` (`n_out × dims[axis]`).
fn contract_axis(data: &[f64], dims: &mut [usize], axis: usize, table: &[f64], n_out: usize) -> Vec<f64> {
    let n_in = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * n_out * inner];
    if inner == 1 {
        // last axis: accumulate rows of the transposed table
        let mut tt = vec![0.0; n_in * n_out];
        for x in 0..n_out {
            for k in 0..n_in {
                tt[k * n_out + x] = table[x * n_in + k];
            }
        }
        for o in 0..outer {
            let dst = &mut out[o * n_out..(o + 1) * n_out];
            for k in 0..n_in {
                let v = data[o * n_in + k];
                for (d, t) in dst.iter_mut().zip(&tt[k * n_out..(k + 1) * n_out]) {
                    *d += v * t;
                }
            }
        }
        dims[axis] = n_out;
        return out;
    }
    for o in 0..outer {
        for x in 0..n_out {
            let row = &table[x * n_in..(x + 1) * n_in];
            let dst = &mut out[(o * n_out + x) * inner..(o * n_out + x + 1) * inner];
            for (k, &c) in row.iter().enumerate() {
                let src = &data[(o * n_in + k) * inner..(o * n_in + k + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }
    dims[axis] = n_out;
    out
}

fn cosine_transform(values: Vec<f64>, dim: usize, c: usize, table: &[f64], h: usize) -> Vec<f64> {
    let mut dims = vec![c + 1; dim];
    let mut data = values;
    for axis in 0..dim {
        data = contract_axis(&data, &mut dims, axis, table, h + 1);
    }
    data
}

impl TwoLoop {
    fn build(dim: usize, cutoff: usize, b_cutoff: usize, period: usize, symbol: Symbol, weight: impl Fn(&KVec) -> f64) -> Self {
        assert!(cutoff >= 1, "two-loop sum needs cutoff >= 1");
        assert!(period % 2 == 1, "period must be odd");
        let h = (period - 1) / 2;
        let mut a_rate = Vec::new();
        let mut a_weight = Vec::new();
        let mut lam_min = f64::INFINITY;
        let mut lam_max: f64 = 0.0;
        for k in half_box(dim, cutoff) {
            let lam = symbol.eval(&k);
            a_rate.push(lam);
            if k == [0; 3] {
                a_weight.push(0.0);
            } else {
                lam_min = lam_min.min(lam);
                lam_max = lam_max.max(lam);
                a_weight.push(multiplicity(&k) * weight(&k) / lam);
            }
        }
        let mut b_rate = Vec::new();
        let mut b_weight = Vec::new();
        for k in half_box(dim, b_cutoff) {
            let lam = symbol.eval(&k);
            b_rate.push(lam);
            b_weight.push(if k == [0; 3] { 0.0 } else { multiplicity(&k) * weight(&k) });
            lam_max = lam_max.max(lam);
        }
        let x_mult = half_box(dim, h).iter().map(multiplicity).collect();
        Self {
            dim,
            cutoff,
            b_cutoff,
            period,
            a_rate,
            a_weight,
            b_rate,
            b_weight,
            cos_a: cos_table(h, cutoff, period),
            cos_b: cos_table(h, b_cutoff, period),
            x_mult,
            // below s_lo the integrand is linear to relative 1e-3
            s_lo: 1e-3 / (3.0 * lam_max),
            // above s_hi every term carries e^{-40} or less
            s_hi: 40.0 / (3.0 * lam_min),
            panel_width: PANEL_WIDTH,
            rule: GaussLegendre::new(PANEL_POINTS.try_into().unwrap()),
        }
    }

    /// `C̃₁`-type sum: continuum symbol, weights `g(εk)` on all three momenta, `k₁, k₂` in the box `cutoff`.
    pub fn mollified(dim: usize, eps: f64, cutoff: usize) -> Self {
        let g_cut = mollified_cutoff(eps);
        let b_cutoff = (2 * cutoff).min(g_cut.max(1));
        let period = 2 * cutoff + b_cutoff + 1;
        let period = period + (1 - period % 2);
        Self::build(dim, cutoff, b_cutoff, period, Symbol::Continuum, |k| mollifier_weight(eps, k))
    }

    /// Lattice two-loop sum: lattice dispersion, unit weights, `k₁₂` folded mod `2N+1`.
    pub fn lattice(dim: usize, n: usize) -> Self {
        Self::build(dim, n, n, 2 * n + 1, Symbol::lattice_for(n), |_| 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn prefactor(&self) -> f64 {
        2f64.powi(-2 * self.dim as i32 - 1)
    }

    /// `I(s)`.
    pub fn integrand(&self, s: f64) -> f64 {
        let h = (self.period - 1) / 2;
        let a: Vec<f64> = self.a_weight.iter().zip(&self.a_rate).map(|(w, l)| w * (-s * l).exp()).collect();
        let b: Vec<f64> = self.b_weight.iter().zip(&self.b_rate).map(|(w, l)| w * (-s * l).exp()).collect();
        let a_hat = cosine_transform(a, self.dim, self.cutoff, &self.cos_a, h);
        let b_hat = cosine_transform(b, self.dim, self.b_cutoff, &self.cos_b, h);
        let sum: f64 = a_hat.iter().zip(&b_hat).zip(&self.x_mult).map(|((a, b), m)| m * a * a * b).sum();
        sum / (self.period as f64).powi(self.dim as i32)
    }

    /// `2^{-2d-1} ∫_t^∞ I(s) ds`.
    pub fn tail(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "tail start must be >= 0");
        if t >= self.s_hi {
            return 0.0;
        }
        let start = t.max(self.s_lo);
        // trapezoid head on [t, s_lo]
        let mut total = if t < self.s_lo {
            0.5 * (self.s_lo - t) * (self.integrand(t) + self.integrand(self.s_lo))
        } else {
            0.0
        };
        let (u0, u1) = (start.ln(), self.s_hi.ln());
        let panels = ((u1 - u0) / self.panel_width).ceil().max(1.0) as usize;
        let du = (u1 - u0) / panels as f64;
        for p in 0..panels {
            let a = u0 + p as f64 * du;
            total += self.rule.integrate(a, a + du, |u| {
                let s = u.exp();
                s * self.integrand(s)
            });
        }
        self.prefactor() * total
    }

    /// The time-independent constant (`C̃₁` or lattice `C₁`).
    pub fn constant(&self) -> f64 {
        self.tail(0.0)
    }

    /// `φ̃(t) = −tail(t)`; `φ̃(0) = −constant()` by construction.
    pub fn phi(&self, t: f64) -> f64 {
        -self.tail(t)
    }
}

/// `C̃₁` at scale `ε` with both loop momenta capped by `cutoff`.
pub fn compute_c1_tilde(dim: usize, eps: f64, cutoff: usize) -> f64 {
    TwoLoop::mollified(dim, eps, cutoff).constant()
}

pub fn phi_tilde(dim: usize, eps: f64, t: f64, cutoff: usize) -> f64 {
    TwoLoop::mollified(dim, eps, cutoff).phi(t)
}

/// Lattice `C₁` on `Λ_ε`, `ε = 2/(2N+1)`.
pub fn c1_lattice(dim: usize, n: usize) -> f64 {
    TwoLoop::lattice(dim, n).constant()
}

/// Warning when the summation box truncates `supp g(ε·)`.
pub fn coverage_warning(eps: f64, cutoff: usize) -> Option<String> {
    let need = mollified_cutoff(eps);
    (cutoff < need).then(|| format!("cutoff {cutoff} truncates the mollifier support (needs {need} at eps = {eps})"))
}

/// Counterterm bundle entering the drift and the Gibbs density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormConstants {
    /// One-loop (Wick) constant used by the run.
    pub c0: f64,
    /// Two-loop constant used by the run.
    pub c1: f64,
    pub mass: f64,
    pub coupling: f64,
}

impl RenormConstants {
    pub fn new(c0: f64, c1: f64, mass: f64, coupling: f64) -> Self {
        Self { c0, c1, mass, coupling }
    }

    /// Counterterms off.
    pub fn bare(mass: f64, coupling: f64) -> Self {
        Self::new(0.0, 0.0, mass, coupling)
    }

    /// Lattice constants `C₀`, `C₁` for `Λ_ε` with `2N+1` sites per axis.
    pub fn lattice(dim: usize, n: usize, mass: f64, coupling: f64) -> Self {
        Self::new(c0_lattice(dim, n), c1_lattice(dim, n), mass, coupling)
    }

    /// `C̄₀`, `C̃₁` at `ε = 1/cutoff`.
    pub fn mollified(dim: usize, cutoff: usize, mass: f64, coupling: f64) -> Self {
        let eps = 1.0 / cutoff as f64;
        Self::new(c0_mollified(dim, eps), compute_c1_tilde(dim, eps, cutoff), mass, coupling)
    }

    /// Coefficient of the linear drift term: `3λC₀ − 9λ²C₁ − m`.
    pub fn linear_coefficient(&self) -> f64 {
        let l = self.coupling;
        3.0 * l * self.c0 - 9.0 * l * l * self.c1 - self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double sum over `k₁, k₂` (and `k₁₂` folded when `period` is set).
    fn naive(dim: usize, c: usize, symbol: Symbol, w: impl Fn(&KVec) -> f64, period: Option<i64>, t: f64) -> f64 {
        let ks: Vec<KVec> = box_frequencies(dim, c).into_iter().filter(|k| *k != [0; 3]).collect();
        let fold = |x: i64| match period {
            Some(p) => {
                let r = x.rem_euclid(p);
                if r > p / 2 {
                    r - p
                } else {
                    r
                }
            }
            None => x,
        };
        let mut sum = 0.0;
        for k1 in &ks {
            let l1 = symbol.eval(k1);
            for k2 in &ks {
                let k12 = [fold(k1[0] + k2[0]), fold(k1[1] + k2[1]), fold(k1[2] + k2[2])];
                if k12 == [0; 3] {
                    continue;
                }
                let l2 = symbol.eval(k2);
                let l12 = symbol.eval(&k12);
                let total = l1 + l2 + l12;
                sum += w(k1) * w(k2) * w(&k12) * (-t * total).exp() / (l1 * l2 * total);
            }
        }
        sum * 2f64.powi(-2 * dim as i32 - 1)
    }

    #[test]
    fn c0_lattice_n1_direct_sum() {
        let eps = 2.0 / 3.0;
        let mut direct = 0.0;
        for k in box_frequencies(3, 1) {
            if k == [0; 3] {
                continue;
            }
            let s: f64 = k.iter().map(|&c| (eps * c as f64 * std::f64::consts::PI / 2.0).sin().powi(2)).sum();
            direct += 0.125 / (2.0 * 4.0 / (eps * eps) * s);
        }
        let c0 = c0_lattice(3, 1);
        assert!((c0 - direct).abs() < 1e-15);
        // 6 faces (λ = 27/4), 12 edges (27/2), 8 corners (81/4)
        let closed = 0.125 / 2.0 * (6.0 * 4.0 / 27.0 + 12.0 * 2.0 / 27.0 + 8.0 * 4.0 / 81.0);
        assert!((c0 - closed).abs() < 1e-15);
        // frozen: 11/81
        assert!((c0 - 0.135_802_469_135_802_47).abs() < 1e-15);
        assert!(c0_lattice(3, 2) > c0);
    }

    #[test]
    fn mollified_two_loop_matches_direct_sum() {
        for (dim, eps, c) in [(3, 0.25, 4), (3, 1.0 / 6.0, 6), (2, 0.2, 5), (3, 0.3, 2)] {
            let tl = TwoLoop::mollified(dim, eps, c);
            for t in [0.0, 0.002, 0.05] {
                let fast = tl.tail(t);
                let slow = naive(dim, c, Symbol::Continuum, |k| mollifier_weight(eps, k), None, t);
                assert!((fast - slow).abs() < 1e-8 * slow, "d={dim} c={c} t={t}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn lattice_two_loop_matches_direct_sum() {
        for (dim, n) in [(3, 1), (3, 3), (2, 4)] {
            let fast = c1_lattice(dim, n);
            let slow = naive(dim, n, Symbol::lattice_for(n), |_| 1.0, Some(2 * n as i64 + 1), 0.0);
            assert!((fast - slow).abs() < 1e-8 * slow, "d={dim} n={n}: {fast} vs {slow}");
        }
    }

    #[test]
    fn phi_tilde_at_zero_cancels_constant() {
        let tl = TwoLoop::mollified(3, 0.125, 8);
        assert_eq!(tl.phi(0.0), -tl.constant());
        assert_eq!(phi_tilde(3, 0.125, 0.0, 8) + compute_c1_tilde(3, 0.125, 8), 0.0);
        assert!(tl.constant() > 0.0);
        assert!(tl.phi(0.01) < 0.0 && tl.phi(0.01) > tl.phi(0.0));
        assert!(tl.phi(100.0).abs() < 1e-12);
    }

    #[test]
    fn coverage() {
        assert!(coverage_warning(0.125, 4).is_some());
        assert!(coverage_warning(0.125, 8).is_none());
    }
}
