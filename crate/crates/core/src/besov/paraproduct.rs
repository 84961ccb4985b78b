use crate::besov::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::fft::fast_len;
use crate::smooth::mollifier;
use crate::spectral::field::{norm_sq, FourierField};

/// Bony decomposition `fg = π_<(f,g) + π_0(f,g) + π_>(f,g)`.
#[derive(Clone, Debug)]
pub struct Paraproducts {
    pub low: FourierField,
    pub resonant: FourierField,
    pub high: FourierField,
}

#[derive(Clone, Copy)]
struct Parts {
    low: bool,
    resonant: bool,
    high: bool,
}

fn headroom_len(f: &FourierField, g: &FourierField) -> usize {
    fast_len(2 * (f.cutoff() + g.cutoff()) + 1)
}

fn decompose(f: &FourierField, g: &FourierField, len: usize, parts: Parts) -> Result<[Option<FourierField>; 3]> {
    assert_eq!(f.dim(), g.dim(), "dimension mismatch");
    let out_cutoff = f.cutoff() + g.cutoff();
    if len < 2 * out_cutoff + 1 {
        return Err(Error::Headroom { need: 2 * out_cutoff + 1, have: len });
    }
    let dim = f.dim();
    let partition = DyadicPartition::new(dim, f.cutoff().max(g.cutoff()));
    let nb = (partition.j_max() + 2) as usize;
    let mut df = Vec::with_capacity(nb);
    let mut dg = Vec::with_capacity(nb);
    for j in -1..=partition.j_max() {
        let (a, b) = FourierField::to_grid_pair(&partition.block(f, j)?, &partition.block(g, j)?, len);
        df.push(a);
        dg.push(b);
    }
    let total = len.pow(dim as u32);
    let mut low = vec![0.0; if parts.low { total } else { 0 }];
    let mut res = vec![0.0; if parts.resonant { total } else { 0 }];
    let mut high = vec![0.0; if parts.high { total } else { 0 }];
    // running sums S_{j-1} = Σ_{i <= j-2} Δ_i
    let mut sf = vec![0.0; total];
    let mut sg = vec![0.0; total];
    for j in 0..nb {
        if j >= 2 {
            for x in 0..total {
                sf[x] += df[j - 2][x];
                sg[x] += dg[j - 2][x];
            }
        }
        if parts.low {
            for x in 0..total {
                low[x] += sf[x] * dg[j][x];
            }
        }
        if parts.high {
            for x in 0..total {
                high[x] += df[j][x] * sg[x];
            }
        }
        if parts.resonant {
            for i in j.saturating_sub(1)..(j + 2).min(nb) {
                for x in 0..total {
                    res[x] += df[j][x] * dg[i][x];
                }
            }
        }
    }
    let back = |v: &[f64], on: bool| -> Option<FourierField> {
        on.then(|| FourierField::from_grid(dim, len, v, out_cutoff, false).expect("grid sized for output"))
    };
    Ok([back(&low, parts.low), back(&res, parts.resonant), back(&high, parts.high)])
}

/// All three paraproduct pieces on a grid of `len^d` points.
pub fn paraproduct_decompose_on(f: &FourierField, g: &FourierField, len: usize) -> Result<Paraproducts> {
    let [low, resonant, high] = decompose(f, g, len, Parts { low: true, resonant: true, high: true })?;
    Ok(Paraproducts { low: low.unwrap(), resonant: resonant.unwrap(), high: high.unwrap() })
}

pub fn paraproduct_decompose(f: &FourierField, g: &FourierField) -> Paraproducts {
    paraproduct_decompose_on(f, g, headroom_len(f, g)).expect("head-room chosen automatically")
}

/// `π_0(f, g) = Σ_{|i−j|<=1} Δ_i f Δ_j g`.
pub fn resonant(f: &FourierField, g: &FourierField) -> FourierField {
    let parts = Parts { low: false, resonant: true, high: false };
    let [_, r, _] = decompose(f, g, headroom_len(f, g), parts).expect("head-room chosen automatically");
    r.unwrap()
}

/// `π_<(f, g) = Σ_j S_{j−1} f Δ_j g`.
pub fn para_low(f: &FourierField, g: &FourierField) -> FourierField {
    let parts = Parts { low: true, resonant: false, high: false };
    let [l, _, _] = decompose(f, g, headroom_len(f, g), parts).expect("head-room chosen automatically");
    l.unwrap()
}

/// `C(f, g, h) = π_0(π_<(f, g), h) − f·π_0(g, h)`.
pub fn commutator_c(f: &FourierField, g: &FourierField, h: &FourierField) -> FourierField {
    let first = resonant(&para_low(f, g), h);
    let second = crate::spectral::ops::product(f, &resonant(g, h));
    first.difference(&second)
}

/// Heat semigroup `e^{tΔ}`: multiplier `e^{-π²|k|²t}`.
pub fn heat_flow(field: &FourierField, t: f64) -> Result<FourierField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("heat flow time must be >= 0, got {t}")));
    }
    let c = std::f64::consts::PI.powi(2) * t;
    Ok(field.with_multiplier(|k| (-c * norm_sq(k)).exp()))
}

/// `g(εD)π_<(u, v) − π_<(u, g(εD)v)` with the plateau mollifier `g`.
pub fn mollifier_commutator(u: &FourierField, v: &FourierField, eps: f64) -> FourierField {
    let smooth = |k: &[i64; 3]| mollifier(eps * norm_sq(k).sqrt());
    let a = para_low(u, v).with_multiplier(smooth);
    let b = para_low(u, &v.with_multiplier(smooth));
    a.difference(&b)
}
