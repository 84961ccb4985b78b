use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::fast_len;
use crate::spectral::field::{sup_norm, FourierField, KVec};
use crate::spectral::lattice::{ext, ext_inverse, LatticeField};

/// Symbol `λ_k` of `-Δ` on the torus `[-1,1]^d`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Symbol {
    /// `π²|k|²`.
    Continuum,
    /// `(4/ε²) Σ_j sin²(ε k_j π/2)`.
    Lattice { eps: f64 },
}

impl Symbol {
    pub fn lattice_for(n: usize) -> Self {
        Symbol::Lattice { eps: 2.0 / (2 * n + 1) as f64 }
    }

    pub fn eval(&self, k: &KVec) -> f64 {
        laplacian_symbol(k, *self)
    }
}

pub fn laplacian_symbol(k: &KVec, symbol: Symbol) -> f64 {
    use std::f64::consts::PI;
    match symbol {
        Symbol::Continuum => PI * PI * k.iter().map(|&c| (c * c) as f64).sum::<f64>(),
        Symbol::Lattice { eps } => {
            let s: f64 = k.iter().map(|&c| (eps * c as f64 * PI / 2.0).sin().powi(2)).sum();
            4.0 / (eps * eps) * s
        }
    }
}

/// `P_N`: keeps `|k|_inf <= N`, returned on the box of cutoff `N`.
pub fn project_pn(field: &FourierField, n: usize) -> FourierField {
    field.resized(n)
}

fn check_fold_support(field: &FourierField, n: usize) -> Result<()> {
    let r = field.support_radius(0.0);
    if r > 3 * n {
        return Err(Error::SupportViolation { found: r, limit: 3 * n });
    }
    Ok(())
}

/// Coordinatewise fold `k_j -> k_j - (2N+1) sign(k_j)` for `|k_j| > N`; in-band modes stay.
///
/// Requires Fourier support inside `|k|_inf <= 3N`. Idempotent.
pub fn alias_fold(field: &FourierField, n: usize) -> Result<FourierField> {
    check_fold_support(field, n)?;
    let side = (2 * n + 1) as i64;
    let nn = n as i64;
    let dim = field.dim();
    let mut out = FourierField::zeros(dim, n, field.mean_zero());
    for (k, c) in field.frequencies().iter().zip(field.coeffs()) {
        let mut q = *k;
        for a in q.iter_mut().take(dim) {
            if *a > nn {
                *a -= side;
            } else if *a < -nn {
                *a += side;
            }
        }
        let i = out.index(&q).unwrap();
        out.coeffs_mut()[i] += *c;
    }
    if field.mean_zero() {
        out.set_mean_zero(true);
    }
    Ok(out)
}

/// `Π_N`: the sum over the off-centre rectangles `P^i`, each shifted back by the
/// multiplier `e^{-iπ(2N+1) i·x}` and then projected by `P_N`.
pub fn pi_n(field: &FourierField, n: usize) -> Result<FourierField> {
    check_fold_support(field, n)?;
    let dim = field.dim();
    let nn = n as i64;
    let side = 2 * nn + 1;
    let mut out = FourierField::zeros(dim, n, field.mean_zero());
    let labels: Vec<[i64; 3]> = {
        let mut v = Vec::new();
        for i0 in -1..=1 {
            for i1 in -1..=1 {
                for i2 in if dim == 3 { -1..=1 } else { 0..=0 } {
                    if (i0, i1, i2) != (0, 0, 0) {
                        v.push([i0, i1, i2]);
                    }
                }
            }
        }
        v
    };
    let rect = |k: &KVec| -> [i64; 3] {
        let mut r = [0; 3];
        for a in 0..dim {
            r[a] = if k[a] > nn {
                1
            } else if k[a] < -nn {
                -1
            } else {
                0
            };
        }
        r
    };
    for i in &labels {
        // 1_{P^i} u, multiplied by e_N^i, then P_N
        for (k, c) in field.frequencies().iter().zip(field.coeffs()) {
            if rect(k) != *i {
                continue;
            }
            let shifted: KVec = [k[0] - side * i[0], k[1] - side * i[1], k[2] - side * i[2]];
            if sup_norm(&shifted) <= nn {
                let idx = out.index(&shifted).unwrap();
                out.coeffs_mut()[idx] += *c;
            }
        }
    }
    if field.mean_zero() {
        out.set_mean_zero(true);
    }
    Ok(out)
}

/// `Q_N = P_N + Π_N`.
pub fn q_n(field: &FourierField, n: usize) -> Result<FourierField> {
    let mut out = pi_n(field, n)?;
    out.add_scaled(1.0, &project_pn(field, n));
    Ok(out)
}

/// Grid size that computes a product of total support `support` without aliasing onto `|k|_inf <= out`.
pub fn product_grid_len(support: usize, out: usize) -> usize {
    fast_len(support + out + 1)
}

/// Exact pointwise product; the output box has cutoff `M_a + M_b`.
pub fn product(a: &FourierField, b: &FourierField) -> FourierField {
    let out = a.cutoff() + b.cutoff();
    product_truncated(a, b, out)
}

/// `P_out(a·b)`, computed without aliasing.
pub fn product_truncated(a: &FourierField, b: &FourierField, out: usize) -> FourierField {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    let len = product_grid_len(a.cutoff() + b.cutoff(), out);
    let (ga, gb) = FourierField::to_grid_pair(a, b, len);
    let prod: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x * y).collect();
    FourierField::from_grid(a.dim(), len, &prod, out, false).expect("grid sized for output")
}

/// `P_out(p(x))` for a sitewise polynomial map of degree `degree`.
pub fn polynomial_truncated(x: &FourierField, degree: usize, out: usize, f: impl Fn(f64) -> f64) -> FourierField {
    let len = product_grid_len(degree * x.cutoff(), out);
    let g: Vec<f64> = x.to_grid(len).into_iter().map(f).collect();
    FourierField::from_grid(x.dim(), len, &g, out, false).expect("grid sized for output")
}

/// `Q_N(x³)` through the exact spectral cube followed by the fold.
pub fn cube_folded_spectral(x: &FourierField, n: usize) -> Result<FourierField> {
    if x.cutoff() > n {
        return Err(Error::SupportViolation { found: x.cutoff(), limit: n });
    }
    let cube = polynomial_truncated(x, 3, 3 * x.cutoff(), |v| v * v * v);
    q_n(&cube, n)
}

/// `Ext((Ext⁻¹ x)³)`: sitewise cube on the lattice.
pub fn cube_sitewise(x: &FourierField, n: usize) -> FourierField {
    let mut lat: LatticeField = ext_inverse(x, n);
    for v in lat.values_mut() {
        *v = *v * *v * *v;
    }
    ext(&lat)
}

/// `(∫_{T^d} |f|^p)^{1/p}` by trapezoidal quadrature on a grid of `len^d` points; `p = ∞` gives the grid maximum.
pub fn torus_lp_norm_on_grid(values: &[f64], dim: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let len = (values.len() as f64).powf(1.0 / dim as f64).round();
    let w = (2.0 / len).powi(dim as i32);
    let s: f64 = if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    (w * s).powf(1.0 / p)
}

/// `L^p` norm on the torus sampled on a grid oversampled enough that even `p` up to 4 is exact.
pub fn torus_lp_norm(field: &FourierField, p: f64) -> f64 {
    let len = fast_len(4 * field.cutoff() + 2);
    torus_lp_norm_on_grid(&field.to_grid(len), field.dim(), p)
}

/// `(∫|f|^{2n})^{1/(2n)}` exactly, for a trigonometric polynomial (grid resolves degree `2n·M`).
pub fn torus_even_norm_exact(field: &FourierField, n: u32) -> f64 {
    let len = fast_len(2 * n as usize * field.cutoff() + 1);
    torus_lp_norm_on_grid(&field.to_grid(len), field.dim(), 2.0 * n as f64)
}

/// Random real field with independent standard complex coefficients (test helper).
pub fn hermitian_from_pairs(dim: usize, cutoff: usize, mean_zero: bool, mut draw: impl FnMut() -> (f64, f64)) -> FourierField {
    let mut f = FourierField::zeros(dim, cutoff, mean_zero);
    let ks = f.frequencies();
    let half = ks.len() / 2;
    for k in &ks[half + 1..] {
        let (a, b) = draw();
        f.set_pair(k, Complex64::new(a, b));
    }
    if !mean_zero {
        let (a, _) = draw();
        f.set(&[0, 0, 0], Complex64::new(a, 0.0));
    }
    f
}
