//! Estimators shared by the diagnostic suites.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// Independent samples.
    pub fn iid(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let se = if n > 1 { (variance(xs) / n as f64).sqrt() } else { f64::INFINITY };
        Self { mean, se, n }
    }

    /// Correlated samples: the standard error uses the effective sample size.
    pub fn autocorrelated(xs: &[f64]) -> Self {
        let mut e = Self::iid(xs);
        let ess = effective_sample_size(xs).max(1.0);
        e.se = (variance(xs) / ess).sqrt();
        e
    }

    /// `|mean − target| / se`.
    pub fn z(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }

    /// `(a − b)` with independent errors added in quadrature.
    pub fn minus(&self, other: &Self) -> Self {
        Self { mean: self.mean - other.mean, se: self.se.hypot(other.se), n: self.n.min(other.n) }
    }
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Linear interpolation quantile, `q ∈ [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Ordinary least squares with coefficient standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub dof: usize,
}

impl OlsFit {
    /// Two-sided Student-t interval for coefficient `i` at confidence `level`.
    pub fn ci(&self, i: usize, level: f64) -> (f64, f64) {
        let t = StudentsT::new(0.0, 1.0, self.dof.max(1) as f64).expect("positive dof");
        let w = t.inverse_cdf(0.5 + level / 2.0) * self.se[i];
        (self.coef[i] - w, self.coef[i] + w)
    }
}

/// Fits `y ≈ Σ_j coef_j · columns_j(x)`.
pub fn ols(design: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    let p = design.len();
    if p == 0 || design.iter().any(|c| c.len() != n) || n <= p {
        return Err(Error::InvalidParameter(format!("regression needs more than {p} points with matching columns")));
    }
    let x = DMatrix::from_fn(n, p, |i, j| design[j][i]);
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse().ok_or_else(|| Error::InvalidParameter("singular design".into()))?;
    let beta = &inv * x.transpose() * &yv;
    let resid = &yv - &x * &beta;
    let dof = n - p;
    let s2 = resid.norm_squared() / dof as f64;
    Ok(OlsFit { coef: beta.iter().copied().collect(), se: (0..p).map(|j| (s2 * inv[(j, j)]).sqrt()).collect(), dof })
}

/// Polynomial fit `y ≈ Σ_{j≤degree} c_j x^j`.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<OlsFit> {
    let design: Vec<Vec<f64>> = (0..=degree).map(|j| x.iter().map(|v| v.powi(j as i32)).collect()).collect();
    ols(&design, y)
}

/// Potential scale reduction of equal-length chains (split halves are not taken).
pub fn r_hat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len() as f64;
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) as f64;
    if m < 2.0 || n < 2.0 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n as usize].iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = chains.iter().map(|c| variance(&c[..n as usize])).sum::<f64>() / m;
    if w == 0.0 {
        return 1.0;
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

/// Effective sample size by Geyer's initial monotone positive sequence.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c0 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| -> f64 {
        (0..n - lag).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum::<f64>() / (n as f64 * c0)
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        // pair sums Γ_m = ρ_{2m} + ρ_{2m+1} are positive and decreasing for reversible chains
        let g = rho(lag) + rho(lag + 1);
        if g <= 0.0 {
            break;
        }
        let g = g.min(prev);
        sum += g;
        prev = g;
        lag += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    (n as f64 / tau).min(n as f64)
}

/// Bootstrap replicates of `stat` over resamples of `xs`.
pub fn bootstrap(xs: &[f64], reps: usize, seed: u64, stat: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; xs.len()];
    (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..xs.len())];
            }
            stat(&buf)
        })
        .collect()
}

/// Percentile interval of bootstrap replicates.
pub fn percentile_ci(reps: &[f64], level: f64) -> (f64, f64) {
    let a = (1.0 - level) / 2.0;
    (quantile(reps, a), quantile(reps, 1.0 - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = polyfit(&x, &y, 1).unwrap();
        assert!((fit.coef[0] - 2.0).abs() < 1e-12 && (fit.coef[1] + 0.5).abs() < 1e-12);
        assert!(fit.se[1] < 1e-10);
        assert!(polyfit(&x[..2], &y[..2], 1).is_err());
    }

    #[test]
    fn slope_interval_covers_truth() {
        let e = normals(1, 200);
        let x: Vec<f64> = (0..200).map(|i| i as f64 / 50.0).collect();
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 1.0 + 0.3 * a + 0.1 * b).collect();
        let (lo, hi) = polyfit(&x, &y, 1).unwrap().ci(1, 0.95);
        assert!(lo < 0.3 && 0.3 < hi);
    }

    #[test]
    fn iid_diagnostics() {
        let xs = normals(2, 4000);
        let ess = effective_sample_size(&xs);
        assert!(ess > 3000.0, "ess {ess}");
        let chains: Vec<Vec<f64>> = xs.chunks(1000).map(<[f64]>::to_vec).collect();
        assert!(r_hat(&chains) < 1.01);
        let mut shifted = chains.clone();
        shifted[0].iter_mut().for_each(|v| *v += 3.0);
        assert!(r_hat(&shifted) > 1.2);
    }

    #[test]
    fn ar1_ess_matches_theory() {
        // AR(1) with ρ = 0.8 has τ = (1+ρ)/(1−ρ) = 9
        let e = normals(3, 50_000);
        let mut x = vec![0.0; e.len()];
        for i in 1..e.len() {
            x[i] = 0.8 * x[i - 1] + e[i];
        }
        let tau = x.len() as f64 / effective_sample_size(&x);
        assert!((tau - 9.0).abs() < 1.5, "tau {tau}");
    }

    #[test]
    fn quantiles_and_bootstrap() {
        let xs = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&xs), 2.5);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        let reps = bootstrap(&normals(4, 400), 500, 9, |v| v.iter().sum::<f64>() / v.len() as f64);
        let (lo, hi) = percentile_ci(&reps, 0.95);
        assert!(lo < 0.0 && hi > 0.0 && hi - lo < 0.4);
        let z = Estimate { mean: 1.0, se: 0.5, n: 10 };
        assert_eq!(z.z(0.0), 2.0);
    }
}
