use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::norm::{besov_norm, BesovIndex};
use crate::dynamics::record::simulate;
use crate::error::{Error, Result};
use crate::gibbs::cylinder::CylinderFunction;
use crate::gibbs::measure::{log_derivative, GibbsSpec};
use crate::gibbs::sampler::{chain_start, sample_chain_map, step_size_warning, ChainConfig};
use crate::noise::driver::tag;
use crate::spectral::field::FourierField;
use crate::stats::{bootstrap, percentile_ci, variance, Estimate};

/// A Monte Carlo statistic tested against zero at `threshold` standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl TestStatistic {
    pub fn zero_test(name: impl Into<String>, e: Estimate, sigmas: f64) -> Self {
        let threshold = sigmas * e.se;
        Self { name: name.into(), estimate: e.mean, se: e.se, threshold, pass: e.mean.abs() <= threshold }
    }
}

/// `∫P_t f·g dμ − ∫f·P_t g dμ` for each pair, estimated with common random numbers.
///
/// Each start is evolved once by the unadjusted lattice dynamics with step `delta`; the per-start
/// statistic is `f(X_t)g(X_0) − f(X_0)g(X_t)`, which vanishes identically when `f = g`.
pub fn check_reversibility(
    spec: &GibbsSpec,
    pairs: &[(&CylinderFunction, &CylinderFunction)],
    t: f64,
    delta: f64,
    starts: &[FourierField],
    seed: u64,
) -> Result<Vec<TestStatistic>> {
    if starts.len() < 2 {
        return Err(Error::InvalidParameter(format!("reversibility needs at least 2 starts, got {}", starts.len())));
    }
    let ends = evolve_starts(spec, t, delta, starts, seed)?;
    Ok(reversibility_statistics(pairs, starts, &ends))
}

/// Evolves start `i` as ensemble member `i` of the unadjusted lattice dynamics up to `t`.
pub fn evolve_starts(spec: &GibbsSpec, t: f64, delta: f64, starts: &[FourierField], seed: u64) -> Result<Vec<FourierField>> {
    if t == 0.0 {
        return Ok(starts.to_vec());
    }
    let cfg = spec.dynamics(delta, t, seed);
    starts.par_iter().enumerate().map(|(i, x0)| Ok(simulate(&cfg, x0, i, &[])?.final_state().clone())).collect()
}

/// Reversibility statistics from already evolved starts (`ends[i]` is `starts[i]` at time `t`).
pub fn reversibility_statistics(
    pairs: &[(&CylinderFunction, &CylinderFunction)],
    starts: &[FourierField],
    ends: &[FourierField],
) -> Vec<TestStatistic> {
    pairs
        .iter()
        .map(|(f, g)| {
            let d: Vec<f64> =
                starts.iter().zip(ends).map(|(x0, xt)| f.eval(xt) * g.eval(x0) - f.eval(x0) * g.eval(xt)).collect();
            TestStatistic::zero_test(format!("{}|{}", f.name, g.name), Estimate::iid(&d), 3.0)
        })
        .collect()
}

/// `E F(X_t) − E F(X_0)` for each named observable, as paired differences over independent starts.
pub fn check_invariance(
    observables: &[(&str, &dyn Fn(&FourierField) -> f64)],
    starts: &[FourierField],
    ends: &[FourierField],
) -> Vec<TestStatistic> {
    observables
        .iter()
        .map(|(name, obs)| {
            let d: Vec<f64> = starts.iter().zip(ends).map(|(a, b)| obs(b) - obs(a)).collect();
            TestStatistic::zero_test(*name, Estimate::iid(&d), 3.0)
        })
        .collect()
}

/// `∫∂_h f dμ + ∫f·⟨b, h⟩ dμ` over `samples` (a stationary chain), tested against 0 at 3σ.
pub fn check_ibp(spec: &GibbsSpec, f: &CylinderFunction, h: (&str, &FourierField), samples: &[FourierField]) -> TestStatistic {
    let v: Vec<f64> =
        samples.iter().map(|x| f.directional(x, h.1) + f.eval(x) * log_derivative(spec, x).inner(h.1)).collect();
    TestStatistic::zero_test(format!("{}|{}", f.name, h.0), Estimate::autocorrelated(&v), 3.0)
}

/// `ℰ(f, g) = ½ E⟨Df, Dg⟩`.
pub fn dirichlet_form_estimate(f: &CylinderFunction, g: &CylinderFunction, samples: &[FourierField]) -> f64 {
    let s: f64 = samples.iter().map(|x| f.gradient(x).inner(&g.gradient(x))).sum();
    0.5 * s / samples.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareEstimate {
    /// `max_f Var(f)/ℰ(f,f)` over the non-degenerate dictionary members.
    pub constant: f64,
    pub ci: (f64, f64),
    pub best: String,
    pub ratios: Vec<(String, f64)>,
}

/// Functions with `ℰ(f,f)` below this are treated as constants.
pub const DEGENERATE_FORM: f64 = 1e-12;

/// Lower bound on the Poincaré constant from a dictionary, with a bootstrap CI over samples.
pub fn poincare_estimate(dictionary: &[CylinderFunction], samples: &[FourierField], reps: usize, seed: u64) -> Result<PoincareEstimate> {
    // per-sample values and squared gradients, so that resampling is cheap
    let cols: Vec<(Vec<f64>, Vec<f64>)> = dictionary
        .iter()
        .map(|f| samples.iter().map(|x| (f.eval(x), 0.5 * f.gradient(x).norm_l2().powi(2))).unzip())
        .collect();
    let ratio = |vals: &[f64], forms: &[f64]| {
        let e = forms.iter().sum::<f64>() / forms.len().max(1) as f64;
        (e > DEGENERATE_FORM).then(|| variance(vals) / e)
    };
    let ratios: Vec<(String, f64)> = dictionary
        .iter()
        .zip(&cols)
        .filter_map(|(f, (v, e))| ratio(v, e).map(|r| (f.name.clone(), r)))
        .collect();
    let Some((best, constant)) = ratios.iter().cloned().max_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Err(Error::InvalidParameter("degenerate dictionary: every Dirichlet form vanishes".into()));
    };
    let index: Vec<f64> = (0..samples.len()).map(|i| i as f64).collect();
    let reps = bootstrap(&index, reps, seed, |idx| {
        cols.iter()
            .filter_map(|(v, e)| {
                let vs: Vec<f64> = idx.iter().map(|&i| v[i as usize]).collect();
                let es: Vec<f64> = idx.iter().map(|&i| e[i as usize]).collect();
                ratio(&vs, &es)
            })
            .fold(0.0, f64::max)
    });
    Ok(PoincareEstimate { constant, ci: percentile_ci(&reps, 0.95), best, ratios })
}

/// One level of a moment ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub power: u32,
    pub alpha: f64,
    pub rows: Vec<MomentRow>,
    /// Weighted least-squares slope of the level means against `log₂ N`.
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub warnings: Vec<String>,
}

impl MomentReport {
    /// No significant increase: the slope interval reaches down to 0 or below.
    pub fn uniform(&self) -> bool {
        self.slope_ci.0 <= 0.0
    }

    pub fn grows(&self) -> bool {
        self.slope_ci.0 > 0.0
    }
}

/// `E‖x‖^{2n}_{B}` under each measure of the ladder (one chain per level, chain 0 of `chain`).
pub fn moment_bound_report(ladder: &[GibbsSpec], chain: &ChainConfig, power: u32, index: BesovIndex) -> Result<MomentReport> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for spec in ladder {
        let seed = crate::noise::driver::derive_seed(chain.seed, &[tag::CHAIN, spec.n as u64]);
        let cfg = ChainConfig { seed, ..chain.clone() };
        let run = sample_chain_map(spec, &cfg, 0, chain_start(spec, seed, 0)?, |x| besov_norm(x, &index).powi(2 * power as i32))?;
        if let Some(w) = step_size_warning(run.acceptance(), cfg.step) {
            warnings.push(format!("N={}: {w}", spec.n));
        }
        let e = Estimate::autocorrelated(&run.values);
        rows.push(MomentRow { n: spec.n, mean: e.mean, se: e.se, acceptance: run.acceptance() });
    }
    let (slope, se) = weighted_slope(&rows);
    let z = 1.959_963_984_540_054;
    Ok(MomentReport { power, alpha: index.alpha, rows, slope, slope_ci: (slope - z * se, slope + z * se), warnings })
}

fn weighted_slope(rows: &[MomentRow]) -> (f64, f64) {
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let w: Vec<f64> = rows.iter().map(|r| 1.0 / r.se.max(1e-300).powi(2)).collect();
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = rows.iter().zip(&w).map(|(r, w)| r.mean * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let sxy: f64 = x.iter().zip(rows).zip(&w).map(|((x, r), w)| w * (x - xm) * (r.mean - ym)).sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::config::CountertermSource;
    use crate::gibbs::cylinder::{dictionary, Outer};
    use crate::gibbs::measure::{mode_direction, Part};
    use crate::gibbs::sampler::sample_gibbs;
    use crate::spectral::ops::Symbol;

    fn gaussian() -> GibbsSpec {
        GibbsSpec { dim: 3, n: 1, counterterms: CountertermSource::Zero, mass: 1.0, coupling: 0.0 }
    }

    fn chain() -> ChainConfig {
        ChainConfig { step: 0.3, burn_in: 50, thin: 2, samples: 2000, chains: 2, seed: 3, proposal_noise: true }
    }

    #[test]
    fn symmetric_pair_and_zero_time_vanish() {
        let spec = GibbsSpec { dim: 3, n: 1, ..Default::default() };
        let dict = dictionary(3, 1);
        let starts: Vec<FourierField> = (0..20).map(|i| chain_start(&spec, 1, i).unwrap()).collect();
        let same = check_reversibility(&spec, &[(&dict[0], &dict[0])], 0.05, 0.01, &starts, 2).unwrap();
        assert_eq!(same[0].estimate, 0.0);
        let zero = check_reversibility(&spec, &[(&dict[0], &dict[1])], 0.0, 0.01, &starts, 2).unwrap();
        assert_eq!(zero[0].estimate, 0.0);
        assert!(check_reversibility(&spec, &[(&dict[0], &dict[1])], 0.1, 0.01, &starts[..1], 2).is_err());
    }

    #[test]
    fn stein_identity_on_gaussian_reduction() {
        let spec = gaussian();
        let s = sample_gibbs(&spec, &chain()).unwrap().pooled();
        let h = mode_direction(3, 1, &[1, 0, 0], Part::Cos);
        let f = CylinderFunction::new("lin", Outer::Linear, vec![h.clone()], 1.0);
        // per sample: 1 − 2μ y², so the mean is exactly 0 under the Gaussian
        let stat = check_ibp(&spec, &f, ("cos100", &h), &s);
        assert!(stat.pass, "{stat:?}");
        let one = CylinderFunction::new("one", Outer::Constant(1.0), vec![], 1.0);
        assert!(check_ibp(&spec, &one, ("cos100", &h), &s).pass);
    }

    #[test]
    fn variance_to_form_ratio_is_inverse_rate() {
        let spec = gaussian();
        let s = sample_gibbs(&spec, &chain()).unwrap().pooled();
        let k = [1, 1, 0];
        let h = mode_direction(3, 1, &k, Part::Sin);
        let f = CylinderFunction::new("lin", Outer::Linear, vec![h], 1.0);
        let est = poincare_estimate(&[f.clone()], &s, 200, 1).unwrap();
        let want = 1.0 / (Symbol::lattice_for(1).eval(&k) + 1.0);
        assert!(est.ci.0 < want && want < est.ci.1, "{est:?} want {want}");
        assert!((dirichlet_form_estimate(&f, &f, &s) - 0.5).abs() < 1e-12);
        let one = CylinderFunction::new("one", Outer::Constant(2.0), vec![], 1.0);
        assert_eq!(dirichlet_form_estimate(&one, &one, &s), 0.0);
        assert!(poincare_estimate(&[one], &s, 10, 1).is_err());
    }

    #[test]
    fn gaussian_second_moment_in_l2_sobolev_norm() {
        // E‖x‖²_{B^{α}_{2,2}} = Σ_j 2^{2jα} Σ_k w_j(k)² /(2μ_k) per complex coefficient
        let spec = GibbsSpec { dim: 2, n: 3, ..gaussian() };
        let index = BesovIndex::new(-0.55, 2.0, 2.0);
        let cfg = ChainConfig { samples: 3000, ..chain() };
        let report = moment_bound_report(&[spec.clone()], &cfg, 1, index).unwrap();
        let sym = Symbol::lattice_for(3);
        let p = crate::besov::partition::DyadicPartition::new(2, 3);
        let mut want = 0.0;
        for j in -1..=p.j_max() {
            let w = 2f64.powf(2.0 * j as f64 * -0.55);
            for k in crate::spectral::field::box_frequencies(2, 3) {
                want += w * crate::besov::partition::DyadicPartition::weight(j, &k).powi(2) * 0.5 / (sym.eval(&k) + 1.0);
            }
        }
        let r = &report.rows[0];
        assert!((r.mean - want).abs() < 3.5 * r.se, "{} vs {want} (se {})", r.mean, r.se);
    }
}
