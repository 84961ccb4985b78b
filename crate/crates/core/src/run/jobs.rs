use rayon::prelude::*;

use crate::besov::norm::{BesovIndex, Quadrature};
use crate::dynamics::config::{CountertermSource, SimConfig, Variant};
use crate::dynamics::record::{simulate_ensemble, TestFunction};
use crate::dynamics::refine::ladder_distances;
use crate::error::{Error, Result};
use crate::gibbs::checks::{
    check_ibp, check_invariance, evolve_starts, moment_bound_report, poincare_estimate, reversibility_statistics, MomentReport,
};
use crate::gibbs::cylinder::{dictionary, ibp_directions, CylinderFunction, DICTIONARY_VERSION};
use crate::gibbs::energy::energy_solution_diagnostics;
use crate::gibbs::measure::{mode_direction, GibbsSpec, Part};
use crate::gibbs::sampler::{sample_gibbs, ChainConfig, GibbsSamples};
use crate::noise::driver::{canonical_modes, derive_seed, tag, ModeDriver};
use crate::noise::ou::ou_stationary_sample;
use crate::renorm::constants::{c0_lattice, c0_mollified, c1_lattice, compute_c1_tilde, mollified_cutoff, TwoLoop};
use crate::renorm::dashboard::tree_norm_report;
use crate::renorm::trees::{build_trees, TreeConfig};
use crate::renorm::wick::ProductRule;
use crate::run::config::{ConstantKind, InitialState, RunConfig};
use crate::run::output::{num, reports_artifact, Artifact, CsvTable, TestReport};
use crate::spectral::field::FourierField;
use crate::spectral::io::FieldArchive;
use crate::spectral::lattice::ext_inverse;
use crate::spectral::ops::Symbol;
use crate::stats::{bootstrap, median, Estimate};

/// Labels of the seed-splitting tree below the master seed, one per consumer.
pub mod purpose {
    pub const SAMPLE_GIBBS: u64 = 1;
    pub const REVERSIBILITY: u64 = 2;
    pub const IBP: u64 = 3;
    pub const ENERGY: u64 = 4;
    pub const MOMENTS: u64 = 5;
    pub const POINCARE: u64 = 6;
    pub const TREES: u64 = 7;
    pub const REFINE: u64 = 8;
    pub const SIMULATE: u64 = 9;
}

/// Statistical suites of `check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Reversibility,
    Ibp,
    Energy,
    Moments,
    Poincare,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Reversibility, Suite::Ibp, Suite::Energy, Suite::Moments, Suite::Poincare];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Reversibility => "reversibility",
            Suite::Ibp => "ibp",
            Suite::Energy => "energy",
            Suite::Moments => "moments",
            Suite::Poincare => "poincare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Job {
    Constants,
    SampleGibbs,
    Simulate,
    Trees,
    Check(Suite),
    Refine,
}

impl Job {
    pub fn subcommand(self) -> String {
        match self {
            Job::Constants => "constants".into(),
            Job::SampleGibbs => "sample-gibbs".into(),
            Job::Simulate => "simulate".into(),
            Job::Trees => "trees".into(),
            Job::Check(s) => format!("check --suite {}", s.name()),
            Job::Refine => "refine".into(),
        }
    }
}

/// Everything a job produced, in write order.
#[derive(Clone, Debug, Default)]
pub struct JobOutput {
    pub artifacts: Vec<Artifact>,
    pub reports: Vec<TestReport>,
    pub warnings: Vec<String>,
}

impl JobOutput {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    pub fn report(&self, test: &str) -> Option<&TestReport> {
        self.reports.iter().find(|r| r.test == test)
    }
}

pub fn run_job(cfg: &RunConfig, job: Job) -> Result<JobOutput> {
    cfg.validate()?;
    match job {
        Job::Constants => constants_job(cfg),
        Job::SampleGibbs => sample_gibbs_job(cfg),
        Job::Simulate => simulate_job(cfg),
        Job::Trees => trees_job(cfg),
        Job::Check(s) => check_job(cfg, s),
        Job::Refine => refine_job(cfg),
    }
}

/// Chain settings that deliver at least `total` states across the configured chains.
fn chain_for(cfg: &RunConfig, purpose: u64, total: usize) -> ChainConfig {
    let mut c = cfg.chain_config(purpose);
    c.samples = total.div_ceil(c.chains);
    c
}

/// Human-readable work plan, printed by `--dry-run`.
pub fn plan(cfg: &RunConfig, job: Job) -> Vec<String> {
    let m = &cfg.model;
    match job {
        Job::Constants => vec![format!(
            "constants: kind {}, d = {}, ladder {:?}",
            cfg.constants.kind.name(),
            m.dim,
            cfg.constants.ladder
        )],
        Job::SampleGibbs => {
            let c = &cfg.chain;
            vec![format!(
                "sample-gibbs: d = {}, N = {}, {} chains × {} samples (burn-in {}, thin {}, step {})",
                m.dim, m.n, c.chains, c.samples, c.burn_in, c.thin, c.step
            )]
        }
        Job::Simulate => {
            let s = cfg.simulation();
            vec![format!(
                "simulate: {:?} variant, d = {}, N = {}, {} members × {} steps of {} (stride {}), {} test functions",
                s.variant,
                s.dim,
                s.n,
                s.ensemble,
                s.steps(),
                s.delta,
                s.stride,
                cfg.simulate.test_modes.len()
            )]
        }
        Job::Trees => {
            let t = &cfg.trees;
            vec![format!(
                "trees: cutoffs {:?}, {} realizations each × 2 (renormalized and raw), {} steps of {} (norms every {})",
                t.ladder, t.realizations, t.steps, t.delta, t.stride
            )]
        }
        Job::Check(suite) => {
            let ck = &cfg.check;
            let c = &cfg.chain;
            let line = match suite {
                Suite::Reversibility => {
                    let r = &ck.reversibility;
                    format!(
                        "check reversibility: N = {}, {} starts from {} chains × {} samples, t = {} in {} steps, 5 pairs, 4 invariance observables",
                        r.n,
                        r.starts,
                        c.chains,
                        r.starts.div_ceil(c.chains),
                        r.t,
                        (r.t / r.delta).round(),
                    )
                }
                Suite::Ibp => format!(
                    "check ibp: N = {}, {} samples from {} chains, 5 functions × 3 directions",
                    ck.ibp.n, ck.ibp.samples, c.chains
                ),
                Suite::Energy => {
                    let e = &ck.energy;
                    format!(
                        "check energy: N = {}, {} stationary paths × {} steps of {} and × {} steps of {}",
                        e.n,
                        e.paths,
                        (e.horizon / e.delta).round(),
                        e.delta,
                        (e.horizon / e.delta).round() as usize * e.refine_factor,
                        e.delta / e.refine_factor as f64
                    )
                }
                Suite::Moments => {
                    let mo = &ck.moments;
                    format!(
                        "check moments: cutoffs {:?}, {} samples each, z = {} and control z = {}, power {}",
                        mo.ladder, mo.samples, mo.z, mo.control_z, mo.power
                    )
                }
                Suite::Poincare => format!(
                    "check poincare: N = {}, {} samples, {} bootstrap replicates, dictionary {}",
                    ck.poincare.n, ck.poincare.samples, ck.poincare.reps, DICTIONARY_VERSION
                ),
            };
            vec![line]
        }
        Job::Refine => {
            let r = &cfg.refine;
            vec![format!(
                "refine: cutoffs {:?}, {} coupled members, {} steps of {}, {:?} variant",
                r.ladder,
                r.pairs,
                (r.horizon / r.delta).round(),
                r.delta,
                r.variant
            )]
        }
    }
}

/// One row of a counterterm table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantRow {
    pub kind: ConstantKind,
    pub eps: f64,
    pub cutoff: usize,
    pub value: f64,
}

pub fn constant_rows(kind: ConstantKind, dim: usize, ladder: &[usize]) -> Vec<ConstantRow> {
    ladder
        .par_iter()
        .map(|&l| {
            let lattice_eps = 2.0 / (2 * l + 1) as f64;
            let inv = 1.0 / l as f64;
            let (eps, cutoff, value) = match kind {
                ConstantKind::C0 => (lattice_eps, l, c0_lattice(dim, l)),
                ConstantKind::C0Mollified => (inv, mollified_cutoff(inv), c0_mollified(dim, inv)),
                ConstantKind::C1Tilde => (inv, l, compute_c1_tilde(dim, inv, l)),
                ConstantKind::C1Lattice => (lattice_eps, l, c1_lattice(dim, l)),
            };
            ConstantRow { kind, eps, cutoff, value }
        })
        .collect()
}

pub const CONSTANT_COLUMNS: [&str; 4] = ["kind", "eps", "cutoff", "value"];

fn constants_job(cfg: &RunConfig) -> Result<JobOutput> {
    let c = &cfg.constants;
    let digest = cfg.digest();
    let mut t = CsvTable::new(&CONSTANT_COLUMNS);
    for r in constant_rows(c.kind, cfg.model.dim, &c.ladder) {
        t.push(vec![r.kind.name().into(), num(r.eps), r.cutoff.to_string(), num(r.value)]);
    }
    Ok(JobOutput { artifacts: vec![t.artifact(format!("constants_{}.csv", c.kind.name()), &digest)], ..Default::default() })
}

fn sampler_warnings(s: &GibbsSamples, label: &str) -> Vec<String> {
    let mut w: Vec<String> = s.warnings.iter().map(|x| format!("{label}: {x}")).collect();
    if s.chains.len() > 1 && s.chains.iter().all(|c| c.len() > 3) {
        let r = s.max_r_hat();
        if r > 1.05 {
            w.push(format!("{label}: largest mode r-hat {r:.3} above 1.05"));
        }
    }
    w
}

pub const MODE_COLUMNS: [&str; 7] = ["k1", "k2", "k3", "mean_sq", "se", "r_hat", "ess"];

fn sample_gibbs_job(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let spec = cfg.model.gibbs_spec(cfg.model.n);
    let chain = cfg.chain_config(purpose::SAMPLE_GIBBS);
    let s = sample_gibbs(&spec, &chain)?;
    let mut chains = CsvTable::new(&["chain", "samples", "acceptance"]);
    for (i, (c, a)) in s.chains.iter().zip(&s.acceptance).enumerate() {
        chains.push(vec![i.to_string(), c.len().to_string(), num(*a)]);
    }
    let mut modes = CsvTable::new(&MODE_COLUMNS);
    let pooled = s.pooled();
    for k in canonical_modes(spec.dim, spec.n.min(1), true) {
        let xs: Vec<f64> = pooled.iter().map(|x| x.get(&k).norm_sqr()).collect();
        let e = Estimate::autocorrelated(&xs);
        let ess = s.ess(|x| x.get(&k).norm_sqr());
        modes.push(vec![k[0].to_string(), k[1].to_string(), k[2].to_string(), num(e.mean), num(e.se), num(s.mode_r_hat(&k)), num(ess)]);
    }
    let mut archive = FieldArchive {
        metadata: vec![("config_digest".into(), digest.clone()), ("chains".into(), s.chains.len().to_string())],
        frames: Vec::new(),
    };
    for (i, x) in pooled.into_iter().enumerate() {
        archive.frames.push((i as f64, x));
    }
    let mut bytes = Vec::new();
    archive.write_to(&mut bytes)?;
    Ok(JobOutput {
        artifacts: vec![
            chains.artifact("gibbs_chains.csv", &digest),
            modes.artifact("gibbs_modes.csv", &digest),
            Artifact { name: "gibbs_samples.phf".into(), bytes },
        ],
        reports: vec![],
        warnings: sampler_warnings(&s, "sample-gibbs"),
    })
}

/// The simulation with its counterterms evaluated once and pinned.
pub fn pinned(sim: &SimConfig) -> SimConfig {
    let c = sim.constants();
    SimConfig { counterterms: CountertermSource::Manual { c0: c.c0, c1: c.c1 }, ..sim.clone() }
}

pub const ACCUMULATOR_COLUMNS: [&str; 6] = ["time", "phi_id", "H", "M", "QV_M", "QV_H"];

fn simulate_job(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let sim = pinned(&cfg.simulation());
    sim.validate()?;
    let tests: Vec<TestFunction> = cfg
        .simulate
        .test_modes
        .iter()
        .map(|k| {
            let id = format!("cos_{}_{}_{}", k[0], k[1], k[2]);
            let cutoff = k.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0).max(1);
            TestFunction::new(id, mode_direction(sim.dim, cutoff, k, Part::Cos))
        })
        .collect();
    let init_seed = derive_seed(cfg.seed, &[tag::INITIAL, purpose::SIMULATE]);
    let initial = |m: usize| -> Result<FourierField> {
        match cfg.simulate.initial {
            InitialState::Zero => Ok(FourierField::zeros(sim.dim, sim.n, sim.mean_zero)),
            InitialState::StationaryOu => Ok(ou_stationary_sample(
                &ModeDriver::new(init_seed, tag::INITIAL),
                sim.dim,
                sim.n,
                sim.symbol(),
                sim.mass,
                sim.mean_zero,
                m as u64,
            )?
            .field),
        }
    };
    let records = simulate_ensemble(&sim, initial, &tests)?;
    let mut artifacts = Vec::new();
    for (m, rec) in records.iter().enumerate() {
        let archive = FieldArchive {
            metadata: vec![
                ("config_digest".into(), digest.clone()),
                ("member".into(), m.to_string()),
                ("driver_seed".into(), rec.driver_seed.to_string()),
            ],
            frames: rec.times.iter().copied().zip(rec.snapshots.iter().cloned()).collect(),
        };
        let mut bytes = Vec::new();
        archive.write_to(&mut bytes)?;
        artifacts.push(Artifact { name: format!("trajectory_m{m}.phf"), bytes });
        let mut t = CsvTable::new(&ACCUMULATOR_COLUMNS);
        for r in rec.accumulator_rows() {
            t.push(vec![num(r.time), r.phi_id, num(r.h), num(r.m), num(r.qv_m), num(r.qv_h)]);
        }
        artifacts.push(t.artifact(format!("accumulators_m{m}.csv"), &digest));
    }
    Ok(JobOutput { artifacts, ..Default::default() })
}

/// One norm of one tree realization.
#[derive(Clone, Debug, PartialEq)]
pub struct DashboardRow {
    pub run_id: usize,
    pub n: usize,
    pub seed: u64,
    pub name: String,
    pub alpha: f64,
    pub value: f64,
}

pub const DASHBOARD_COLUMNS: [&str; 6] = ["run_id", "N", "seed", "norm_name", "alpha", "value"];

/// Tree configuration of the mollified equation at cutoff `n` (`ε = 1/N`, Galerkin products).
pub fn dashboard_tree_config(cfg: &RunConfig, n: usize, renormalized: bool) -> TreeConfig {
    let eps = 1.0 / n as f64;
    TreeConfig {
        dim: cfg.model.dim,
        cutoff: n,
        symbol: Symbol::Continuum,
        delta: cfg.trees.delta,
        steps: cfg.trees.steps,
        stride: cfg.trees.stride,
        rule: ProductRule::Galerkin,
        mollifier_eps: Some(eps),
        wick_constant: c0_mollified(cfg.model.dim, eps),
        coupling: cfg.model.coupling,
        mass: cfg.model.mass,
        mean_zero: cfg.model.mean_zero,
        renormalized,
    }
}

/// Dashboard rows for every cutoff and realization, renormalized entries first.
pub fn dashboard_rows(cfg: &RunConfig) -> Result<(Vec<DashboardRow>, Vec<Artifact>)> {
    let t = &cfg.trees;
    let params = cfg.model.params();
    let base = derive_seed(cfg.seed, &[tag::ENSEMBLE, purpose::TREES]);
    let mut rows = Vec::new();
    let mut archives = Vec::new();
    for &n in &t.ladder {
        let two_loop = TwoLoop::mollified(cfg.model.dim, 1.0 / n as f64, n);
        let per: Vec<(Vec<DashboardRow>, Option<Vec<Artifact>>)> = (0..t.realizations)
            .into_par_iter()
            .map(|r| {
                let driver = ModeDriver::brownian(derive_seed(base, &[r as u64]));
                let start_driver = ModeDriver::new(derive_seed(cfg.seed, &[tag::INITIAL, purpose::TREES]), tag::INITIAL);
                let tc = dashboard_tree_config(cfg, n, true);
                let start = ou_stationary_sample(&start_driver, tc.dim, n, tc.symbol, tc.mass, tc.mean_zero, r as u64)?.field;
                let mut out = Vec::new();
                let mut files = None;
                for renorm in [true, false] {
                    let tc = dashboard_tree_config(cfg, n, renorm);
                    let trees = build_trees(&tc, &start, &driver, 0)?;
                    let tl = renorm.then_some(&two_loop);
                    for e in tree_norm_report(&trees, &params, tl, Quadrature::Nyquist)? {
                        out.push(DashboardRow { run_id: r, n, seed: driver.seed(), name: e.name, alpha: e.alpha, value: e.value });
                    }
                    if renorm && r == 0 && cfg.trees.archive {
                        let mut list = Vec::new();
                        for (label, fields) in [("phi1", &trees.phi1), ("wick2", &trees.wick2), ("phi2", &trees.phi2), ("k", &trees.k)] {
                            let a = FieldArchive {
                                metadata: vec![("tree".into(), label.into()), ("N".into(), n.to_string())],
                                frames: trees.times.iter().copied().zip(fields.iter().cloned()).collect(),
                            };
                            let mut bytes = Vec::new();
                            a.write_to(&mut bytes)?;
                            list.push(Artifact { name: format!("trees_n{n}_{label}.phf"), bytes });
                        }
                        files = Some(list);
                    }
                }
                Ok((out, files))
            })
            .collect::<Result<_>>()?;
        for (r, f) in per {
            rows.extend(r);
            archives.extend(f.into_iter().flatten());
        }
    }
    Ok((rows, archives))
}

/// Median of one dashboard entry at two cutoffs.
#[derive(Clone, Debug, PartialEq)]
pub struct Stability {
    pub name: String,
    pub median_lo: f64,
    pub median_hi: f64,
}

impl Stability {
    pub fn ratio(&self) -> f64 {
        self.median_hi / self.median_lo
    }
}

pub fn dashboard_stability(rows: &[DashboardRow], n_lo: usize, n_hi: usize) -> Vec<Stability> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.name.as_str()) {
            names.push(&r.name);
        }
    }
    let med = |name: &str, n: usize| {
        let v: Vec<f64> = rows.iter().filter(|r| r.name == name && r.n == n).map(|r| r.value).collect();
        if v.is_empty() { f64::NAN } else { median(&v) }
    };
    names
        .into_iter()
        .map(|name| Stability { name: name.to_string(), median_lo: med(name, n_lo), median_hi: med(name, n_hi) })
        .collect()
}

fn trees_job(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let (rows, archives) = dashboard_rows(cfg)?;
    let mut t = CsvTable::new(&DASHBOARD_COLUMNS);
    for r in &rows {
        t.push(vec![r.run_id.to_string(), r.n.to_string(), r.seed.to_string(), r.name.clone(), num(r.alpha), num(r.value)]);
    }
    let mut artifacts = vec![t.artifact("dashboard.csv", &digest)];
    let ladder = &cfg.trees.ladder;
    if ladder.len() >= 2 {
        let mut s = CsvTable::new(&["norm_name", "N_lo", "N_hi", "median_lo", "median_hi", "ratio"]);
        for w in ladder.windows(2) {
            for st in dashboard_stability(&rows, w[0], w[1]) {
                s.push(vec![st.name.clone(), w[0].to_string(), w[1].to_string(), num(st.median_lo), num(st.median_hi), num(st.ratio())]);
            }
        }
        artifacts.push(s.artifact("dashboard_stability.csv", &digest));
    }
    artifacts.extend(archives);
    Ok(JobOutput { artifacts, ..Default::default() })
}

fn check_job(cfg: &RunConfig, suite: Suite) -> Result<JobOutput> {
    let mut out = match suite {
        Suite::Reversibility => reversibility_suite(cfg)?,
        Suite::Ibp => ibp_suite(cfg)?,
        Suite::Energy => energy_suite(cfg)?,
        Suite::Moments => moments_suite(cfg)?,
        Suite::Poincare => poincare_suite(cfg)?,
    };
    out.artifacts.insert(0, reports_artifact(format!("check_{}.json", suite.name()), &out.reports));
    Ok(out)
}

fn stationary_samples(cfg: &RunConfig, spec: &GibbsSpec, purpose: u64, total: usize, label: &str) -> Result<(Vec<FourierField>, Vec<String>)> {
    let s = sample_gibbs(spec, &chain_for(cfg, purpose, total))?;
    let warnings = sampler_warnings(&s, label);
    let mut pooled = s.pooled();
    pooled.truncate(total);
    Ok((pooled, warnings))
}

/// Observables of the invariance comparison.
fn invariance_observables(spec: &GibbsSpec) -> Vec<(String, Box<dyn Fn(&FourierField) -> f64 + Sync>)> {
    let n = spec.n;
    let vol = spec.eps().powi(spec.dim as i32);
    let lattice_moment = move |p: i32| move |x: &FourierField| ext_inverse(x, n).values().iter().map(|v| v.powi(p)).sum::<f64>() * vol;
    vec![
        ("invariance/zero_mode_sq".into(), Box::new(|x: &FourierField| x.get(&[0; 3]).norm_sqr())),
        ("invariance/mode_100_sq".into(), Box::new(|x: &FourierField| x.get(&[1, 0, 0]).norm_sqr())),
        ("invariance/lattice_x2".into(), Box::new(lattice_moment(2))),
        ("invariance/lattice_x4".into(), Box::new(lattice_moment(4))),
    ]
}

fn reversibility_suite(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let r = &cfg.check.reversibility;
    let spec = cfg.model.gibbs_spec(r.n);
    let (starts, warnings) = stationary_samples(cfg, &spec, purpose::REVERSIBILITY, r.starts, "reversibility")?;
    let seed = derive_seed(cfg.seed, &[tag::ENSEMBLE, purpose::REVERSIBILITY]);
    let ends = evolve_starts(&spec, r.t, r.delta, &starts, seed)?;
    let dict = dictionary(spec.dim, spec.n);
    let pairs: Vec<(&CylinderFunction, &CylinderFunction)> = (0..dict.len()).map(|i| (&dict[i], &dict[(i + 1) % dict.len()])).collect();
    let mut reports: Vec<TestReport> =
        reversibility_statistics(&pairs, &starts, &ends).iter().map(|s| TestReport::from_statistic(s, &digest)).collect();
    for rep in reports.iter_mut() {
        rep.test = format!("reversibility/{}", rep.test);
    }
    let obs = invariance_observables(&spec);
    let refs: Vec<(&str, &dyn Fn(&FourierField) -> f64)> =
        obs.iter().map(|(n, f)| (n.as_str(), f.as_ref() as &dyn Fn(&FourierField) -> f64)).collect();
    reports.extend(check_invariance(&refs, &starts, &ends).iter().map(|s| TestReport::from_statistic(s, &digest)));
    Ok(JobOutput { artifacts: vec![], reports, warnings })
}

fn ibp_suite(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let spec = cfg.model.gibbs_spec(cfg.check.ibp.n);
    let (samples, warnings) = stationary_samples(cfg, &spec, purpose::IBP, cfg.check.ibp.samples, "ibp")?;
    let dict = dictionary(spec.dim, spec.n);
    let dirs = ibp_directions(spec.dim, spec.n);
    let reports = dict
        .iter()
        .flat_map(|f| dirs.iter().map(move |(name, h)| (f, name, h)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(f, name, h)| {
            let mut r = TestReport::from_statistic(&check_ibp(&spec, f, (name, h), &samples), &digest);
            r.test = format!("ibp/{}", r.test);
            r
        })
        .collect();
    Ok(JobOutput { artifacts: vec![], reports, warnings })
}

fn energy_suite(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let e = &cfg.check.energy;
    let spec = cfg.model.gibbs_spec(e.n);
    // one chain per path, one state each: independent stationary starts
    let mut chain = cfg.chain_config(purpose::ENERGY);
    chain.chains = e.paths;
    chain.samples = 1;
    let s = sample_gibbs(&spec, &chain)?;
    let warnings: Vec<String> = s.warnings.iter().map(|w| format!("energy: {w}")).collect();
    let starts = s.pooled();
    let (dim, n) = (spec.dim, spec.n);
    let mut oob = [0i64; 3];
    oob[0] = n as i64 + 1;
    let tests = vec![
        TestFunction::new("cos_1_0_0", mode_direction(dim, n, &[1, 0, 0], Part::Cos)),
        TestFunction::new("sin_0_1_1", mode_direction(dim, n, &[0, 1, 1], Part::Sin)),
        TestFunction::new("out_of_band", mode_direction(dim, n + 1, &oob, Part::Cos)),
    ];
    let seed = derive_seed(cfg.seed, &[tag::ENSEMBLE, purpose::ENERGY]);
    let run = |delta: f64| -> Result<_> {
        let mut sim = spec.dynamics(delta, e.horizon, seed);
        sim.stride = ((e.horizon / delta).round() as usize / e.records).max(1);
        let records: Vec<_> = starts
            .par_iter()
            .enumerate()
            .map(|(i, x0)| crate::dynamics::record::simulate(&sim, x0, i, &tests))
            .collect::<Result<_>>()?;
        energy_solution_diagnostics(&records)
    };
    let coarse = run(e.delta)?;
    let fine = run(e.delta / e.refine_factor as f64)?;
    let mut reports = Vec::new();
    let mut table = CsvTable::new(&["phi_id", "reversed", "delta", "expected_qv", "qv_m", "qv_m_se", "qv_h", "moment_drift_z"]);
    for rep in [&coarse, &fine] {
        for en in &rep.entries {
            table.push(vec![
                en.phi_id.clone(),
                en.reversed.to_string(),
                num(rep.delta),
                num(en.expected_qv),
                num(en.qv_m),
                num(en.qv_m_se),
                num(en.qv_h),
                num(en.moment_drift_z),
            ]);
        }
    }
    for en in &coarse.entries {
        let tag = format!("{}{}", en.phi_id, if en.reversed { "~rev" } else { "" });
        if en.expected_qv == 0.0 {
            reports.push(TestReport::at_most(format!("energy/out_of_band_qv/{tag}"), en.qv_m + en.qv_h, 0.0, 0.0, &digest));
            continue;
        }
        let f = fine.entry(&en.phi_id, en.reversed).expect("same test functions at both steps");
        reports.push(TestReport::at_most(
            format!("energy/qv_m_rel_err/{tag}"),
            en.qv_m_relative_error(),
            en.qv_m_se / en.expected_qv,
            0.05,
            &digest,
        ));
        reports.push(TestReport::at_most(format!("energy/qv_h_ratio/{tag}"), en.qv_h_ratio(), 0.0, 0.01, &digest));
        let shrink = f.qv_h / en.qv_h;
        reports.push(TestReport {
            test: format!("energy/qv_h_refined_over_coarse/{tag}"),
            estimate: shrink,
            se: 0.0,
            threshold: 1.0,
            pass: shrink < 1.0,
            config_digest: digest.clone(),
        });
        reports.push(TestReport::at_most(format!("energy/moment_drift_z/{tag}"), en.moment_drift_z, 0.0, 3.0, &digest));
    }
    Ok(JobOutput { artifacts: vec![table.artifact("energy.csv", &digest)], reports, warnings })
}

fn moments_suite(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let mo = &cfg.check.moments;
    let ladder: Vec<GibbsSpec> = mo.ladder.iter().map(|&n| cfg.model.gibbs_spec(n)).collect();
    let mut chain = cfg.chain_config(purpose::MOMENTS);
    chain.samples = mo.samples;
    let main = moment_bound_report(&ladder, &chain, mo.power, BesovIndex::holder(-mo.z))?;
    let control = moment_bound_report(&ladder, &chain, mo.power, BesovIndex::holder(-mo.control_z))?;
    let mut table = CsvTable::new(&["alpha", "N", "mean", "se", "acceptance"]);
    for rep in [&main, &control] {
        for r in &rep.rows {
            table.push(vec![num(rep.alpha), r.n.to_string(), num(r.mean), num(r.se), num(r.acceptance)]);
        }
    }
    let report = |rep: &MomentReport, label: &str, pass: bool| TestReport {
        test: format!("moments/{label}_slope/z={}", -rep.alpha),
        estimate: rep.slope,
        se: (rep.slope_ci.1 - rep.slope_ci.0) / (2.0 * 1.959_963_984_540_054),
        threshold: rep.slope_ci.0,
        pass,
        config_digest: digest.clone(),
    };
    let warnings = main.warnings.iter().chain(&control.warnings).map(|w| format!("moments: {w}")).collect();
    Ok(JobOutput {
        artifacts: vec![table.artifact("moments.csv", &digest)],
        reports: vec![report(&main, "uniform", main.uniform()), report(&control, "control_grows", control.grows())],
        warnings,
    })
}

fn poincare_suite(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let p = &cfg.check.poincare;
    let spec = cfg.model.gibbs_spec(p.n);
    let (samples, warnings) = stationary_samples(cfg, &spec, purpose::POINCARE, p.samples, "poincare")?;
    let dict = dictionary(spec.dim, spec.n);
    let est = poincare_estimate(&dict, &samples, p.reps, derive_seed(cfg.seed, &[tag::BOOTSTRAP, purpose::POINCARE]))?;
    let mut table = CsvTable::new(&["function", "var_over_form"]);
    for (name, r) in &est.ratios {
        table.push(vec![name.clone(), num(*r)]);
    }
    // the estimate is a lower bound on the constant; no convergence hypothesis is asserted
    let pass = est.constant.is_finite() && est.constant > 0.0 && est.ci.0 <= est.constant && est.constant <= est.ci.1;
    let reports = vec![TestReport {
        test: format!("poincare/lower_bound/{}", est.best),
        estimate: est.constant,
        se: (est.ci.1 - est.ci.0) / (2.0 * 1.959_963_984_540_054),
        threshold: est.ci.1,
        pass,
        config_digest: digest.clone(),
    }];
    Ok(JobOutput { artifacts: vec![table.artifact("poincare.csv", &digest)], reports, warnings })
}

/// Refinement level at cutoff `n` with pinned constants.
pub fn refine_level(cfg: &RunConfig, n: usize) -> SimConfig {
    let r = &cfg.refine;
    let mut sim = cfg.sim_config(n, r.delta, r.horizon, r.stride);
    sim.variant = r.variant;
    sim.ensemble = r.pairs;
    sim.seed = derive_seed(cfg.seed, &[tag::ENSEMBLE, purpose::REFINE]);
    if r.variant == Variant::Mollified {
        sim.continuum_symbol = true;
    }
    pinned(&sim)
}

/// Sup-in-time distances, `out[i][p]` for ladder step `i` and member `p`.
pub fn refine_distances(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let levels: Vec<SimConfig> = cfg.refine.ladder.iter().map(|&n| refine_level(cfg, n)).collect();
    for l in &levels {
        l.validate()?;
    }
    let zero = FourierField::zeros(levels[0].dim, levels[0].n, levels[0].mean_zero);
    let per_member: Vec<Vec<f64>> = (0..cfg.refine.pairs)
        .into_par_iter()
        .map(|p| Ok(ladder_distances(&levels, &zero, p)?.iter().map(|c| c.sup()).collect()))
        .collect::<Result<_>>()?;
    Ok((0..levels.len() - 1).map(|i| per_member.iter().map(|m| m[i]).collect()).collect())
}

pub const NORM_COLUMNS: [&str; 6] = ["field_id", "alpha", "p", "q", "value", "partition_id"];

fn refine_job(cfg: &RunConfig) -> Result<JobOutput> {
    let digest = cfg.digest();
    let r = &cfg.refine;
    let dist = refine_distances(cfg)?;
    let alpha = -cfg.model.z;
    let mut norms = CsvTable::new(&NORM_COLUMNS);
    for (i, w) in r.ladder.windows(2).enumerate() {
        for (p, v) in dist[i].iter().enumerate() {
            norms.push(vec![
                format!("refine/{}-{}/m{p}", w[0], w[1]),
                num(alpha),
                "inf".into(),
                "inf".into(),
                num(*v),
                format!("dyadic/d{}/N{}", cfg.model.dim, w[1]),
            ]);
        }
    }
    // joint bootstrap over members keeps the correlation between consecutive levels
    let idx: Vec<f64> = (0..r.pairs).map(|p| p as f64).collect();
    let boot_seed = derive_seed(cfg.seed, &[tag::BOOTSTRAP, purpose::REFINE]);
    let med_of = |i: usize, ids: &[f64]| median(&ids.iter().map(|&p| dist[i][p as usize]).collect::<Vec<_>>());
    let mut summary = CsvTable::new(&["N_coarse", "N_fine", "pairs", "median", "median_se"]);
    let mut reports = Vec::new();
    for (i, w) in r.ladder.windows(2).enumerate() {
        let reps = bootstrap(&idx, r.bootstrap, derive_seed(boot_seed, &[i as u64]), |ids| med_of(i, ids));
        summary.push(vec![w[0].to_string(), w[1].to_string(), r.pairs.to_string(), num(median(&dist[i])), num(sd(&reps))]);
    }
    for i in 0..dist.len().saturating_sub(1) {
        let diff = median(&dist[i + 1]) - median(&dist[i]);
        let reps = bootstrap(&idx, r.bootstrap, derive_seed(boot_seed, &[100 + i as u64]), |ids| med_of(i + 1, ids) - med_of(i, ids));
        let se = sd(&reps);
        let l = &r.ladder;
        reports.push(TestReport::at_most(
            format!("refine/median_decrease/{}-{}_vs_{}-{}", l[i + 1], l[i + 2], l[i], l[i + 1]),
            diff,
            se,
            -3.0 * se,
            &digest,
        ));
    }
    let mut artifacts = vec![reports_artifact("refine.json", &reports)];
    artifacts.push(norms.artifact("refine_norms.csv", &digest));
    artifacts.push(summary.artifact("refine_summary.csv", &digest));
    Ok(JobOutput { artifacts, reports, warnings: vec![] })
}

fn sd(xs: &[f64]) -> f64 {
    crate::stats::variance(xs).sqrt()
}

/// Maps an error to the process exit status of the command-line front end.
pub fn exit_status(e: &Error) -> i32 {
    match e {
        Error::Validation(_) => 2,
        Error::Instability { .. } => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::output::read_csv;

    fn small() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.model.n = 2;
        cfg.simulate.horizon = 0.02;
        cfg.simulate.ensemble = 2;
        cfg.chain.samples = 20;
        cfg.chain.burn_in = 10;
        cfg
    }

    #[test]
    fn c1_tilde_ladder_increases() {
        let mut cfg = small();
        cfg.constants.kind = ConstantKind::C1Tilde;
        cfg.constants.ladder = vec![8, 16, 32];
        let out = run_job(&cfg, Job::Constants).unwrap();
        let rows = read_csv(&out.artifacts[0].bytes, &CONSTANT_COLUMNS, Some(&cfg.digest())).unwrap();
        assert_eq!(rows.len(), 3);
        let v: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    }

    #[test]
    fn simulate_writes_archives_and_accumulators() {
        let cfg = small();
        let out = run_job(&cfg, Job::Simulate).unwrap();
        let names: Vec<&str> = out.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["trajectory_m0.phf", "accumulators_m0.csv", "trajectory_m1.phf", "accumulators_m1.csv"]);
        let rows = read_csv(&out.artifacts[1].bytes, &ACCUMULATOR_COLUMNS, Some(&cfg.digest())).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        let a = FieldArchive::read_from(&out.artifacts[0].bytes[..]).unwrap();
        assert_eq!(a.frames.len(), 3);
        // reruns are byte-identical
        let again = run_job(&cfg, Job::Simulate).unwrap();
        assert_eq!(out.artifacts, again.artifacts);
    }

    #[test]
    fn invalid_configs_are_rejected_before_work() {
        let mut cfg = small();
        cfg.model.z = 0.7;
        let err = run_job(&cfg, Job::Constants).unwrap_err();
        assert_eq!(exit_status(&err), 2);
    }

    #[test]
    fn dry_run_plan_names_ensemble_sizes() {
        let lines = plan(&RunConfig::default(), Job::Check(Suite::Reversibility));
        assert!(lines[0].contains("10000 starts"), "{lines:?}");
    }

    #[test]
    fn suites_parse_by_name() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("nope"), None);
    }
}
