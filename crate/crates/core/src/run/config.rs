use serde::{Deserialize, Serialize};

use crate::dynamics::config::{hex_digest, CountertermSource, SimConfig, Variant};
use crate::error::{Error, Result};
use crate::gibbs::measure::GibbsSpec;
use crate::gibbs::sampler::ChainConfig;
use crate::noise::driver::{derive_seed, tag};
use crate::spectral::params::RegularityParams;

/// How the counterterms of a run are chosen; `manual` reads `c0`, `c1` from the model section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountertermMode {
    Computed,
    Zero,
    Manual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub dim: usize,
    pub n: usize,
    pub mass: f64,
    pub coupling: f64,
    pub variant: Variant,
    pub counterterms: CountertermMode,
    pub c0: f64,
    pub c1: f64,
    pub mean_zero: bool,
    pub continuum_symbol: bool,
    pub z: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = RegularityParams::default();
        Self {
            dim: 3,
            n: 4,
            mass: 1.0,
            // weak coupling in three dimensions
            coupling: 0.1,
            variant: Variant::Lattice,
            counterterms: CountertermMode::Computed,
            c0: 0.0,
            c1: 0.0,
            mean_zero: false,
            continuum_symbol: false,
            z: p.z,
            kappa: p.kappa,
            gamma: p.gamma,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> RegularityParams {
        RegularityParams::new(self.z, self.kappa, self.gamma)
    }

    pub fn counterterm_source(&self) -> CountertermSource {
        match self.counterterms {
            CountertermMode::Computed => CountertermSource::Computed,
            CountertermMode::Zero => CountertermSource::Zero,
            CountertermMode::Manual => CountertermSource::Manual { c0: self.c0, c1: self.c1 },
        }
    }

    /// Lattice measure at cutoff `n` with this model's mass, coupling and counterterms.
    pub fn gibbs_spec(&self, n: usize) -> GibbsSpec {
        GibbsSpec { dim: self.dim, n, counterterms: self.counterterm_source(), mass: self.mass, coupling: self.coupling }
    }
}

/// Start of every simulated member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Zero,
    /// Exact draw of the stationary linear (λ = 0) law.
    StationaryOu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub delta: f64,
    pub horizon: f64,
    pub stride: usize,
    pub ensemble: usize,
    pub noise: bool,
    pub ceiling: f64,
    pub initial: InitialState,
    /// Wave vectors of the cosine test functions carried by the accumulators.
    pub test_modes: Vec<[i64; 3]>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            horizon: 0.1,
            stride: 10,
            ensemble: 1,
            noise: true,
            ceiling: 1e6,
            initial: InitialState::StationaryOu,
            test_modes: vec![[1, 0, 0], [0, 1, 1]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub step: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub samples: usize,
    pub chains: usize,
}

impl Default for ChainSection {
    fn default() -> Self {
        let c = ChainConfig::default();
        Self { step: c.step, burn_in: c.burn_in, thin: c.thin, samples: c.samples, chains: c.chains }
    }
}

/// Counterterm table kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantKind {
    /// Lattice one-loop constant; ladder entries are `N`, `ε = 2/(2N+1)`.
    C0,
    /// Mollified one-loop constant; ladder entries are `1/ε`.
    C0Mollified,
    /// Mollified two-loop constant; ladder entries are `1/ε`, summation box `1/ε`.
    C1Tilde,
    /// Lattice two-loop constant; ladder entries are `N`.
    C1Lattice,
}

impl ConstantKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::C0 => "c0",
            Self::C0Mollified => "c0-mollified",
            Self::C1Tilde => "c1-tilde",
            Self::C1Lattice => "c1-lattice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::C0, Self::C0Mollified, Self::C1Tilde, Self::C1Lattice].into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub kind: ConstantKind,
    pub ladder: Vec<usize>,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { kind: ConstantKind::C0, ladder: vec![4, 8, 16, 32] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreesSection {
    pub ladder: Vec<usize>,
    pub realizations: usize,
    pub delta: f64,
    pub steps: usize,
    pub stride: usize,
    /// Write the renormalized trees of realization 0 as field containers.
    pub archive: bool,
}

impl Default for TreesSection {
    fn default() -> Self {
        Self { ladder: vec![8, 16], realizations: 4, delta: 1e-3, steps: 500, stride: 50, archive: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReversibilitySection {
    pub n: usize,
    pub t: f64,
    pub delta: f64,
    pub starts: usize,
}

impl Default for ReversibilitySection {
    fn default() -> Self {
        Self { n: 1, t: 0.1, delta: 0.002, starts: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbpSection {
    pub n: usize,
    pub samples: usize,
}

impl Default for IbpSection {
    fn default() -> Self {
        Self { n: 1, samples: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub n: usize,
    pub delta: f64,
    pub horizon: f64,
    pub paths: usize,
    /// Recorded steps per path for the marginal-moment comparison.
    pub records: usize,
    /// The step is divided by this factor for the drift-variation comparison.
    pub refine_factor: usize,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { n: 4, delta: 1e-4, horizon: 0.25, paths: 16, records: 5, refine_factor: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsSection {
    pub ladder: Vec<usize>,
    pub z: f64,
    pub control_z: f64,
    pub power: u32,
    pub samples: usize,
}

impl Default for MomentsSection {
    fn default() -> Self {
        Self { ladder: vec![2, 4, 8], z: 0.55, control_z: 0.3, power: 1, samples: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareSection {
    pub n: usize,
    pub samples: usize,
    pub reps: usize,
}

impl Default for PoincareSection {
    fn default() -> Self {
        Self { n: 1, samples: 4000, reps: 200 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    pub reversibility: ReversibilitySection,
    pub ibp: IbpSection,
    pub energy: EnergySection,
    pub moments: MomentsSection,
    pub poincare: PoincareSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub ladder: Vec<usize>,
    pub pairs: usize,
    pub delta: f64,
    pub horizon: f64,
    pub stride: usize,
    pub variant: Variant,
    pub bootstrap: usize,
}

impl Default for RefineSection {
    fn default() -> Self {
        Self { ladder: vec![4, 8, 16], pairs: 50, delta: 1e-3, horizon: 0.1, stride: 20, variant: Variant::Mollified, bootstrap: 400 }
    }
}

/// Everything a subcommand reads. Serialized field order is the canonical order of the digest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub budget_seconds: f64,
    pub model: ModelSection,
    pub simulate: SimulateSection,
    pub chain: ChainSection,
    pub constants: ConstantsSection,
    pub trees: TreesSection,
    pub check: CheckSection,
    pub refine: RefineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            budget_seconds: 3600.0,
            model: ModelSection::default(),
            simulate: SimulateSection::default(),
            chain: ChainSection::default(),
            constants: ConstantsSection::default(),
            trees: TreesSection::default(),
            check: CheckSection::default(),
            refine: RefineSection::default(),
        }
    }
}

/// Units and meaning of every key, appended as comments by [`RunConfig::defaults_text`].
const KEY_NOTES: &[(&str, &str)] = &[
    ("seed", "master seed; every generator is derived from it"),
    ("budget_seconds", "wall-clock budget recorded in the manifest [s]"),
    ("model.dim", "torus dimension, 2 or 3"),
    ("model.n", "Fourier cutoff N; lattice spacing 2/(2N+1)"),
    ("model.mass", "mass m [dimensionless]"),
    ("model.coupling", "quartic coupling lambda"),
    ("model.variant", "\"lattice\" or \"mollified\""),
    ("model.counterterms", "\"computed\", \"zero\" or \"manual\""),
    ("model.c0", "one-loop constant, read when counterterms = \"manual\""),
    ("model.c1", "two-loop constant, read when counterterms = \"manual\""),
    ("model.mean_zero", "drop the zero mode; keeping it needs mass > 0"),
    ("model.continuum_symbol", "use pi^2|k|^2 instead of the lattice dispersion"),
    ("model.z", "negative regularity of the solution space"),
    ("model.kappa", "small loss exponent"),
    ("model.gamma", "time-weight exponent"),
    ("simulate.delta", "time step [time units]"),
    ("simulate.horizon", "final time T [time units]"),
    ("simulate.stride", "snapshot every stride steps"),
    ("simulate.ensemble", "number of members"),
    ("simulate.noise", "false integrates the deterministic equation"),
    ("simulate.ceiling", "sitewise |phi| that aborts the run"),
    ("simulate.initial", "\"zero\" or \"stationary-ou\""),
    ("simulate.test_modes", "wave vectors of the cosine test functions"),
    ("chain.step", "Langevin proposal step [time units]"),
    ("chain.burn_in", "discarded iterations per chain"),
    ("chain.thin", "iterations between recorded states"),
    ("chain.samples", "recorded states per chain"),
    ("chain.chains", "independent chains"),
    ("constants.kind", "\"c0\", \"c0-mollified\", \"c1-tilde\" or \"c1-lattice\""),
    ("constants.ladder", "N for lattice kinds, 1/eps for mollified kinds"),
    ("trees.ladder", "cutoffs N of the dashboard"),
    ("trees.realizations", "independent tree sets per cutoff"),
    ("trees.delta", "time step [time units]"),
    ("trees.steps", "steps per realization"),
    ("trees.stride", "norms are taken every stride steps"),
    ("trees.archive", "write realization 0 as field containers"),
    ("check.reversibility.n", "cutoff of the measure"),
    ("check.reversibility.t", "evolution time [time units]"),
    ("check.reversibility.delta", "time step [time units]"),
    ("check.reversibility.starts", "coupled starts drawn from the sampler"),
    ("check.ibp.n", "cutoff of the measure"),
    ("check.ibp.samples", "sampler states"),
    ("check.energy.n", "cutoff of the dynamics"),
    ("check.energy.delta", "time step [time units]"),
    ("check.energy.horizon", "path length T [time units]"),
    ("check.energy.paths", "stationary paths"),
    ("check.energy.records", "recorded times for the moment comparison"),
    ("check.energy.refine_factor", "step divisor of the comparison run"),
    ("check.moments.ladder", "cutoffs N"),
    ("check.moments.z", "Besov index -z of the tested norm"),
    ("check.moments.control_z", "index of the negative control"),
    ("check.moments.power", "moment order n of E|x|^(2n)"),
    ("check.moments.samples", "sampler states per cutoff"),
    ("check.poincare.n", "cutoff of the measure"),
    ("check.poincare.samples", "sampler states"),
    ("check.poincare.reps", "bootstrap replicates"),
    ("refine.ladder", "cutoffs; consecutive entries are compared"),
    ("refine.pairs", "coupled pairs per comparison"),
    ("refine.delta", "time step [time units]"),
    ("refine.horizon", "final time [time units]"),
    ("refine.stride", "distances are taken every stride steps"),
    ("refine.variant", "\"lattice\" or \"mollified\""),
    ("refine.bootstrap", "bootstrap replicates for the median errors"),
];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Default configuration with a unit note after every key.
    pub fn defaults_text() -> String {
        let mut out = String::new();
        let mut section = String::new();
        for line in Self::default().to_toml().lines() {
            if let Some(s) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = format!("{s}.");
            }
            let note = line.split_once(" = ").and_then(|(key, _)| {
                let full = format!("{section}{key}");
                KEY_NOTES.iter().find(|(k, _)| *k == full).map(|(_, n)| *n)
            });
            match note {
                Some(n) => out.push_str(&format!("{line}  # {n}\n")),
                None => out.push_str(&format!("{line}\n")),
            }
        }
        out
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Simulation of the model at cutoff `n` on the given time grid.
    pub fn sim_config(&self, n: usize, delta: f64, horizon: f64, stride: usize) -> SimConfig {
        let m = &self.model;
        SimConfig {
            dim: m.dim,
            n,
            delta,
            horizon,
            params: m.params(),
            mass: m.mass,
            coupling: m.coupling,
            seed: self.seed,
            ensemble: self.simulate.ensemble,
            stride,
            variant: m.variant,
            counterterms: m.counterterm_source(),
            mean_zero: m.mean_zero,
            continuum_symbol: m.continuum_symbol,
            noise: self.simulate.noise,
            ceiling: self.simulate.ceiling,
        }
    }

    /// The `simulate` subcommand's configuration.
    pub fn simulation(&self) -> SimConfig {
        let s = &self.simulate;
        self.sim_config(self.model.n, s.delta, s.horizon, s.stride)
    }

    /// Chain settings with a seed derived for `purpose`.
    pub fn chain_config(&self, purpose: u64) -> ChainConfig {
        let c = &self.chain;
        ChainConfig {
            step: c.step,
            burn_in: c.burn_in,
            thin: c.thin,
            samples: c.samples,
            chains: c.chains,
            seed: derive_seed(self.seed, &[tag::CHAIN, purpose]),
            proposal_noise: true,
        }
    }

    /// Every violated precondition across the sections, each prefixed by its section.
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        let mut add = |section: &str, items: Vec<String>| v.extend(items.into_iter().map(|s| format!("{section}: {s}")));
        add("model", self.simulation().violations());
        add("model", self.model.gibbs_spec(self.model.n).violations());
        let c = self.chain_config(0);
        add("chain", c.violations());
        let mut other = Vec::new();
        if self.constants.ladder.is_empty() || self.constants.ladder.contains(&0) {
            other.push("constants.ladder entries ≥ 1".to_string());
        }
        if self.trees.ladder.is_empty() || self.trees.ladder.contains(&0) || self.trees.realizations == 0 || self.trees.stride == 0 {
            other.push("trees.ladder entries, realizations and stride ≥ 1".to_string());
        }
        if !(self.trees.delta > 0.0) {
            other.push("trees.delta > 0".to_string());
        }
        let ck = &self.check;
        if ck.reversibility.starts < 2 || !(ck.reversibility.delta > 0.0) || !(ck.reversibility.t >= 0.0) {
            other.push("check.reversibility: starts ≥ 2, delta > 0, t ≥ 0".to_string());
        }
        if ck.energy.paths < 2 || ck.energy.records == 0 || ck.energy.refine_factor < 2 || !(ck.energy.delta > 0.0) {
            other.push("check.energy: paths ≥ 2, records ≥ 1, refine_factor ≥ 2, delta > 0".to_string());
        }
        if ck.moments.ladder.len() < 2 || ck.moments.samples < 2 {
            other.push("check.moments: at least 2 cutoffs and 2 samples".to_string());
        }
        if ck.ibp.samples < 2 || ck.poincare.samples < 2 || ck.poincare.reps == 0 {
            other.push("check.ibp/poincare: samples ≥ 2, reps ≥ 1".to_string());
        }
        let r = &self.refine;
        if r.ladder.len() < 2 || r.ladder.windows(2).any(|w| w[1] <= w[0]) || r.pairs < 2 || r.stride == 0 || r.bootstrap == 0 {
            other.push("refine: increasing ladder of ≥ 2 cutoffs, pairs ≥ 2, stride and bootstrap ≥ 1".to_string());
        }
        if !(r.delta > 0.0) || !(r.horizon >= r.delta) {
            other.push("refine: delta > 0 and horizon ≥ delta".to_string());
        }
        if !(self.budget_seconds > 0.0) {
            other.push("budget_seconds > 0".to_string());
        }
        v.extend(other);
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_the_annotated_text() {
        let text = RunConfig::defaults_text();
        assert!(text.contains("# master seed"));
        assert!(text.contains("[check.energy]"));
        assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
        // every emitted key carries a note
        let bare: Vec<&str> = text.lines().filter(|l| l.contains(" = ") && !l.contains('#')).collect();
        assert!(bare.is_empty(), "{bare:?}");
    }

    #[test]
    fn defaults_are_valid() {
        assert_eq!(RunConfig::default().violations(), Vec::<String>::new());
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg = RunConfig::from_toml("seed = 9\n[model]\nn = 2\n").unwrap();
        assert_eq!((cfg.seed, cfg.model.n, cfg.model.dim), (9, 2, 3));
        assert!(RunConfig::from_toml("[model]\nbogus = 1\n").is_err());
    }

    #[test]
    fn budget_violation_is_named_verbatim() {
        let mut cfg = RunConfig::default();
        (cfg.model.z, cfg.model.kappa, cfg.model.gamma) = (0.6, 0.01, 0.2);
        let v = cfg.violations();
        assert!(v.iter().any(|s| s.contains("10κ+3γ < 2−3z")), "{v:?}");
    }

    #[test]
    fn digest_tracks_every_field() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.check.energy.paths += 1;
        assert_ne!(a.digest(), b.digest());
    }
}
