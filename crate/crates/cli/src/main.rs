use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use phi4_core::run::config::ConstantKind;
use phi4_core::run::{exit_status, plan, run_job, write_outputs, Job, RunConfig, RunManifest, Suite};
use phi4_core::Error;

#[derive(Parser, Debug)]
#[command(name = "phi4", version, about = "Simulation and diagnostics of the lattice phi^4 model")]
struct Cli {
    /// Key/value (TOML) configuration, missing keys take their defaults; a manifest.json replays its run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Validate and print the planned work without running it.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Print the default configuration with units and exit.
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Counterterm tables.
    Constants {
        /// c0, c0-mollified, c1-tilde or c1-lattice.
        #[arg(long, value_parser = parse_kind)]
        kind: Option<ConstantKind>,
        /// N for lattice kinds, 1/eps for mollified kinds.
        #[arg(long, value_delimiter = ',')]
        eps_ladder: Option<Vec<usize>>,
    },
    /// Metropolis-adjusted Langevin sampling of the lattice measure.
    SampleGibbs,
    /// Trajectories and path accumulators.
    Simulate,
    /// Duhamel trees and the norm dashboard.
    Trees,
    /// Statistical suites of the measure and the dynamics.
    Check {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
    },
    /// Coupled refinement ladder.
    Refine,
}

fn parse_kind(s: &str) -> Result<ConstantKind, String> {
    ConstantKind::parse(s).ok_or_else(|| format!("unknown kind {s:?} (c0, c0-mollified, c1-tilde, c1-lattice)"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| format!("unknown suite {s:?} (reversibility, ibp, energy, moments, poincare)"))
}

/// A manifest (`.json`) replays the configuration recorded in it; anything else is read as TOML.
fn load_config(path: &std::path::Path, text: &str) -> phi4_core::Result<RunConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let m: RunManifest = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        return Ok(m.config);
    }
    RunConfig::from_toml(text)
}

fn fail(e: &Error) -> ExitCode {
    match e {
        Error::Validation(v) => {
            eprintln!("configuration invalid:");
            for item in v {
                eprintln!("  - {item}");
            }
        }
        Error::Instability { .. } => eprintln!("numerical instability: {e}"),
        _ => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_status(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_defaults {
        print!("{}", RunConfig::defaults_text());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    let mut cfg = match &cli.config {
        Some(p) => match std::fs::read_to_string(p).map_err(Error::from).and_then(|t| load_config(p, &t)) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let job = match command {
        Command::Constants { kind, eps_ladder } => {
            if let Some(k) = kind {
                cfg.constants.kind = k;
            }
            if let Some(l) = eps_ladder {
                cfg.constants.ladder = l;
            }
            Job::Constants
        }
        Command::SampleGibbs => Job::SampleGibbs,
        Command::Simulate => Job::Simulate,
        Command::Trees => Job::Trees,
        Command::Check { suite } => Job::Check(suite),
        Command::Refine => Job::Refine,
    };
    if let Err(e) = cfg.validate() {
        return fail(&e);
    }
    if cli.dry_run {
        for line in plan(&cfg, job) {
            println!("{line}");
        }
        println!("config digest {}", cfg.digest());
        return ExitCode::SUCCESS;
    }
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let started = phi4_core::run::output::unix_now();
    let clock = Instant::now();
    let out = match run_job(&cfg, job) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for r in &out.reports {
        println!(
            "{} {}  estimate {:.6e}  se {:.3e}  threshold {:.6e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.test,
            r.estimate,
            r.se,
            r.threshold
        );
    }
    let mut manifest = RunManifest {
        config_digest: cfg.digest(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        subcommand: job.subcommand(),
        outputs: vec![],
        budget_seconds: cfg.budget_seconds,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        started_unix: started,
        config: cfg.clone(),
    };
    match write_outputs(&cli.out_dir, &out.artifacts, &mut manifest) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            if manifest.elapsed_seconds > cfg.budget_seconds {
                eprintln!("warning: run took {:.1} s, over the {:.1} s budget", manifest.elapsed_seconds, cfg.budget_seconds);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
