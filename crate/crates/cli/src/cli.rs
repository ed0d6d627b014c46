use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::{execute, Command, Outcome, ScanKind};
use crate::config::{Method, RunConfig};

/// Exit status when every verdict passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when the run completed but some verdict failed.
pub const EXIT_VERDICT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tempered", version, about = "Hermite-Sobolev translation, heat and Brownian experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Verb,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Write the coefficient file of the input distribution.
    Build,
    /// Evolve the input under the heat semigroup.
    Solve,
    /// Run a verification scan.
    Scan {
        #[arg(value_enum)]
        kind: ScanKind,
    },
    /// Integrated heat-equation residual under time-grid refinement.
    ResidualHeat,
    /// Print derived settings for the configuration.
    Info,
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the bundle.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run every method and report pairwise distances.
    #[arg(long, global = true)]
    compare: bool,
    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[arg(short = 'd', long = "dim", global = true)]
    d: Option<usize>,
    #[arg(short = 'N', long = "degree", global = true)]
    n: Option<usize>,
    #[arg(short = 'Q', long = "nodes", global = true)]
    q: Option<usize>,
    #[arg(short = 'p', long = "order", global = true, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(short = 't', long = "time", global = true)]
    t: Option<f64>,
    /// Comma-separated time grid.
    #[arg(long = "times", global = true, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(short = 'M', long = "samples", global = true)]
    m: Option<usize>,
    /// delta@x | hermite@k | gaussian@(mean,var) | coefficient file.
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

impl Flags {
    fn merge(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:ident, $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    cfg.$field = v;
                }
            };
        }
        set!(d, self.d);
        set!(n, self.n);
        set!(p, self.p);
        set!(m, self.m);
        set!(input, self.input);
        set!(method, self.method);
        if self.q.is_some() {
            cfg.q = self.q;
        }
        if self.t.is_some() {
            cfg.t = self.t;
        }
        if self.times.is_some() {
            cfg.t_grid = self.times.clone();
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.compare |= self.compare;
        Ok(cfg)
    }
}

fn command_of(verb: &Verb) -> Command {
    match verb {
        Verb::Build => Command::Build,
        Verb::Solve => Command::Solve,
        Verb::Scan { kind } => Command::Scan(*kind),
        Verb::ResidualHeat => Command::ResidualHeat,
        Verb::Info => Command::Info,
    }
}

/// Runs `command` under `cfg`, on a dedicated pool when `threads` is set.
pub fn run_config(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| execute(command, cfg)),
        None => execute(command, cfg),
    }
}

/// Parses `args`, runs, prints, and returns the exit status.
pub fn run<I, T>(args: I) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    let cfg = cli.flags.merge()?;
    let outcome = run_config(command_of(&cli.command), &cfg)?;
    let report = &outcome.report;
    if cli.flags.json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        if report.verdicts.is_empty() {
            println!("{}", serde_json::to_string_pretty(&report.results)?);
        }
        for v in &report.verdicts {
            println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        if let Some(dir) = &outcome.dir {
            println!("bundle: {}", dir.display());
        }
    }
    if report.passed() {
        Ok(EXIT_PASS)
    } else {
        eprintln!("{}", serde_json::json!({ "failures": report.failures }));
        Ok(EXIT_VERDICT)
    }
}
