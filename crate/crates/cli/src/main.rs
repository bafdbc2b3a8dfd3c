//! `catalysis`: batch runs of the catalyst-assisted teleportation simulator.
//!
//! Each subcommand writes one artifact (JSON report or CSV map) to `--output`
//! or stdout. Settings come from an optional `key=value` file given with
//! `--config`; flags take precedence. Exit codes: 0 success, 2 invalid
//! configuration, 3 dimension cap exceeded, 1 anything else. Failures print a
//! one-line JSON error record on stderr.

mod config;
mod error;
mod scenarios;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{build_tolerances, parse_list, ConfigFile, RunConfig, Scenario, XChoice, DEFAULT_SEED};
use error::{CliError, EXIT_OK};

pub const THREADS_ENV: &str = "CATALYSIS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "catalysis", version, about = "Teleportation with entanglement catalysts: batch simulations")]
struct Cli {
    /// `key=value` file with defaults for any flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Where to write the artifact (stdout if absent).
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Tolerance override, e.g. `--tol trace=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte-Carlo teleportation fidelity through a named qutrit resource.
    TeleportDemo {
        /// singlet-in-qutrit, phi-plus or product.
        #[arg(long)]
        state: Option<String>,
        /// Haar samples.
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Random LOCC channels checked against the effective-channel formula and the correlation bound.
    SubroutineVerify {
        #[arg(long)]
        n: Option<usize>,
        /// Local dimension of each copy.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        channels: Option<usize>,
    },
    /// CSV of the catalytic advantage over the qutrit Schmidt simplex.
    AdvantageMap {
        #[arg(long)]
        resolution: Option<f64>,
        /// Emit every permutation of each spectrum for full-triangle plots.
        #[arg(long)]
        replicate: bool,
    },
    /// Two-qutrit catalyst protocol at one `x` (or `optimal`).
    SmallCatalyst {
        #[arg(long)]
        x: Option<String>,
    },
    /// Ergotropy and collective work for a state diagonal in the energy basis.
    Ergotropy {
        /// Comma-separated populations.
        #[arg(long)]
        populations: Option<String>,
        /// Comma-separated energies.
        #[arg(long)]
        energies: Option<String>,
        /// Largest number of copies (1 to 3).
        #[arg(long)]
        n: Option<usize>,
    },
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => file.parsed(key)?.unwrap_or(default),
    })
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let scenario = match cli.command {
        Command::TeleportDemo { state, mc } => Scenario::TeleportDemo {
            state: pick(state, &file, "state", "singlet-in-qutrit".to_string())?,
            mc_samples: pick(mc, &file, "mc", 10_000)?,
        },
        Command::SubroutineVerify { n, d, channels } => Scenario::SubroutineVerify {
            n: pick(n, &file, "n", 2)?,
            d: pick(d, &file, "d", 2)?,
            channels: pick(channels, &file, "channels", 10)?,
        },
        Command::AdvantageMap { resolution, replicate } => Scenario::AdvantageMap {
            resolution: pick(resolution, &file, "resolution", 0.01)?,
            replicate: replicate || file.parsed("replicate")?.unwrap_or(false),
        },
        Command::SmallCatalyst { x } => {
            let raw = pick(x, &file, "x", "optimal".to_string())?;
            Scenario::SmallCatalyst { x: raw.parse::<XChoice>().map_err(CliError::Usage)? }
        }
        Command::Ergotropy { populations, energies, n } => Scenario::Ergotropy {
            populations: parse_list(&pick(populations, &file, "populations", "0.5,0.3,0.2".to_string())?)?,
            energies: parse_list(&pick(energies, &file, "energies", "0,1,2".to_string())?)?,
            n: pick(n, &file, "n", 3)?,
        },
    };
    let mut overrides: Vec<(String, String)> =
        file.tolerances().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    for t in &cli.tol {
        let (k, v) = t.split_once('=').ok_or_else(|| CliError::Usage(format!("--tol expects KEY=VALUE, got `{t}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let tolerances = build_tolerances(overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => file.parsed("threads")?,
    };
    let cfg = RunConfig {
        scenario,
        seed: pick(cli.seed, &file, "seed", DEFAULT_SEED)?,
        output: cli.output.or_else(|| file.get("output").map(PathBuf::from)),
        threads,
        tolerances,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    catalysis::config::install(cfg.tolerances)
        .map_err(|_| CliError::Usage("tolerances were already fixed".into()))?;
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    let bytes = scenarios::run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn fail(err: CliError) -> ExitCode {
    let record = err.record();
    let line = serde_json::to_string(&record).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", record.error));
    eprintln!("{line}");
    ExitCode::from(record.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => return fail(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
