use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Output;
use config::ExperimentConfig;

/// Norm, equivalence, discretization and reconstruction experiments on a
/// periodic grid.
#[derive(Debug, Parser)]
#[command(name = "coorbit", version)]
struct Cli {
    /// TOML experiment file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for batteries and randomized checks (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the default configuration and exit.
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norms of one signal under the configured variants (JSON).
    Norm {
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated variants, e.g. `def,norm2`.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        signal: Option<String>,
    },
    /// Ratio bands between variants over a seeded battery (CSV).
    Equiv {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Discretization sweep over the covering grid (CSV).
    Discretize {
        /// `default` (equal boxes tiling the torus) or `literal` (truncated seam box).
        #[arg(long, default_value = "default")]
        sweep: String,
    },
    /// Reconstruction by the Meyer expansion or an atomic decomposition.
    Recon {
        #[arg(long)]
        system: Option<String>,
        /// Finest Meyer level.
        #[arg(long = "J")]
        levels: Option<usize>,
    },
    /// Frame and oscillation kernel norms (CSV).
    Kernels {
        /// Also write the dense frame kernel in the binary layout.
        #[arg(long)]
        binary: bool,
    },
    /// Admissibility, Tauberian, moment, weight-class and exponent reports.
    Check {
        #[arg(long)]
        analyzer: Option<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    if cli.print_defaults {
        print!("{}", ExperimentConfig::defaults_text());
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("--threads")?;
    }
    let command = cli.command.context("no subcommand given (try --help)")?;
    let out = Output::new(&cfg.output.dir)?;
    let summary = match command {
        Command::Norm { family, variant, signal } => {
            if let Some(f) = family {
                cfg.space.family = f;
            }
            if let Some(v) = variant {
                cfg.space.variants = v.split(',').map(|s| s.trim().to_string()).collect();
            }
            if let Some(s) = signal {
                cfg.signal.signal = s;
            }
            commands::norm(&cfg, &out)?
        }
        Command::Equiv { count } => {
            if let Some(c) = count {
                cfg.battery.count = c;
            }
            commands::equiv(&cfg, &out)?
        }
        Command::Discretize { sweep } => {
            cfg.sweep.fitted = match sweep.as_str() {
                "default" => true,
                "literal" => false,
                other => anyhow::bail!("--sweep: expected 'default' or 'literal', got '{other}'"),
            };
            commands::discretize(&cfg, &out)?
        }
        Command::Recon { system, levels } => {
            if let Some(s) = system {
                cfg.recon.system = s;
            }
            if let Some(j) = levels {
                cfg.recon.levels = j;
            }
            commands::recon(&cfg, &out)?
        }
        Command::Kernels { binary } => commands::kernels(&cfg, &out, binary)?,
        Command::Check { analyzer } => {
            if let Some(a) = analyzer {
                cfg.analyzer.analyzer = a;
            }
            commands::check(&cfg, &out)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
