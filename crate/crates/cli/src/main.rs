mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "thinfilm",
    version,
    about = "Similarity profiles and branching data of the thin-film equation near n = 0"
)]
struct Cli {
    /// TOML configuration file; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir` of the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 2 when a reported check misses its tolerance.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads of the parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the default configuration and exit.
    #[arg(long)]
    dump_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the kernel F and its derivatives, with mass and decay reports.
    Kernel,
    /// Gram matrix, eigen-residuals and adjoint polynomials.
    Spectrum,
    /// Evolve moment-cancelled data by the spectral and convolution routes.
    Evolve {
        /// Order of the cancelled moments.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Branching coefficients and root counts at the eigenvalue λ_k.
    Branch {
        #[arg(long)]
        k: Option<usize>,
        /// global or blowup.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Shoot similarity profiles along the n-list.
    Continue {
        #[arg(long)]
        k: Option<usize>,
        /// global or blowup.
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated exponents, overriding `n_list`.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<f64>>,
    },
    /// Expansion diagnostic of (|f|ⁿ − 1)/n against ln|f| for f = F.
    Diagnose,
}

fn run(cli: Cli) -> Result<()> {
    if cli.dump_defaults {
        print!("{}", RunConfig::default().to_toml());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(ConfigError("a subcommand is required (see --help)".into()).into());
    };
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    match command {
        Command::Kernel => commands::kernel(&cfg, cli.strict),
        Command::Spectrum => commands::spectrum(&cfg, cli.strict),
        Command::Evolve { k } => {
            if let Some(k) = k {
                cfg.evolve.k = k;
            }
            commands::evolve(&cfg, cli.strict)
        }
        Command::Branch { k, kind } => {
            if let Some(k) = k {
                cfg.branch.k = k;
            }
            if let Some(kind) = kind {
                cfg.branch.kind = kind;
            }
            cfg.validate()?;
            commands::branch(&cfg, cli.strict)
        }
        Command::Continue { k, kind, n_list } => {
            if let Some(k) = k {
                cfg.continuation.k = k;
            }
            if let Some(kind) = kind {
                cfg.continuation.kind = kind;
            }
            if let Some(n) = n_list {
                cfg.n_list = n;
            }
            cfg.validate()?;
            commands::continuation(&cfg, cli.strict)
        }
        Command::Diagnose => commands::diagnose(&cfg, cli.strict),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
