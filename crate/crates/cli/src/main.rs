use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use graphhop_cli::commands::{cmd_breakdown, cmd_generate, cmd_run, cmd_sweep};
use graphhop_cli::config::{parse_grid, Config, RunConfig};
use graphhop_cli::run::Method;
use graphhop_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "graphhop", version, about = "Graph-hop evidence retrieval: generate, run, sweep, break down")]
struct Cli {
    /// TOML file with optional [generate] and [run] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed overriding the config file.
    #[arg(long, global = true, env = "GRAPHHOP_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/dev/test files and a distribution report.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Triple file replacing the bundled store.
        #[arg(long)]
        triples: Option<PathBuf>,
    },
    /// Run one retrieval method over a dataset.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        /// random, bm25-topk, forward, backward or bgr
        #[arg(long)]
        method: String,
        /// random, bm25, oracle or noisy-oracle(p, seed)
        #[arg(long)]
        scorer: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        fuse_mode: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse cached forward/backward graphs over a gamma grid.
    Sweep {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated gamma values.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        scorer: Option<String>,
        #[arg(long)]
        fuse_mode: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a run report by structure class and question type.
    Breakdown {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_config(
    cli: &Cli,
    cfg: &Config,
    scorer: Option<&str>,
    gamma: Option<f64>,
    fuse: Option<&str>,
) -> Result<RunConfig> {
    let mut run = cfg.run.clone();
    if let Some(s) = cli.seed {
        run.seed = s;
    }
    if let Some(w) = cli.workers {
        run.workers = w;
    }
    if let Some(s) = scorer {
        run.scorer = s.parse().map_err(CliError::usage)?;
    }
    if let Some(g) = gamma {
        run.gamma = g;
    }
    if let Some(f) = fuse {
        run.fuse_mode = f.parse().map_err(CliError::usage)?;
    }
    run.validate()?;
    Ok(run)
}

/// Runs the command and returns what it prints on stdout.
fn dispatch(cli: &Cli) -> Result<String> {
    let cfg = Config::load(cli.config.as_deref())?;
    let mut out = String::new();
    match &cli.command {
        Command::Generate { out: out_dir, triples } => {
            let mut gen = cfg.generate.clone();
            if let Some(s) = cli.seed {
                gen.rng_seed = s;
            }
            for path in cmd_generate(&gen, triples.as_deref(), out_dir)? {
                let _ = writeln!(out, "{}", path.display());
            }
        }
        Command::Run { dataset, method, scorer, gamma, fuse_mode, out: out_dir } => {
            let method: Method = method.parse()?;
            let run = run_config(cli, &cfg, scorer.as_deref(), *gamma, fuse_mode.as_deref())?;
            out = cmd_run(dataset, method, &run, out_dir)?.table();
        }
        Command::Sweep { dataset, grid, scorer, fuse_mode, out: out_dir } => {
            let run = run_config(cli, &cfg, scorer.as_deref(), None, fuse_mode.as_deref())?;
            let grid = match grid {
                Some(g) => parse_grid(g)?,
                None => run.gamma_grid.clone(),
            };
            out.push_str("gamma\tF1\tGM\n");
            for row in cmd_sweep(dataset, &grid, run.fuse_mode, &run, out_dir)? {
                let _ = writeln!(out, "{}\t{:.3}\t{:.3}", row.gamma, row.f1, row.gm);
            }
        }
        Command::Breakdown { report, dataset, out: out_dir } => {
            let b = cmd_breakdown(report, dataset, out_dir)?;
            let _ = writeln!(out, "{} classes, {} question types", b.by_class.len(), b.by_question_type.len());
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            // a closed pipe on stdout is not a failure of the command
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
