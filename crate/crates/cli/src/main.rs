//! `rankscope`: seeded, reproducible runner for the rankscope diagnostics.

mod commands;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::Run;
use manifest::{strip_run_options, RunManifest, TOOL};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Convergence(String),
    #[error(transparent)]
    Core(#[from] rankscope::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Core(e) if e.is_degenerate() => 3,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Numerical rank diagnostics for layered networks and random matrix products")]
struct Cli {
    /// Worker threads; falls back to RANKSCOPE_THREADS, then to all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here, with a manifest at <OUT>.manifest.json
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Numerical rank and singular values of a CSV matrix
    Rank(commands::RankArgs),
    /// Partial Jacobian rank at every depth of a network
    Sweep(commands::SweepArgs),
    /// Jacobian and covariance ranks along a random linear chain
    Chain(commands::ChainArgs),
    /// Monte Carlo Lyapunov spectrum of Gaussian products against the closed form
    Lyapunov(commands::LyapunovArgs),
    /// Predicted depth at which the numerical rank collapses to one
    Collapse(commands::CollapseArgs),
    /// Classification dimension of a feature matrix
    Clsdim(commands::ClsDimArgs),
    /// Perturbed PCA dimension at every depth of a network
    Pertdim(commands::PertDimArgs),
    /// Dimension and Jacobian rank change across a single component
    Structural(commands::StructuralArgs),
    /// Pinned Lasso expressing one logit through the others
    Deficit(commands::DeficitArgs),
    /// Probability that a Gaussian matrix is numerically rank deficient
    Prob(commands::ProbArgs),
    /// Re-run a manifest; --out redirects the output
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match execute(cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("RANKSCOPE_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Input(format!("RANKSCOPE_THREADS={v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Input("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli, args: &[String]) -> Result<(), CliError> {
    match cli.command {
        Command::Replay(r) => replay(&r.manifest, cli.out),
        command => emit(&command, &strip_run_options(args), cli.out.as_deref()),
    }
}

fn replay(path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let manifest = RunManifest::from_json(&text).map_err(CliError::Input)?;
    let argv = std::iter::once(TOOL.to_string()).chain(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Input(format!("manifest arguments: {e}")))?;
    if cli.out.is_some() || cli.threads.is_some() {
        return Err(CliError::Input("manifest arguments may not set --out or --threads".into()));
    }
    if let Command::Replay(_) = cli.command {
        return Err(CliError::Input("a manifest cannot replay another manifest".into()));
    }
    let out = out.or_else(|| manifest.outputs.first().cloned());
    emit(&cli.command, &manifest.args, out.as_deref())
}

fn resolved<T: Serialize>(name: &'static str, args: &T, seed: Option<u64>, run: Result<Run, CliError>) -> Result<Resolved, CliError> {
    Ok(Resolved { name, params: serde_json::to_value(args).expect("arguments serialize"), seed, run: run? })
}

struct Resolved {
    name: &'static str,
    params: serde_json::Value,
    seed: Option<u64>,
    run: Run,
}

fn dispatch(command: &Command) -> Result<Resolved, CliError> {
    match command {
        Command::Rank(a) => resolved("rank", a, a.seed, commands::rank(a)),
        Command::Sweep(a) => resolved("sweep", a, a.seed, commands::sweep(a)),
        Command::Chain(a) => resolved("chain", a, a.seed, commands::chain(a)),
        Command::Lyapunov(a) => resolved("lyapunov", a, a.seed, commands::lyapunov(a)),
        Command::Collapse(a) => resolved("collapse", a, a.seed, commands::collapse(a)),
        Command::Clsdim(a) => resolved("clsdim", a, a.seed, commands::clsdim(a)),
        Command::Pertdim(a) => resolved("pertdim", a, a.seed, commands::pertdim(a)),
        Command::Structural(a) => resolved("structural", a, a.seed, commands::structural(a)),
        Command::Deficit(a) => resolved("deficit", a, a.seed, commands::deficit(a)),
        Command::Prob(a) => resolved("prob", a, a.seed, commands::prob(a)),
        Command::Replay(_) => unreachable!("replay is handled before dispatch"),
    }
}

fn emit(command: &Command, args: &[String], out: Option<&Path>) -> Result<(), CliError> {
    let Resolved { name, params, seed, run } = dispatch(command)?;
    for line in &run.summary {
        println!("{line}");
    }
    match out {
        Some(path) => {
            let manifest = RunManifest {
                tool: TOOL.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                subcommand: name.into(),
                args: args.to_vec(),
                params,
                seed,
                outputs: vec![path.to_path_buf()],
            };
            write(path, &run.artifact)?;
            write(&RunManifest::path_for(path), &manifest.to_json())?;
        }
        None if run.echo_artifact => print!("{}", run.artifact),
        None => {}
    }
    run.status
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
