//! `potts-lab`: command-line front end for potts-core.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use potts_core::{Error, Exec, Result};
use serde::Serialize;

use output::{Provenance, Report};

#[derive(Parser, Debug)]
#[command(
    name = "potts-lab",
    version,
    about = "Phase diagrams, moments, graphs and Swendsen-Wang dynamics for q-spin models"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Emit JSON instead of CSV or text
    #[arg(long, global = true)]
    json: bool,
    /// Write the main artifact to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the table (or trace) as CSV to FILE
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true, env = "POTTSLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 runs everything sequentially
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON object whose keys override the flags of the same name
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Uniqueness, coexistence and random-cluster thresholds of the Potts model
    Thresholds(commands::ThresholdArgs),
    /// Fixpoints of the tree recursion with their stability
    Fixpoints(commands::FixpointArgs),
    /// Regime, free-energy difference and dominant phases at one activity
    PhaseDiagram(commands::PhaseArgs),
    /// First- and second-moment exponents of every phase
    Moments(commands::MomentArgs),
    /// Induced p→2 norm of the Cholesky factor
    Norm(commands::NormArgs),
    /// Sample, enumerate or analyse regular graphs
    #[command(subcommand)]
    Graph(commands::GraphCommand),
    /// Swendsen-Wang simulation, exact kernels and the gap check
    #[command(subcommand)]
    Sw(commands::SwCommand),
    /// Build a bipartite gadget and report its reduction constants
    Gadget(commands::GadgetSummaryArgs),
    /// Replace every vertex of H by a gadget
    Reduce(commands::ReduceSummaryArgs),
    /// Run the acceptance criteria
    Verify(commands::VerifyArgs),
    /// Evaluate a command over a parameter grid
    #[command(subcommand)]
    Sweep(commands::SweepCommand),
}

fn configure_threads(threads: Option<usize>) -> Result<Exec> {
    match threads {
        Some(0) => Err(Error::InvalidInput("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Exec::Parallel)
        }
        t => Ok(Exec::from_threads(t)),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let exec = configure_threads(cli.global.threads)?;
    let g = &cli.global;
    let report: Report = match &cli.command {
        Command::Thresholds(a) => commands::thresholds(a)?,
        Command::Fixpoints(a) => commands::fixpoints(a, g.seed, exec)?,
        Command::PhaseDiagram(a) => commands::phase_diagram(a)?,
        Command::Moments(a) => commands::moments(a, g.seed, exec)?,
        Command::Norm(a) => commands::norm(a, g.seed, exec)?,
        Command::Graph(c) => commands::graph(c, g.seed)?,
        Command::Sw(c) => commands::sw(c, g.seed, exec)?,
        Command::Gadget(a) => commands::gadget_summary(a, g.seed)?,
        Command::Reduce(a) => commands::reduce_summary(a, g.seed)?,
        Command::Verify(a) => commands::verify(a, exec)?,
        Command::Sweep(c) => commands::sweep(c, g.seed, exec)?,
    };
    let prov = Provenance { config: serde_json::to_value(&cli.command)?, seed: g.seed };

    for (path, text) in &report.files {
        output::write_atomic(path, &output::render_graph(text, &prov))?;
    }
    if let Some(path) = &g.csv {
        let table = report.table.as_ref().ok_or_else(|| Error::InvalidInput("this command has no CSV table".into()))?;
        output::write_atomic(path, &output::render_csv(table, &prov)?)?;
    }
    let primary = if g.json {
        Some(output::render_json(&report.value, &prov)?)
    } else if let Some(text) = &report.text {
        Some(match &cli.command {
            Command::Graph(_) => output::render_graph(text, &prov),
            _ => text.clone(),
        })
    } else if g.csv.is_some() {
        report.summary.as_ref().map(|t| output::render_csv(t, &prov)).transpose()?
    } else {
        report.table.as_ref().map(|t| output::render_csv(t, &prov)).transpose()?
    };
    if let Some(s) = primary {
        output::emit(g.out.as_deref(), &s)?;
    }
    Ok(!report.failed)
}

fn main() -> ExitCode {
    let args = match input::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_guard() { 2 } else { 1 })
        }
    }
}
