//! Command-line front end for `polopt`: file ingestion, the optimization
//! pipelines, and JSON/CSV reporting.

pub mod commands;
pub mod io;
pub mod report;

use std::io::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::CommandOutput;
pub use report::RunReport;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "POLOPT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// Wraps a library error with the name of the failing step.
    pub fn context(step: &'static str) -> impl Fn(polopt::Error) -> CliError {
        move |e| match e {
            polopt::Error::NotPositiveDefinite | polopt::Error::NonFinite(_) => {
                CliError::Numerical(format!("{step}: {e}"))
            }
            _ => CliError::Input(format!("{step}: {e}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "polopt", version, about = "Polarization and disagreement optimization for opinion dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Equilibrium opinions and the polarization-disagreement index.
    Index(commands::IndexArgs),
    /// Optimal topology under a total-weight budget, optionally sparsified.
    OptimizeTopology(commands::TopologyArgs),
    /// Effective-resistance sparsification of a weighted graph.
    Sparsify(commands::SparsifyArgs),
    /// Optimal decrease of innate opinions for one or more budgets.
    OptimizeOpinions(commands::OpinionArgs),
    /// Synthetic graph and opinion files.
    Generate(commands::GenerateArgs),
    /// Re-run the worked examples and identity checks.
    Reproduce(commands::ReproduceArgs),
}

impl Command {
    fn output(&self) -> &commands::OutputOpts {
        match self {
            Command::Index(a) => &a.output,
            Command::OptimizeTopology(a) => &a.output,
            Command::Sparsify(a) => &a.output,
            Command::OptimizeOpinions(a) => &a.output,
            Command::Generate(a) => &a.output,
            Command::Reproduce(a) => &a.output,
        }
    }

    /// Runs the command and returns its report with timing filled in.
    pub fn execute(&self) -> Result<CommandOutput, CliError> {
        let start = Instant::now();
        let mut out = match self {
            Command::Index(a) => commands::cmd_index(a),
            Command::OptimizeTopology(a) => commands::cmd_optimize_topology(a),
            Command::Sparsify(a) => commands::cmd_sparsify(a),
            Command::OptimizeOpinions(a) => commands::cmd_optimize_opinions(a),
            Command::Generate(a) => commands::cmd_generate(a),
            Command::Reproduce(a) => commands::cmd_reproduce(a),
        }?;
        out.report.timing = start.elapsed().as_secs_f64();
        Ok(out)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // A pool that already exists (e.g. in tests) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn write_outputs(command: &Command, out: &CommandOutput) -> Result<(), CliError> {
    let opts = command.output();
    let io_err = |e: std::io::Error, path: &std::path::Path| CliError::Input(format!("{}: {e}", path.display()));
    for file in &out.files {
        io::write_text(&file.path, &file.contents).map_err(|e| io_err(e, &file.path))?;
    }
    if let Some(dir) = &opts.csv_dir {
        for table in &out.tables {
            let path = dir.join(&table.path);
            io::write_text(&path, &table.contents).map_err(|e| io_err(e, &path))?;
        }
    }
    let json = out.report.to_json();
    match &opts.out {
        Some(path) => io::write_text(path, &json).map_err(|e| io_err(e, path))?,
        None => {
            let _ = std::io::stdout().write_all(json.as_bytes());
        }
    }
    Ok(())
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = configure_threads().and_then(|()| {
        let out = cli.command.execute()?;
        write_outputs(&cli.command, &out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            for line in &out.messages {
                eprintln!("{line}");
            }
            if !out.failed_checks.is_empty() {
                eprintln!("error: failed checks: {}", out.failed_checks.join(", "));
                EXIT_NUMERICAL
            } else if cli.command.output().strict && !out.converged {
                eprintln!("error: optimizer did not converge (--strict)");
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
