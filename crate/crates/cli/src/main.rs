//! `nbrays`: generate parameter files, build ray configurations, export their
//! orthogonality graphs and certify non-bicolorability.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbrays::colorability::{SearchMode, DEFAULT_NODE_LIMIT};
use nbrays::graph::ExportFormat;

use report::{Failure, EXIT_INTERNAL};

#[derive(Debug, Parser)]
#[command(name = "nbrays", version, about = "Non-bicolorable ray configurations in (C^2)^(N-1)")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Accept N = 4n + 2 (for negative tests).
    #[arg(long)]
    allow_non_4n: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a parameter file: all-ones without a seed, random otherwise.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run validators on a parameter file.
    Verify {
        #[arg(long)]
        params: PathBuf,
        /// Comma-separated subset of params, unitarity, reduced-system, relation, bases.
        #[arg(long, value_delimiter = ',', default_value = "params,unitarity,reduced-system,relation,bases")]
        checks: Vec<commands::Check>,
        /// Qubit basis file replacing the standard basis.
        #[arg(long)]
        bases: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build the graph and search for a bicoloring.
    Color {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = SearchMode::Backtracking)]
        mode: SearchMode,
        /// Node budget for backtracking.
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        limit: u64,
        /// Write the certificate here as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        bases: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the GF(2) parity system; no rays are built.
    Certify {
        #[arg(long)]
        n: usize,
        /// Relation parameters p0,p1,p2,p3.
        #[arg(long, default_value = "1,0,0,0")]
        p: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the graphs of two parameter files under the label identity.
    Deform {
        #[arg(long, num_args = 1, required = true)]
        params: Vec<PathBuf>,
        /// Allow different mu/kappa.
        #[arg(long)]
        any: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write the orthogonality graph.
    Export {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = ExportFormat::Json)]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
        /// Also write dense ray amplitudes (N <= 8) as JSON.
        #[arg(long)]
        dump_rays: Option<PathBuf>,
        #[arg(long)]
        bases: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<report::RunReport, Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::invalid(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Generate { n, seed, out, common } => commands::generate(n, seed, &out, common.allow_non_4n),
        Command::Verify { params, checks, bases, common } => {
            commands::verify(&params, &checks, bases.as_deref(), common.allow_non_4n)
        }
        Command::Color { params, mode, limit, out, bases, common } => {
            commands::color(&params, mode, limit, out.as_deref(), bases.as_deref(), common.allow_non_4n)
        }
        Command::Certify { n, p, out, common } => commands::certify(n, &p, out.as_deref(), common.allow_non_4n),
        Command::Deform { params, any, common } => commands::deform(&params, any, common.allow_non_4n),
        Command::Export { params, format, out, dump_rays, bases, common } => {
            commands::export(&params, format, &out, dump_rays.as_deref(), bases.as_deref(), common.allow_non_4n)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(report)) => report.finish(),
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
