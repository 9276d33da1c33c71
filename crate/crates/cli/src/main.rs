//! `gapclique`: generate k-Vector-Sum instances, reduce them to clique
//! instances, solve, verify and extract, and run the experiment suites.

mod artifact;
mod commands;
mod config;
mod error;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{ExportFormat, TableKind};
use config::{RunConfig, Settings};
use error::{CliError, EXIT_OK, EXIT_USAGE};
use experiment::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "gapclique",
    version,
    about = "k-Vector-Sum to gap k-Clique reduction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a k-Vector-Sum instance (planted YES by default).
    GenVecsum {
        #[command(flatten)]
        common: Common,
        /// Generate a certified NO instance instead.
        #[arg(long)]
        unsat: bool,
        #[arg(long, default_value = "instance.json")]
        output: String,
    },
    /// Sample the random map and check both good-map properties.
    CheckMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "map.json")]
        output: String,
    },
    /// Materialize the clique instance as a graph.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "graph.json")]
        output: String,
    },
    /// Re-emit a graph as DIMACS or bare JSON.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "dimacs")]
        format: ExportFormat,
        #[arg(long)]
        output: Option<String>,
    },
    /// Exact maximum clique with a greedy baseline.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value = "solve.json")]
        output: String,
    },
    /// Check that the planted tuple yields a clique of the target size.
    VerifyComplete {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "complete.json")]
        output: String,
    },
    /// Decode a k-Vector-Sum witness from a clique (the planted one by default).
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// A solve artifact whose clique is decoded.
        #[arg(long)]
        clique: Option<PathBuf>,
        /// Closeness threshold as a fraction, e.g. 1/8.
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, default_value = "extract.json")]
        output: String,
    },
    /// Exact linearity-test statistics for one table.
    Lintest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "random")]
        kind: TableKind,
        /// Read the table from a file instead of sampling one.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Decoding radius as a fraction.
        #[arg(long, default_value = "1/4")]
        delta: String,
        /// List constant as a fraction; defaults to 1/4.
        #[arg(long)]
        c_list: Option<String>,
        #[arg(long, default_value = "lintest.json")]
        output: String,
    },
    /// Run an experiment suite and write its rows as JSON lines.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        output: Option<String>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::GenVecsum { common, .. }
            | Command::CheckMap { common, .. }
            | Command::Reduce { common, .. }
            | Command::Export { common, .. }
            | Command::Solve { common, .. }
            | Command::VerifyComplete { common, .. }
            | Command::Extract { common, .. }
            | Command::Lintest { common, .. }
            | Command::Experiment { common, .. } => common,
        }
    }
}

fn run(command: Command) -> error::Result<()> {
    let common = command.common();
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = RunConfig::resolve(common.settings.clone(), common.config.as_deref())?;
    match &command {
        Command::GenVecsum { unsat, output, .. } => commands::gen_vecsum(&cfg, *unsat, output),
        Command::CheckMap { instance, output, .. } => commands::check_map(&cfg, instance, output),
        Command::Reduce {
            instance, map, output, ..
        } => commands::reduce(&cfg, instance, map, output),
        Command::Export {
            graph, format, output, ..
        } => {
            let default = match format {
                ExportFormat::Dimacs => "graph.dimacs",
                ExportFormat::Json => "graph.export.json",
            };
            commands::export(&cfg, graph, *format, output.as_deref().unwrap_or(default))
        }
        Command::Solve {
            graph,
            restarts,
            output,
            ..
        } => commands::solve(&cfg, graph, *restarts, output),
        Command::VerifyComplete {
            instance, map, output, ..
        } => commands::verify_complete(&cfg, instance, map, output),
        Command::Extract {
            instance,
            map,
            clique,
            kappa,
            output,
            ..
        } => commands::extract(&cfg, instance, map, clique.as_deref(), kappa.as_deref(), output),
        Command::Lintest {
            kind,
            table,
            delta,
            c_list,
            output,
            ..
        } => {
            let decode = commands::DecodeArgs {
                delta,
                c_list: c_list.as_deref(),
            };
            commands::lintest(&cfg, *kind, table.as_deref(), decode, output)
        }
        Command::Experiment { suite, output, .. } => experiment::run(&cfg, *suite, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
