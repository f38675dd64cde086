//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration or argument errors, 2 for
//! failures while running or writing results.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::compute_quantities;
use crate::config::{EntryConfig, ExperimentConfig, OutputConfig, OutputFormat};
use crate::engine::{SimMode, aggregate, run_experiment, run_experiment_with_threads};
use crate::report::{self, Results};

/// Environment variable holding the default worker-thread count for `run`.
pub const THREADS_ENV: &str = "CONTENTION_THREADS";

#[derive(Debug, Parser)]
#[command(name = "contention", version, about = "Contention resolution on a slotted multiple-access channel")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation campaign and report makespan ratios.
    Run(RunArgs),
    /// Print the analysis constants for a given delta and k as JSON.
    Analyze(AnalyzeArgs),
    /// Recompute aggregate statistics from a results file.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Protocols to run (ofa, ebobo, llib), comma separated.
    #[arg(long, value_delimiter = ',')]
    protocol: Vec<String>,
    /// Numbers of contending nodes, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<u64>,
    /// Trials per (protocol, k).
    #[arg(long)]
    runs: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Protocol constant delta (OFA and EBOBO).
    #[arg(long)]
    delta: Option<f64>,
    /// Back-off factor r (LLIB).
    #[arg(long)]
    r: Option<f64>,
    /// naive (per-node) or fast (aggregated).
    #[arg(long)]
    mode: Option<SimMode>,
    /// Results file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Results file format: csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Worker threads (default: all cores).
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    k: u64,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    /// Trial results (CSV or JSON) written by `run`.
    path: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, stdout, stderr),
        Command::Analyze(args) => cmd_analyze(args, stdout, stderr),
        Command::Aggregate(args) => cmd_aggregate(args, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if !args.protocol.is_empty() {
        if args.k.is_empty() {
            return Err(CliError::Config("--k is required with --protocol".into()));
        }
        config.entries = args
            .protocol
            .iter()
            .map(|p| EntryConfig {
                protocol: p.clone(),
                k_values: args.k.clone(),
                runs: args.runs.unwrap_or(10),
                delta: args.delta,
                r: args.r,
            })
            .collect();
    } else {
        for entry in &mut config.entries {
            if !args.k.is_empty() {
                entry.k_values = args.k.clone();
            }
            if let Some(runs) = args.runs {
                entry.runs = runs;
            }
            if args.delta.is_some() {
                entry.delta = args.delta;
            }
            if args.r.is_some() {
                entry.r = args.r;
            }
        }
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    if let Some(path) = &args.out {
        let format = args
            .format
            .or(config.output.as_ref().map(|o| o.format))
            .unwrap_or_default();
        config.output = Some(OutputConfig {
            path: path.clone(),
            format,
        });
    } else if let (Some(format), Some(output)) = (args.format, config.output.as_mut()) {
        output.format = format;
    }
    if config.entries.is_empty() {
        return Err(CliError::Config(
            "nothing to run: give --protocol and --k, or a --config with entries".into(),
        ));
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn cmd_run(args: RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = build_config(&args)?;
    let report = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => run_experiment_with_threads(&config, n),
        None => run_experiment(&config),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let results = Results {
        trials: report.trials,
        aggregates: report.aggregates,
    };
    if let Some(output) = &config.output {
        let text = match output.format {
            OutputFormat::Csv => report::to_csv(&results),
            OutputFormat::Json => report::to_json(&results),
        }
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        report::write_atomically(&output.path, &text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", output.path.display())))?;
        let _ = writeln!(
            stderr,
            "wrote {} trials and {} aggregates to {}",
            results.trials.len(),
            results.aggregates.len(),
            output.path.display()
        );
    }
    let _ = write!(stdout, "{}", report::ratio_table(&results.aggregates));
    Ok(())
}

fn cmd_analyze(
    args: AnalyzeArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let q = compute_quantities(args.delta, args.k).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(w) = &q.m_warning {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let json = serde_json::to_string_pretty(&q).map_err(|e| CliError::Runtime(e.to_string()))?;
    let _ = writeln!(stdout, "{json}");
    Ok(())
}

fn cmd_aggregate(
    args: AggregateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.path)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.path.display())))?;
    let parsed = if text.trim_start().starts_with('{') {
        report::from_json(&text)
    } else {
        report::from_csv(&text)
    }
    .map_err(|e| CliError::Config(format!("{}: {e}", args.path.display())))?;
    let aggregates = aggregate(&parsed.trials);
    if !parsed.aggregates.is_empty() && parsed.aggregates != aggregates {
        let _ = writeln!(stderr, "warning: stored aggregates differ from the trial rows");
    }
    let csv = report::to_csv(&Results {
        trials: Vec::new(),
        aggregates: aggregates.clone(),
    })
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    // only the aggregate block
    let block = csv.split_once("\n\n").map(|(_, b)| b).unwrap_or(&csv);
    let _ = write!(stdout, "{block}");
    let _ = write!(stdout, "\n{}", report::ratio_table(&aggregates));
    Ok(())
}
