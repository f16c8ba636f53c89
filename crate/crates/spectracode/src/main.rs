use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use spectracode::config::{CodeDescriptor, ExperimentConfig, ExperimentKind};
use spectracode::run::run_experiment;
use spectracode_core::error::{Error, ErrorKind, Result};

/// Spectral experiments on code-based random matrix ensembles.
#[derive(Parser, Debug)]
#[command(name = "spectracode", version, disable_help_subcommand = true)]
struct Cli {
    /// Experiment kind: esd, moments, sweep, dual-distance, or reference.
    kind: String,
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker cap; results are identical for any value.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    l_max: Option<u32>,
    #[arg(long)]
    n_a: Option<usize>,
    #[arg(long)]
    n_b: Option<usize>,
    #[arg(long)]
    y_a: Option<f64>,
    #[arg(long)]
    y_b: Option<f64>,
    /// Inline code descriptor JSON, e.g. '{"family":"gold","m":5}'.
    #[arg(long)]
    code_a: Option<String>,
    #[arg(long)]
    code_b: Option<String>,
    /// Sweep sizes, comma separated, e.g. 5,7,9.
    #[arg(long, value_delimiter = ',')]
    sweep_m: Option<Vec<u32>>,
    /// rademacher | complex_gaussian
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    n_big: Option<usize>,
    #[arg(long)]
    reference_trials: Option<u64>,
    /// Fill the oracle column of moment reports (l <= 4).
    #[arg(long)]
    oracle: bool,
}

fn parse_descriptor(text: &str) -> Result<CodeDescriptor> {
    serde_json::from_str(text).map_err(|e| Error::usage(format!("code descriptor parse error: {e}")))
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let overrides = ExperimentConfig {
        kind: Some(ExperimentKind::from_str(&cli.kind)?),
        code_a: cli.code_a.as_deref().map(parse_descriptor).transpose()?,
        code_b: cli.code_b.as_deref().map(parse_descriptor).transpose()?,
        n_a: cli.n_a,
        n_b: cli.n_b,
        y_a: cli.y_a,
        y_b: cli.y_b,
        trials: cli.trials,
        l_max: cli.l_max,
        seed: cli.seed,
        out: cli.out.clone(),
        oracle: if cli.oracle { Some(true) } else { None },
        sweep_m: cli.sweep_m.clone(),
        baseline: cli.baseline.clone(),
        n_big: cli.n_big,
        reference_trials: cli.reference_trials,
    };
    Ok(base.merged_with(&overrides))
}

fn exit_code_for(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage | ErrorKind::Domain | ErrorKind::Construction => 2,
        ErrorKind::Resource => 3,
        ErrorKind::Numeric | ErrorKind::Consistency => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap already formats help/version output
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = build_config(&cli).and_then(|config| run_experiment(&config, cli.threads));
    match result {
        Ok(output) => {
            for file in &output.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(e.kind))
        }
    }
}
