//! Command-line front end for ensemble-based active-learning acquisition.

mod algorithms;
mod config;
mod diagnose;
mod oracle_cmd;
mod scenarios;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use balance_core::{edge_mask, pair_hypotheses, read_tensor, BalanceError, EnsemblePairs};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;

/// CLI failures carry the exit code contract: 1 tolerance violation,
/// 2 I/O or format problem, 3 configuration problem.
#[derive(Debug)]
pub enum CliError {
    Tolerance(String),
    Data(String),
    Config(String),
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError::Config(message)
    }

    pub fn data(message: String) -> Self {
        CliError::Data(message)
    }

    pub fn from_core(err: BalanceError) -> Self {
        match err {
            BalanceError::Format(_)
            | BalanceError::Io(_)
            | BalanceError::InvalidTensor(_)
            | BalanceError::LengthMismatch { .. } => CliError::Data(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Data(_) => 2,
            CliError::Config(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Tolerance(m) | CliError::Data(m) | CliError::Config(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "balance",
    about = "Batch active-learning acquisition over posterior-ensemble tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a batch of pool indices and write it as JSON.
    Select {
        /// Predictions on the candidate pool (BLNC v1 or JSON mirror).
        #[arg(long)]
        pool_tensor: PathBuf,
        /// Predictions on the reference set used for Hamming distances.
        #[arg(long)]
        ref_tensor: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named desk-scale scenario and write a learning curve CSV.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_curve: PathBuf,
    },
    /// Compare a fast path against its independent reference.
    Oracle {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        op: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimation diagnostics.
    Diagnose {
        #[command(subcommand)]
        what: DiagnoseCommand,
    },
}

#[derive(Subcommand)]
enum DiagnoseCommand {
    /// Coefficient of variation of the acquisition estimates under
    /// re-drawn pair sets.
    Cv {
        #[arg(long)]
        pool_tensor: PathBuf,
        #[arg(long)]
        ref_tensor: PathBuf,
        #[arg(long)]
        repeats: usize,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = init_threads() {
        eprintln!("error: {}", err.message());
        return ExitCode::from(err.exit_code());
    }
    let result = match cli.command {
        Command::Select {
            pool_tensor,
            ref_tensor,
            config,
            out,
        } => cmd_select(&pool_tensor, &ref_tensor, &config, &out),
        Command::Simulate {
            scenario,
            config,
            out_curve,
        } => cmd_simulate(&scenario, &config, &out_curve),
        Command::Oracle { fixture, op, out } => cmd_oracle(&fixture, &op, out.as_deref()),
        Command::Diagnose {
            what:
                DiagnoseCommand::Cv {
                    pool_tensor,
                    ref_tensor,
                    repeats,
                    config,
                    out,
                },
        } => cmd_diagnose_cv(&pool_tensor, &ref_tensor, repeats, &config, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

/// Honors `BALANCE_THREADS` as a cap on worker threads.
fn init_threads() -> Result<(), CliError> {
    match std::env::var("BALANCE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| CliError::config(format!("BALANCE_THREADS=`{raw}` is not a count")))?;
            if n == 0 {
                return Err(CliError::config("BALANCE_THREADS must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))
        }
    }
}

#[derive(Serialize)]
struct BatchOutput {
    selected: Vec<usize>,
    scores: Vec<f64>,
    tau: f64,
    seed: u64,
}

fn cmd_select(
    pool_path: &Path,
    ref_path: &Path,
    config_path: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let pool_tensor = read_tensor(pool_path).map_err(CliError::from_core)?;
    let ref_tensor = read_tensor(ref_path).map_err(CliError::from_core)?;
    if pool_tensor.num_hypotheses() != ref_tensor.num_hypotheses() {
        return Err(CliError::data(format!(
            "pool tensor has {} hypotheses but reference tensor has {}",
            pool_tensor.num_hypotheses(),
            ref_tensor.num_hypotheses()
        )));
    }
    if pool_tensor.num_classes() != ref_tensor.num_classes() {
        return Err(CliError::data(
            "pool and reference tensors disagree on class count".into(),
        ));
    }
    let tau = config.resolve_tau()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let drawn = pair_hypotheses(pool_tensor.num_hypotheses(), config.num_pairs, &mut rng)
        .map_err(CliError::from_core)?;
    let mask = edge_mask(drawn.pairs(), &ref_tensor.hard_labels(), tau)
        .map_err(CliError::from_core)?;
    let pairs = EnsemblePairs::new(drawn.pairs().to_vec(), mask).map_err(CliError::from_core)?;
    let pool: Vec<usize> = (0..pool_tensor.num_points()).collect();
    let selection_config = config.selection();
    let round = algorithms::Round {
        pool: &pool,
        pairs: &pairs,
        tensor: &pool_tensor,
        ref_tensor: &ref_tensor,
        config: &selection_config,
        tau,
    };
    let selection = algorithms::run_algorithm(config.algorithm, &round, &mut rng)?;
    let output = BatchOutput {
        selected: selection.indices,
        scores: selection.scores,
        tau,
        seed: config.seed,
    };
    write_json(out, &output)
}

fn cmd_simulate(scenario: &str, config_path: &Path, out_curve: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let rows = scenarios::run_scenario(scenario, &config)?;
    let mut body = String::from("round,labels,error,tau,ms\n");
    for row in &rows {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            row.round, row.labels, row.error, row.tau, row.ms
        ));
    }
    std::fs::write(out_curve, body)
        .map_err(|e| CliError::data(format!("writing {}: {e}", out_curve.display())))
}

fn cmd_oracle(fixture_path: &Path, op: &str, out: Option<&Path>) -> Result<(), CliError> {
    let fixture = oracle_cmd::load_fixture(fixture_path)?;
    let report = oracle_cmd::run_op(op, &fixture)?;
    let rendered = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::data(format!("serializing report: {e}")))?;
    println!("{rendered}");
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if !report.pass {
        return Err(CliError::Tolerance(format!(
            "{}: max deviation {} exceeds tolerance {}",
            report.op, report.max_abs_deviation, report.tolerance
        )));
    }
    Ok(())
}

fn cmd_diagnose_cv(
    pool_path: &Path,
    ref_path: &Path,
    repeats: usize,
    config_path: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let pool_tensor = read_tensor(pool_path).map_err(CliError::from_core)?;
    let ref_tensor = read_tensor(ref_path).map_err(CliError::from_core)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rows =
        diagnose::coefficient_of_variation(&pool_tensor, &ref_tensor, repeats, &config, &mut rng)?;
    let mut body =
        String::from("point,delta_mean,delta_std,delta_cv,bald_mean,bald_std,bald_cv\n");
    for row in &rows {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.point,
            row.delta_mean,
            row.delta_std,
            row.delta_cv,
            row.bald_mean,
            row.bald_std,
            row.bald_cv
        ));
    }
    std::fs::write(out, body).map_err(|e| CliError::data(format!("writing {}: {e}", out.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec(value)
        .map_err(|e| CliError::data(format!("serializing output: {e}")))?;
    bytes.push(b'\n');
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::data(format!("creating {}: {e}", path.display())))?;
    file.write_all(&bytes)
        .map_err(|e| CliError::data(format!("writing {}: {e}", path.display())))
}
