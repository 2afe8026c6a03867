//! dnsamp: synthesize DNS-amplification traffic, preprocess it into labeled
//! flow tensors, train the LSTM classifier, run the elastic-net and
//! character-swap attacks, and report metrics and timing tables. Stages hand
//! off through files; a global seed makes every artifact reproducible.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "dnsamp", version, about = "DNS-amplification detection and adversarial-example workbench")]
struct Cli {
    /// Key/value config file; flags override individual keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global seed; per-module streams are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for default output artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic capture with benign traffic and DNS-amplification bursts.
    Synth(SynthArgs),
    /// Parse a capture into the per-packet feature CSV.
    Ingest(IngestArgs),
    /// Run the genetic-algorithm feature selection and emit a mask file.
    SelectFeatures(SelectArgs),
    /// Tokenize, window, label, pad and normalize a capture into a dataset archive.
    Preprocess(PreprocessArgs),
    /// Train the LSTM classifier on a dataset archive.
    Train(TrainArgs),
    /// Run the white-box elastic-net (ISTA) attack.
    AttackEad(AttackEadArgs),
    /// Run the black-box character-swap attack.
    AttackCharswap(AttackCharswapArgs),
    /// Confusion matrices and the attack comparison summary.
    Evaluate(EvaluateArgs),
    /// Time the preprocessing stages over the benchmark capture sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_benign: Option<usize>,
    #[arg(long)]
    n_attack_bursts: Option<usize>,
    #[arg(long)]
    burst_size: Option<usize>,
    #[arg(long)]
    burst_span_s: Option<f64>,
    #[arg(long)]
    attack_resp_len: Option<u16>,
    #[arg(long)]
    benign_dns_len: Option<u16>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    benign_dns_frac: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    /// Input capture.
    #[arg(long)]
    pcap: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    pcap: PathBuf,
    #[arg(long)]
    out_mask: Option<PathBuf>,
    #[arg(long)]
    out_history: Option<PathBuf>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long)]
    min_dns: Option<usize>,
    #[arg(long)]
    min_len: Option<u32>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    elitism: Option<usize>,
    #[arg(long)]
    fitness_folds: Option<usize>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input capture (mutually exclusive with --features).
    #[arg(long, conflicts_with = "features")]
    pcap: Option<PathBuf>,
    /// Input feature CSV from `ingest`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Feature-mask file; must select the canonical 15 features.
    #[arg(long)]
    feature_mask: Option<PathBuf>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long)]
    min_dns: Option<usize>,
    #[arg(long)]
    min_len: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the padded flows as CSV.
    #[arg(long)]
    export_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dense: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    train_frac: Option<f64>,
}

#[derive(Args)]
struct AttackEadArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Search the loss weight c over 9 outer rounds (x10 / /10).
    #[arg(long)]
    c_search: bool,
    /// Box bounds: `paper` ([0, 1e10]) or `normalized` ([-0.5, 0.5]).
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct AttackCharswapArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rounds: Option<usize>,
    /// Comma list from substitute,delete,insert,swap.
    #[arg(long)]
    ops: Option<String>,
    /// Comma list of feature slot names the attacker may touch.
    #[arg(long)]
    mutable_slots: Option<String>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    ead_report: Option<PathBuf>,
    #[arg(long)]
    charswap_report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Capture sizes to benchmark (defaults to the standard five).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window_s: Option<f64>,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    std::fs::create_dir_all(&cfg.out_dir)?;

    match cli.cmd {
        Cmd::Synth(args) => commands::synth::run(&cfg, args),
        Cmd::Ingest(args) => commands::ingest::run(&cfg, args),
        Cmd::SelectFeatures(args) => commands::select::run(&cfg, args),
        Cmd::Preprocess(args) => commands::preprocess::run(&cfg, args),
        Cmd::Train(args) => commands::train::run(&cfg, args),
        Cmd::AttackEad(args) => commands::attack::run_ead(&cfg, args),
        Cmd::AttackCharswap(args) => commands::attack::run_charswap(&cfg, args),
        Cmd::Evaluate(args) => commands::evaluate::run(&cfg, args),
        Cmd::Bench(args) => commands::bench::run(&cfg, args),
    }
}

/// Exit 1 on validation problems, 2 when an OS-level I/O error is anywhere
/// in the chain.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    let io = err
        .chain()
        .any(|c| c.downcast_ref::<std::io::Error>().is_some());
    if io {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
