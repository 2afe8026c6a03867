use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};

use dnsamp_core::adversary::{
    charswap_attack, ead_attack, AttackReport, PipelineContext,
};
use dnsamp_core::classifier::load_checkpoint;
use dnsamp_core::evaluate::{attack_summary, AttackSummary};
use dnsamp_core::preprocess::DatasetArchive;
use dnsamp_core::seed::derive_seed;

use super::out_path;
use crate::config::{parse_ops, parse_slots, BoundsMode, RunConfig};
use crate::{AttackCharswapArgs, AttackEadArgs};

fn write_outputs(
    report: &AttackReport,
    csv_path: &Path,
    json_path: &Path,
) -> Result<AttackSummary> {
    let file = File::create(csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    report
        .write_csv(BufWriter::new(file))
        .context("writing report csv")?;

    let summary = attack_summary(report).context("summarizing report")?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(json_path, json)
        .with_context(|| format!("writing {}", json_path.display()))?;
    Ok(summary)
}

pub fn run_ead(cfg: &RunConfig, args: AttackEadArgs) -> Result<()> {
    let mut ec = cfg.ead.clone();
    if let Some(v) = args.beta {
        ec.beta = v;
    }
    if let Some(v) = args.c {
        ec.c = v;
    }
    if let Some(v) = args.steps {
        ec.steps = v;
    }
    if let Some(v) = args.step_size {
        ec.step_size = v;
    }
    if let Some(v) = args.kappa {
        ec.kappa = v;
    }
    if args.c_search {
        ec.c_search = true;
    }
    let bounds = match &args.bounds {
        Some(s) => BoundsMode::parse(s)?,
        None => cfg.bounds,
    };
    let ec = bounds.apply(ec);

    let archive = DatasetArchive::read(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;
    let (params, _) = load_checkpoint(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;

    let report = ead_attack(&params, &archive.tensor, &archive.labels, &archive.stats, &ec)
        .context("running elastic-net attack")?;

    let csv_path = out_path(cfg, args.out_csv, "ead_report.csv");
    let json_path = out_path(cfg, args.out_json, "ead_summary.json");
    let summary = write_outputs(&report, &csv_path, &json_path)?;

    println!(
        "elastic-net attack: {}/{} attack flows flipped ({:.2}%), mean perturbation {:.2}%",
        summary.successes, summary.attack_flows, summary.success_rate, summary.mean_pct_perturbed
    );
    println!("report -> {}", csv_path.display());
    println!("summary -> {}", json_path.display());
    Ok(())
}

pub fn run_charswap(cfg: &RunConfig, args: AttackCharswapArgs) -> Result<()> {
    let mut cc = cfg.charswap.clone();
    if let Some(v) = args.rounds {
        cc.rounds = v;
    }
    if let Some(s) = &args.ops {
        cc.ops = parse_ops(s)?;
    }
    if let Some(s) = &args.mutable_slots {
        cc.mutable_slots = parse_slots(s)?;
    }
    cc.seed = derive_seed(cfg.seed, "charswap");

    let archive = DatasetArchive::read(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;
    let (params, _) = load_checkpoint(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;

    let flows: Vec<_> = (0..archive.tensor.n_flows())
        .map(|i| archive.raw_flow(i))
        .collect::<Result<_, _>>()
        .context("reconstructing raw flows from the archive")?;
    let ctx = PipelineContext {
        vocab: &archive.vocab,
        stats: &archive.stats,
        steps: archive.tensor.steps(),
    };
    let report = charswap_attack(&flows, &archive.labels, &cc, &ctx, &params)
        .context("running character-swap attack")?;

    let csv_path = out_path(cfg, args.out_csv, "charswap_report.csv");
    let json_path = out_path(cfg, args.out_json, "charswap_summary.json");
    let summary = write_outputs(&report, &csv_path, &json_path)?;

    println!(
        "char-swap attack: {}/{} attack flows flipped ({:.2}%), mean perturbation {:.2}%",
        summary.successes, summary.attack_flows, summary.success_rate, summary.mean_pct_perturbed
    );
    println!("report -> {}", csv_path.display());
    println!("summary -> {}", json_path.display());
    Ok(())
}
