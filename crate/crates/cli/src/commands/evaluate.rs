use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use dnsamp_core::adversary::AttackReport;
use dnsamp_core::classifier::{classify, load_checkpoint};
use dnsamp_core::evaluate::{attack_summary, confusion, AttackSummary, ConfusionMatrix};
use dnsamp_core::preprocess::DatasetArchive;
use dnsamp_core::traffic::Label;

use crate::config::RunConfig;
use crate::EvaluateArgs;

/// Reference points from the corpus-scale experiment, reported side-by-side
/// with the desk-scale numbers; never asserted.
const REFERENCE_ROWS: [(&str, f64, f64); 2] =
    [("EAD", 67.63, 200.00), ("TextAttack", 100.00, 24.95)];

fn write_confusion(cfg: &RunConfig, name: &str, m: &ConfusionMatrix) -> Result<()> {
    let json_path = cfg.out_dir.join(format!("confusion_{name}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(m).expect("serializes"))
        .with_context(|| format!("writing {}", json_path.display()))?;
    let txt_path = cfg.out_dir.join(format!("confusion_{name}.txt"));
    std::fs::write(&txt_path, m.render())
        .with_context(|| format!("writing {}", txt_path.display()))?;
    Ok(())
}

fn report_confusion(report: &AttackReport) -> Result<ConfusionMatrix> {
    let y_true: Vec<Label> = report.rows.iter().map(|r| r.label).collect();
    let y_pred: Vec<Label> = report
        .rows
        .iter()
        .map(|r| Label::from_bool(r.p_after > 0.5))
        .collect();
    Ok(confusion(&y_true, &y_pred)?)
}

fn load_report(path: &Path) -> Result<AttackReport> {
    AttackReport::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

pub fn run(cfg: &RunConfig, args: EvaluateArgs) -> Result<()> {
    let archive = DatasetArchive::read(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;
    let (params, _) = load_checkpoint(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;

    let preds = classify(&params, &archive.tensor, 0.5)?;
    let baseline = confusion(&archive.labels, &preds)?;
    write_confusion(cfg, "baseline", &baseline)?;
    println!("baseline classifier, accuracy {:.4}:", baseline.accuracy());
    print!("{}", baseline.render());

    let mut ours: Vec<(&str, AttackSummary)> = Vec::new();
    if let Some(path) = &args.ead_report {
        let report = load_report(path)?;
        let m = report_confusion(&report)?;
        write_confusion(cfg, "ead", &m)?;
        println!("after elastic-net attack:");
        print!("{}", m.render());
        ours.push(("EAD", attack_summary(&report)?));
    }
    if let Some(path) = &args.charswap_report {
        let report = load_report(path)?;
        let m = report_confusion(&report)?;
        write_confusion(cfg, "charswap", &m)?;
        println!("after char-swap attack:");
        print!("{}", m.render());
        ours.push(("TextAttack", attack_summary(&report)?));
    }

    if !ours.is_empty() {
        let mut csv = String::from(
            "attack,success_rate_pct,mean_pct_perturbed,reported_success_rate_pct,reported_pct_perturbed\n",
        );
        println!();
        println!(
            "{:<12} {:>14} {:>16} {:>20} {:>20}",
            "attack", "success rate", "pct perturbed", "reported success", "reported pct"
        );
        for (name, s) in &ours {
            let reference = REFERENCE_ROWS.iter().find(|(n, _, _)| n == name);
            let (rs, rp) = reference.map(|&(_, a, b)| (a, b)).unwrap_or((f64::NAN, f64::NAN));
            println!(
                "{:<12} {:>13.2}% {:>15.2}% {:>19.2}% {:>19.2}%",
                name, s.success_rate, s.mean_pct_perturbed, rs, rp
            );
            writeln!(
                csv,
                "{name},{:.4},{:.4},{rs},{rp}",
                s.success_rate, s.mean_pct_perturbed
            )
            .expect("string write");
        }
        let cmp_path = cfg.out_dir.join("attack_comparison.csv");
        std::fs::write(&cmp_path, csv)
            .with_context(|| format!("writing {}", cmp_path.display()))?;
        println!();
        println!("(reported columns are corpus-scale reference points, not targets)");
        println!("comparison -> {}", cmp_path.display());
    }
    Ok(())
}
