use std::fmt::Write as _;

use anyhow::{Context, Result};

use dnsamp_core::feature_select::{candidate_dataset, ga_select};
use dnsamp_core::pcap::load_pcap;
use dnsamp_core::seed::derive_seed;

use super::out_path;
use crate::config::RunConfig;
use crate::SelectArgs;

pub fn run(cfg: &RunConfig, args: SelectArgs) -> Result<()> {
    let mut rule = cfg.label;
    if let Some(v) = args.window_s {
        rule.window_s = v;
    }
    if let Some(v) = args.min_dns {
        rule.min_dns = v;
    }
    if let Some(v) = args.min_len {
        rule.min_len = v;
    }
    rule.validate()?;

    let mut ga = cfg.ga.clone();
    if let Some(v) = args.population {
        ga.population = v;
    }
    if let Some(v) = args.generations {
        ga.generations = v;
    }
    if let Some(v) = args.crossover_rate {
        ga.crossover_rate = v;
    }
    if let Some(v) = args.mutation_rate {
        ga.mutation_rate = v;
    }
    if let Some(v) = args.elitism {
        ga.elitism = v;
    }
    if let Some(v) = args.fitness_folds {
        ga.fitness_folds = v;
    }
    ga.seed = derive_seed(cfg.seed, "feature_select");

    let cap = load_pcap(&args.pcap)
        .with_context(|| format!("loading {}", args.pcap.display()))?;
    let data = candidate_dataset(&cap.packets, &rule).context("building candidate dataset")?;
    let (best, history) = ga_select(&data, &ga).context("running feature selection")?;

    let mask_path = out_path(cfg, args.out_mask, "feature_mask.txt");
    dnsamp_core::feature_select::write_mask(&mask_path, &best)?;

    let hist_path = out_path(cfg, args.out_history, "ga_history.csv");
    let mut csv = String::from("generation,best_fitness\n");
    for (g, f) in history.iter().enumerate() {
        writeln!(csv, "{g},{f}").expect("string write");
    }
    std::fs::write(&hist_path, csv)
        .with_context(|| format!("writing {}", hist_path.display()))?;

    println!(
        "best mask after {} generations: {} features, fitness {:.4}",
        history.len(),
        best.bits(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    println!("selected: {}", best.selected_names().join(", "));
    if best.is_canonical() {
        println!("mask matches the canonical 15-feature set");
    }
    println!("mask -> {}", mask_path.display());
    println!("history -> {}", hist_path.display());
    Ok(())
}
