use std::fmt::Write as _;

use anyhow::{Context, Result};

use dnsamp_core::classifier::{
    classify, save_checkpoint, select_flows, train, train_test_split,
};
use dnsamp_core::evaluate::confusion;
use dnsamp_core::preprocess::DatasetArchive;
use dnsamp_core::seed::derive_seed;
use dnsamp_core::traffic::Label;

use super::out_path;
use crate::config::RunConfig;
use crate::TrainArgs;

pub fn run(cfg: &RunConfig, args: TrainArgs) -> Result<()> {
    let mut mc = cfg.model.clone();
    if let Some(v) = args.hidden {
        mc.hidden = v;
    }
    if let Some(v) = args.dense {
        mc.dense = v;
    }
    if let Some(v) = args.lr {
        mc.lr = v;
    }
    if let Some(v) = args.epochs {
        mc.epochs = v;
    }
    if let Some(v) = args.batch {
        mc.batch = v;
    }
    if let Some(v) = args.clip {
        mc.clip = v;
    }
    mc.seed = derive_seed(cfg.seed, "classifier");
    let train_frac = args.train_frac.unwrap_or(cfg.train_frac);

    let archive = DatasetArchive::read(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;

    let (train_idx, test_idx) =
        train_test_split(archive.tensor.n_flows(), train_frac, derive_seed(cfg.seed, "split"));
    let train_tensor = select_flows(&archive.tensor, &train_idx);
    let train_labels: Vec<Label> = train_idx.iter().map(|&i| archive.labels[i]).collect();
    let test_tensor = select_flows(&archive.tensor, &test_idx);
    let test_labels: Vec<Label> = test_idx.iter().map(|&i| archive.labels[i]).collect();

    println!(
        "training on {} flows, holding out {}",
        train_idx.len(),
        test_idx.len()
    );
    let (params, history) = train(&train_tensor, &train_labels, &mc).context("training")?;

    let ckpt = out_path(cfg, args.out, "model.ckpt");
    save_checkpoint(&ckpt, &params, &mc)
        .with_context(|| format!("writing {}", ckpt.display()))?;

    let hist_path = out_path(cfg, args.history, "train_history.csv");
    let mut csv = String::from("epoch,loss,accuracy\n");
    for e in &history {
        writeln!(csv, "{},{},{}", e.epoch, e.loss, e.accuracy).expect("string write");
    }
    std::fs::write(&hist_path, csv)
        .with_context(|| format!("writing {}", hist_path.display()))?;

    if let Some(last) = history.last() {
        println!(
            "final training loss {:.4}, accuracy {:.4}",
            last.loss, last.accuracy
        );
    }
    if !test_idx.is_empty() {
        let preds = classify(&params, &test_tensor, 0.5)?;
        let m = confusion(&test_labels, &preds)?;
        println!("held-out accuracy {:.4} on {} flows", m.accuracy(), m.total());
        print!("{}", m.render());
    }
    println!("checkpoint -> {}", ckpt.display());
    println!("history -> {}", hist_path.display());
    Ok(())
}
