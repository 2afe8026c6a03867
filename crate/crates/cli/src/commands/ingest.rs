use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};

use dnsamp_core::pcap::{extract_features, load_pcap, write_features_csv};

use super::out_path;
use crate::config::RunConfig;
use crate::IngestArgs;

pub fn run(cfg: &RunConfig, args: IngestArgs) -> Result<()> {
    let cap = load_pcap(&args.pcap)
        .with_context(|| format!("loading {}", args.pcap.display()))?;
    let features: Vec<_> = cap.packets.iter().map(extract_features).collect();

    let out = out_path(cfg, args.out, "features.csv");
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    write_features_csv(&features, BufWriter::new(file)).context("writing feature csv")?;

    println!(
        "extracted {} packets ({} non-IP frames skipped) to {}",
        features.len(),
        cap.skipped_non_ip,
        out.display()
    );
    Ok(())
}
