use std::fs::File;
use std::io::BufWriter;

use anyhow::{bail, Context, Result};

use dnsamp_core::feature_select::read_mask;
use dnsamp_core::pcap::{extract_features, load_pcap, read_features_csv};
use dnsamp_core::preprocess::{export_flow_csv, run_pipeline, DatasetArchive};
use dnsamp_core::traffic::FlowShape;

use super::out_path;
use crate::config::RunConfig;
use crate::PreprocessArgs;

pub fn run(cfg: &RunConfig, args: PreprocessArgs) -> Result<()> {
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

    // The pipeline's tensor layout is fixed at the canonical 15 slots; a mask
    // file is accepted only when it selects exactly that set.
    if let Some(mask_path) = &args.feature_mask {
        let mask = read_mask(mask_path)
            .with_context(|| format!("reading {}", mask_path.display()))?;
        if !mask.is_canonical() {
            bail!(
                "feature mask selects {:?}; the pipeline supports exactly the canonical 15-slot set",
                mask.selected_names()
            );
        }
    }

    let features = match (&args.pcap, &args.features) {
        (Some(pcap), None) => {
            let cap = load_pcap(pcap).with_context(|| format!("loading {}", pcap.display()))?;
            cap.packets.iter().map(extract_features).collect()
        }
        (None, Some(csv)) => read_features_csv(csv)
            .with_context(|| format!("reading {}", csv.display()))?,
        _ => bail!("exactly one of --pcap or --features is required"),
    };
    if features.is_empty() {
        bail!("input capture holds no IP packets");
    }

    let n_packets = features.len();
    let out = run_pipeline(features, &rule).context("preprocessing")?;
    let attacks = out.labels.iter().filter(|l| l.is_attack()).count();
    let max_len = match out.flows.shape() {
        FlowShape::Padded(n) => n,
        FlowShape::Ragged => unreachable!("pipeline output is padded"),
    };

    let archive = DatasetArchive::from_pipeline(&out, &rule);
    let out_file = out_path(cfg, args.out, "dataset.fds");
    archive
        .write(&out_file)
        .with_context(|| format!("writing {}", out_file.display()))?;

    if let Some(csv_path) = &args.export_csv {
        let file =
            File::create(csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
        export_flow_csv(&out.flows, &out.labels, BufWriter::new(file))
            .context("exporting flow csv")?;
        println!("flow csv -> {}", csv_path.display());
    }

    println!(
        "{} packets -> {} flows (padded to {} packets), {} attack / {} benign",
        n_packets,
        out.flows.n_flows(),
        max_len,
        attacks,
        out.flows.n_flows() - attacks
    );
    println!("dataset -> {}", out_file.display());
    Ok(())
}
