use anyhow::{Context, Result};

use dnsamp_core::pcap::synth_pcap;
use dnsamp_core::seed::derive_seed;

use super::out_path;
use crate::config::RunConfig;
use crate::SynthArgs;

pub fn run(cfg: &RunConfig, args: SynthArgs) -> Result<()> {
    let mut sc = cfg.synth.clone();
    if let Some(v) = args.n_benign {
        sc.n_benign = v;
    }
    if let Some(v) = args.n_attack_bursts {
        sc.n_attack_bursts = v;
    }
    if let Some(v) = args.burst_size {
        sc.burst_size = v;
    }
    if let Some(v) = args.burst_span_s {
        sc.burst_span_s = v;
    }
    if let Some(v) = args.attack_resp_len {
        sc.attack_resp_len = v;
    }
    if let Some(v) = args.benign_dns_len {
        sc.benign_dns_len = v;
    }
    if let Some(v) = args.duration_s {
        sc.duration_s = v;
    }
    if let Some(v) = args.benign_dns_frac {
        sc.benign_dns_frac = v;
    }
    sc.seed = derive_seed(cfg.seed, "synth");

    let out = out_path(cfg, args.out, "capture.pcap");
    let summary = synth_pcap(&sc, &out).context("synthesizing capture")?;
    println!(
        "wrote {} packets ({} in attack bursts) to {}",
        summary.written,
        summary.attack_packets,
        out.display()
    );
    Ok(())
}
