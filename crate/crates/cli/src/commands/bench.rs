use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};

use dnsamp_core::evaluate::{bench_pipeline, write_timing_csv, BENCH_SIZES};
use dnsamp_core::pcap::{synth_pcap, SynthConfig};
use dnsamp_core::seed::derive_seed;

use super::out_path;
use crate::config::RunConfig;
use crate::BenchArgs;

/// Capture shape for benchmark inputs: sparse enough that 30-second flows
/// stay small even at 100k packets.
fn bench_synth_config(n: usize, seed: u64) -> SynthConfig {
    let bursts = (n / 500).max(1);
    let burst_size = 4;
    SynthConfig {
        n_benign: n.saturating_sub(bursts * burst_size),
        n_attack_bursts: bursts,
        burst_size,
        burst_span_s: 10.0,
        duration_s: n as f64 * 5.0,
        benign_dns_frac: 0.2,
        seed,
        ..Default::default()
    }
}

pub fn run(cfg: &RunConfig, args: BenchArgs) -> Result<()> {
    let mut rule = cfg.label;
    if let Some(v) = args.window_s {
        rule.window_s = v;
    }
    rule.validate()?;

    let sizes = args.sizes.unwrap_or_else(|| BENCH_SIZES.to_vec());

    let mut paths: Vec<(usize, PathBuf)> = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let path = cfg.out_dir.join(format!("bench_{n}.pcap"));
        let sc = bench_synth_config(n, derive_seed(cfg.seed, &format!("bench{n}")));
        let summary =
            synth_pcap(&sc, &path).with_context(|| format!("synthesizing {n}-packet capture"))?;
        println!("bench capture {n}: {} packets -> {}", summary.written, path.display());
        paths.push((n, path));
    }

    let inputs: Vec<(usize, &std::path::Path)> =
        paths.iter().map(|(n, p)| (*n, p.as_path())).collect();
    let rows = bench_pipeline(&inputs, &rule).context("running benchmark")?;

    let out = out_path(cfg, args.out, "timing.csv");
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    write_timing_csv(&rows, &sizes, BufWriter::new(file)).context("writing timing csv")?;

    print!("{:<22}", "algorithm");
    for n in &sizes {
        print!(" {:>12}", format!("{n} pkts"));
    }
    println!(" {:>12} {:>12}", "packets/ms", "ms/packet");
    for r in &rows {
        print!("{:<22}", r.stage);
        for v in &r.elapsed_ms {
            print!(" {v:>12.2}");
        }
        println!(" {:>12.3} {:>12.5}", r.packets_per_ms, r.ms_per_packet);
    }

    // Per-packet cost of the padded route (pad + normalize) against the
    // ragged route (convert + normalize), at the largest size.
    let per_packet = |stage: &str| {
        rows.iter()
            .find(|r| r.stage == stage)
            .map(|r| r.ms_per_packet)
            .unwrap_or(f64::NAN)
    };
    let padded = per_packet("Padding") + per_packet("Normalize Padded");
    let ragged = per_packet("Conversion to Ragged") + per_packet("Normalize Ragged");
    println!(
        "padded route {padded:.5} ms/packet vs ragged route {ragged:.5} ms/packet (delta {:+.5})",
        padded - ragged
    );
    println!("timing table -> {}", out.display());
    Ok(())
}
