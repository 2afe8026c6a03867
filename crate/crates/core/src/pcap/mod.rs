//! Classic pcap ingestion and synthesis.
//!
//! Only the classic libpcap format is handled (magic `0xa1b2c3d4`, either
//! byte order, linktype Ethernet). Non-IP frames are skipped and counted,
//! never errors: real captures contain ARP and friends.

mod csv;
mod features;
mod read;
mod synth;
mod write;

pub use csv::{read_features_csv, write_features_csv};
pub use features::{candidate_features, extract_features, CANDIDATE_COUNT, CANDIDATE_NAMES};
pub use read::{load_pcap, LoadedCapture};
pub use synth::{synth_pcap, SynthConfig, SynthSummary};
pub use write::PcapWriter;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PcapError {
    #[error("not a classic pcap file (bad magic 0x{0:08x})")]
    BadMagic(u32),
    #[error("truncated record at packet {index}: header claims {claimed} bytes, {remaining} remain")]
    TruncatedRecord {
        index: usize,
        claimed: u32,
        remaining: usize,
    },
    #[error("unsupported link type {0} (only Ethernet is handled)")]
    UnsupportedLinkType(u32),
    #[error("invalid synthesis config: {0}")]
    BadSynthConfig(String),
    #[error("bad feature csv: {0}")]
    BadFeatureCsv(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
