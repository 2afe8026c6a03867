//! Workbench for DNS-amplification flow classification and adversarial
//! examples: pcap ingestion and synthesis, the tokenize/window/label/pad/
//! normalize preprocessing chain, a from-scratch LSTM classifier with exact
//! input gradients, an elastic-net (ISTA) attack and a character-swap attack,
//! and the evaluation metrics and timing benchmarks that tie them together.

pub mod adversary;
pub mod classifier;
pub mod evaluate;
pub mod feature_select;
pub mod pcap;
pub mod preprocess;
pub mod seed;
pub mod traffic;
