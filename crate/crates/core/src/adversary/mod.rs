//! The two adversarial-example engines: a white-box elastic-net/ISTA attack
//! on the normalized flow tensor, and a black-box character-swap attack on
//! the raw integer features.

mod charswap;
mod ead;

pub use charswap::{
    charswap_attack, charswap_perturb, digits_to_word, digits_to_word_fixed, word_to_digits,
    CharSwapConfig, CharSwapOp, PipelineContext,
};
pub use ead::{ead_attack, ista_shrink, EadConfig};

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::traffic::Label;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("slot {slot} in flow {flow} holds a non-integer value; only integer slots are mutable")]
    NonIntegerSlot { slot: usize, flow: usize },
    #[error("character {0:?} outside the digit alphabet 'a'..='j'")]
    InvalidCharacter(char),
    #[error("invalid attack config: {0}")]
    BadConfig(String),
    #[error("bad report file: {0}")]
    BadReportFile(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome for one flow: tensors before/after, classifier probabilities
/// before/after, and the perturbation distance.
#[derive(Debug, Clone)]
pub struct AttackRow {
    pub flow_id: usize,
    pub label: Label,
    pub p_before: f64,
    pub p_after: f64,
    /// True iff this is an attack flow whose perturbed version classifies
    /// benign.
    pub success: bool,
    /// Average percent perturbation (0..=200 per feature).
    pub pct_perturbed: f64,
    /// Normalized flow tensor before the attack (row-major steps x features).
    pub original: Vec<f64>,
    /// Normalized flow tensor after the attack.
    pub perturbed: Vec<f64>,
}

/// Per-flow attack outcomes over one dataset.
#[derive(Debug, Clone, Default)]
pub struct AttackReport {
    pub rows: Vec<AttackRow>,
}

impl AttackReport {
    /// CSV: one row per flow, no tensors.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "flow_id,label,p_before,p_after,success,pct_perturbed")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.flow_id, r.label, r.p_before, r.p_after, r.success, r.pct_perturbed
            )?;
        }
        Ok(())
    }

    /// Parse a CSV written by `write_csv`. Tensor fields come back empty.
    pub fn read_csv(path: &Path) -> Result<Self, AdversaryError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| AdversaryError::BadReportFile("empty file".into()))?;
        if header.trim() != "flow_id,label,p_before,p_after,success,pct_perturbed" {
            return Err(AdversaryError::BadReportFile(format!(
                "unexpected header `{header}`"
            )));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(AdversaryError::BadReportFile(format!(
                    "line {}: expected 6 fields, found {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let bad = |what: &str| {
                AdversaryError::BadReportFile(format!("line {}: bad {what}", lineno + 2))
            };
            rows.push(AttackRow {
                flow_id: fields[0].parse().map_err(|_| bad("flow_id"))?,
                label: Label::from_u8(fields[1].parse().map_err(|_| bad("label"))?)
                    .ok_or_else(|| bad("label"))?,
                p_before: fields[2].parse().map_err(|_| bad("p_before"))?,
                p_after: fields[3].parse().map_err(|_| bad("p_after"))?,
                success: fields[4].parse().map_err(|_| bad("success"))?,
                pct_perturbed: fields[5].parse().map_err(|_| bad("pct_perturbed"))?,
                original: Vec::new(),
                perturbed: Vec::new(),
            });
        }
        Ok(AttackReport { rows })
    }
}
