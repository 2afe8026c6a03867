//! Character-swap attack: integer features are spelled as words over the
//! digit alphabet 'a'..='j', edited one character operation at a time, and
//! parsed back. The perturbation loop never queries the model; the classifier
//! only scores the result for reporting, per the black-box threat model.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{forward, ModelParams};
use crate::evaluate::avg_percent_perturbation;
use crate::preprocess::reenter_flow;
use crate::traffic::{
    slot_bit_width, FeatureValue, FeatureVector, Label, NormStats, Vocabulary, FEATURE_COUNT,
};

use super::{AdversaryError, AttackReport, AttackRow};

/// Digit alphabet: 0 -> 'a' ... 9 -> 'j'.
const ALPHABET: [char; 10] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharSwapOp {
    Substitute,
    Delete,
    Insert,
    Swap,
}

impl CharSwapOp {
    pub const ALL: [CharSwapOp; 4] = [
        CharSwapOp::Substitute,
        CharSwapOp::Delete,
        CharSwapOp::Insert,
        CharSwapOp::Swap,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "substitute" => Some(CharSwapOp::Substitute),
            "delete" => Some(CharSwapOp::Delete),
            "insert" => Some(CharSwapOp::Insert),
            "swap" => Some(CharSwapOp::Swap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CharSwapConfig {
    /// Which of the 15 slots the attacker may touch; must hold integers.
    pub mutable_slots: Vec<usize>,
    /// Perturbation passes per flow.
    pub rounds: usize,
    pub ops: Vec<CharSwapOp>,
    pub seed: u64,
}

impl Default for CharSwapConfig {
    fn default() -> Self {
        use crate::traffic::slot;
        CharSwapConfig {
            // Addresses, the victim-side port, flags and dns_ra stay fixed so
            // flow identity survives the perturbation.
            mutable_slots: vec![
                slot::IP_LEN,
                slot::IP_ID,
                slot::IP_CHKSUM,
                slot::DNS_ID,
                slot::SPORT,
                slot::SEQ,
                slot::ACK,
                slot::CHKSUM,
                slot::URGPTR,
            ],
            rounds: 4,
            ops: CharSwapOp::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl CharSwapConfig {
    pub fn validate(&self) -> Result<(), AdversaryError> {
        if self.mutable_slots.is_empty() {
            return Err(AdversaryError::BadConfig(
                "mutable_slots must not be empty".into(),
            ));
        }
        if self.ops.is_empty() {
            return Err(AdversaryError::BadConfig("ops must not be empty".into()));
        }
        if self.mutable_slots.iter().any(|&s| s >= FEATURE_COUNT) {
            return Err(AdversaryError::BadConfig(format!(
                "slot index out of range (must be < {FEATURE_COUNT})"
            )));
        }
        Ok(())
    }
}

/// Spell a non-negative integer as a word: each decimal digit maps to its
/// letter, so 465 becomes "egf" and 0 becomes "a".
pub fn digits_to_word(n: u64) -> String {
    n.to_string()
        .bytes()
        .map(|b| ALPHABET[(b - b'0') as usize])
        .collect()
}

/// Fixed-width variant: left-pads with 'a' (zero) to `width` characters,
/// preserving leading zeros across the round trip.
pub fn digits_to_word_fixed(n: u64, width: usize) -> String {
    let w = digits_to_word(n);
    if w.len() >= width {
        w
    } else {
        let mut padded = String::with_capacity(width);
        for _ in 0..width - w.len() {
            padded.push('a');
        }
        padded.push_str(&w);
        padded
    }
}

/// Exact inverse of `digits_to_word`. Words longer than a u64 saturate.
pub fn word_to_digits(w: &str) -> Result<u64, AdversaryError> {
    let mut acc: u128 = 0;
    for ch in w.chars() {
        let d = ALPHABET
            .iter()
            .position(|&a| a == ch)
            .ok_or(AdversaryError::InvalidCharacter(ch))? as u128;
        acc = (acc * 10 + d).min(u64::MAX as u128);
    }
    Ok(acc as u64)
}

/// Apply one uniformly chosen enabled operation at a uniformly chosen
/// position. Deletion (and adjacent swap) on a one-letter word re-rolls to
/// another enabled operation; if nothing else is enabled the word is
/// returned unchanged.
pub fn charswap_perturb(w: &str, ops: &[CharSwapOp], rng: &mut ChaCha8Rng) -> String {
    assert!(!w.is_empty(), "cannot perturb an empty word");
    let mut chars: Vec<char> = w.chars().collect();
    let len = chars.len();

    let usable: Vec<CharSwapOp> = if len == 1 {
        ops.iter()
            .copied()
            .filter(|op| !matches!(op, CharSwapOp::Delete | CharSwapOp::Swap))
            .collect()
    } else {
        ops.to_vec()
    };
    if usable.is_empty() {
        return w.to_string();
    }
    let op = usable[rng.gen_range(0..usable.len())];

    match op {
        CharSwapOp::Substitute => {
            let pos = rng.gen_range(0..len);
            chars[pos] = ALPHABET[rng.gen_range(0..ALPHABET.len())];
        }
        CharSwapOp::Delete => {
            let pos = rng.gen_range(0..len);
            chars.remove(pos);
        }
        CharSwapOp::Insert => {
            let pos = rng.gen_range(0..=len);
            chars.insert(pos, ALPHABET[rng.gen_range(0..ALPHABET.len())]);
        }
        CharSwapOp::Swap => {
            let pos = rng.gen_range(0..len - 1);
            chars.swap(pos, pos + 1);
        }
    }
    chars.into_iter().collect()
}

/// Everything from preprocessing the perturbed flows must pass back through:
/// the fitted vocabulary, normalization statistics, and the padded length.
pub struct PipelineContext<'a> {
    pub vocab: &'a Vocabulary,
    pub stats: &'a NormStats,
    pub steps: usize,
}

/// Saturate a parsed value back into its protocol field.
fn clamp_to_width(value: u64, width: Option<u32>) -> u64 {
    match width {
        Some(w) if w < 64 => value.min((1u64 << w) - 1),
        _ => value,
    }
}

/// Raw integer feature values of a flow, flattened packet-major, for the
/// percent-perturbation metric. Text slots contribute a constant (they are
/// immutable here), so any change shows up only through integer slots.
fn raw_values(packets: &[FeatureVector]) -> Vec<f64> {
    let mut out = Vec::with_capacity(packets.len() * FEATURE_COUNT);
    for p in packets {
        for v in &p.slots {
            out.push(match v {
                FeatureValue::Int(n) => *n as f64,
                FeatureValue::Text(_) => 0.0,
            });
        }
    }
    out
}

/// Run the character-swap attack. Each round rewrites every mutable integer
/// of every packet: spell as a word, apply one edit, parse back, clamp to
/// the field's bit width. Perturbed flows re-enter tokenize/pad/normalize
/// against the fixed pipeline context and are scored only for the report.
pub fn charswap_attack(
    flows: &[Vec<FeatureVector>],
    labels: &[Label],
    cfg: &CharSwapConfig,
    ctx: &PipelineContext,
    params: &ModelParams,
) -> Result<AttackReport, AdversaryError> {
    cfg.validate()?;
    assert_eq!(flows.len(), labels.len(), "flows/labels length mismatch");

    let mut rows = Vec::with_capacity(flows.len());
    for (i, flow) in flows.iter().enumerate() {
        let original = reenter_flow(flow, ctx.vocab, ctx.stats, ctx.steps);
        let p_before = forward(params, &original).expect("reentered flows are well-shaped");

        if !labels[i].is_attack() {
            rows.push(AttackRow {
                flow_id: i,
                label: labels[i],
                p_before,
                p_after: p_before,
                success: false,
                pct_perturbed: 0.0,
                original: original.clone(),
                perturbed: original,
            });
            continue;
        }

        // One independent stream per flow keeps results schedule-free.
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);

        let mut perturbed = flow.clone();
        for _ in 0..cfg.rounds {
            for packet in &mut perturbed {
                for &s in &cfg.mutable_slots {
                    let value = packet.slots[s]
                        .as_int()
                        .ok_or(AdversaryError::NonIntegerSlot { slot: s, flow: i })?;
                    let word = digits_to_word(value);
                    let edited = charswap_perturb(&word, &cfg.ops, &mut rng);
                    let parsed = clamp_to_width(word_to_digits(&edited)?, slot_bit_width(s));
                    packet.slots[s] = FeatureValue::Int(parsed);
                }
                // ip_len_bytes mirrors the ip_len slot for labeling purposes.
                packet.ip_len_bytes = packet.slots[crate::traffic::slot::IP_LEN]
                    .as_int()
                    .map(|v| v.min(u32::MAX as u64) as u32)
                    .unwrap_or(packet.ip_len_bytes);
            }
        }

        let reentered = reenter_flow(&perturbed, ctx.vocab, ctx.stats, ctx.steps);
        let p_after = forward(params, &reentered).expect("reentered flows are well-shaped");
        let success = p_after <= 0.5; // label 1 needs strict > 0.5
        let pct = avg_percent_perturbation(&raw_values(flow), &raw_values(&perturbed))
            .expect("equal lengths");

        rows.push(AttackRow {
            flow_id: i,
            label: labels[i],
            p_before,
            p_after,
            success,
            pct_perturbed: pct,
            original,
            perturbed: reentered,
        });
    }

    Ok(AttackReport { rows })
}
