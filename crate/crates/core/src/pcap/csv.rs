//! Feature CSV: the ingest stage's output, one row per packet. Timestamps
//! are printed with Rust's shortest-round-trip float formatting, so parsing
//! the file back reproduces the extracted vectors bit-for-bit.

use std::io::Write;
use std::path::Path;

use crate::traffic::{slot, FeatureValue, FeatureVector, FEATURE_COUNT, NEUTRAL_TEXT, SLOT_NAMES};

use super::PcapError;

pub fn write_features_csv<W: Write>(features: &[FeatureVector], mut out: W) -> std::io::Result<()> {
    write!(out, "ts")?;
    for name in SLOT_NAMES {
        write!(out, ",{name}")?;
    }
    writeln!(out, ",dns_present,ip_len_bytes")?;
    for fv in features {
        write!(out, "{}", fv.timestamp)?;
        for v in &fv.slots {
            write!(out, ",{v}")?;
        }
        writeln!(out, ",{},{}", fv.dns_present, fv.ip_len_bytes)?;
    }
    Ok(())
}

/// Parse a file written by `write_features_csv`. Slot kinds are fixed by the
/// canonical order: address slots stay text, dns_ra is text only for the
/// absent sentinel, everything else parses as an integer.
pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureVector>, PcapError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |line: usize, what: &str| PcapError::BadFeatureCsv(format!("line {line}: {what}"));

    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut expected = String::from("ts");
    for name in SLOT_NAMES {
        expected.push(',');
        expected.push_str(name);
    }
    expected.push_str(",dns_present,ip_len_bytes");
    if header.trim() != expected {
        return Err(bad(1, "unexpected header"));
    }

    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_COUNT + 3 {
            return Err(bad(lineno, "wrong field count"));
        }
        let timestamp: f64 = fields[0].parse().map_err(|_| bad(lineno, "bad ts"))?;
        let mut slots: [FeatureValue; FEATURE_COUNT] =
            std::array::from_fn(|_| FeatureValue::Int(0));
        for (s, slot_value) in slots.iter_mut().enumerate() {
            let raw = fields[1 + s];
            *slot_value = match s {
                slot::DST_ADDR | slot::SRC_ADDR => FeatureValue::text(raw),
                slot::DNS_RA if raw == NEUTRAL_TEXT => FeatureValue::text(raw),
                _ => FeatureValue::Int(
                    raw.parse().map_err(|_| bad(lineno, "bad integer slot"))?,
                ),
            };
        }
        let dns_present: bool = fields[FEATURE_COUNT + 1]
            .parse()
            .map_err(|_| bad(lineno, "bad dns_present"))?;
        let ip_len_bytes: u32 = fields[FEATURE_COUNT + 2]
            .parse()
            .map_err(|_| bad(lineno, "bad ip_len_bytes"))?;
        out.push(FeatureVector {
            slots,
            timestamp,
            dns_present,
            ip_len_bytes,
        });
    }
    Ok(out)
}
