//! Persisted preprocessed dataset: a single little-endian binary archive
//! holding everything needed to train, attack, and invert preprocessing.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic            4 bytes  "AMPD"
//! version          u16      currently 1
//! n_slots          u8       feature order, then n_slots names (u16 len + utf8)
//! label rule       f64 window_s, u32 min_dns, u32 min_len
//! norm stats       f64 global_min, global_max, low, high
//! vocabulary       per slot: u32 n_entries, then entries
//!                  entry: u8 tag (0 = int, 1 = text); int: u64; text: u32 len + utf8
//! dims             u32 n_flows, u32 steps, u32 n_features
//! flow lengths     n_flows x u32   (real packets per flow, pads excluded)
//! labels           n_flows x u8
//! tensor           n_flows*steps*n_features x f64, row-major, normalized
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::traffic::{
    FeatureValue, FeatureVector, FlowSet, Label, NormStats, Vocabulary, FEATURE_COUNT, SLOT_NAMES,
};

use super::{LabelRule, PipelineOutput, PreprocessError, Tensor3};

const MAGIC: &[u8; 4] = b"AMPD";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("not a dataset archive (bad magic)")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    BadVersion(u16),
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// The preprocessed dataset as persisted on disk.
#[derive(Debug, Clone)]
pub struct DatasetArchive {
    pub rule: LabelRule,
    pub stats: NormStats,
    pub vocab: Vocabulary,
    /// Normalized padded token tensor.
    pub tensor: Tensor3,
    pub labels: Vec<Label>,
    /// Real (unpadded) length of each flow.
    pub flow_lens: Vec<u32>,
}

impl DatasetArchive {
    pub fn from_pipeline(out: &PipelineOutput, rule: &LabelRule) -> Self {
        let flow_lens = (0..out.flows.n_flows())
            .map(|i| out.flows.real_len(i) as u32)
            .collect();
        DatasetArchive {
            rule: *rule,
            stats: out.stats,
            vocab: out.vocab.clone(),
            tensor: out.tensor.clone(),
            labels: out.labels.clone(),
            flow_lens,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());

        buf.push(FEATURE_COUNT as u8);
        for name in SLOT_NAMES {
            buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
        }

        buf.extend_from_slice(&self.rule.window_s.to_bits().to_le_bytes());
        buf.extend_from_slice(&(self.rule.min_dns as u32).to_le_bytes());
        buf.extend_from_slice(&self.rule.min_len.to_le_bytes());

        for v in [
            self.stats.global_min,
            self.stats.global_max,
            self.stats.low,
            self.stats.high,
        ] {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }

        for s in 0..FEATURE_COUNT {
            let table = self.vocab.table(s);
            buf.extend_from_slice(&(table.len() as u32).to_le_bytes());
            for entry in table {
                match entry {
                    FeatureValue::Int(v) => {
                        buf.push(0);
                        buf.extend_from_slice(&v.to_le_bytes());
                    }
                    FeatureValue::Text(t) => {
                        buf.push(1);
                        buf.extend_from_slice(&(t.len() as u32).to_le_bytes());
                        buf.extend_from_slice(t.as_bytes());
                    }
                }
            }
        }

        buf.extend_from_slice(&(self.tensor.n_flows() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.tensor.steps() as u32).to_le_bytes());
        buf.extend_from_slice(&(FEATURE_COUNT as u32).to_le_bytes());
        for &len in &self.flow_lens {
            buf.extend_from_slice(&len.to_le_bytes());
        }
        for &label in &self.labels {
            buf.push(label.as_u8());
        }
        for &v in self.tensor.as_slice() {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }

        let mut file = fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let data = fs::read(path)?;
        let mut cur = Cursor::new(&data);

        if cur.take(4)? != MAGIC {
            return Err(DatasetError::BadMagic);
        }
        let version = u16::from_le_bytes(cur.take(2)?.try_into().unwrap());
        if version != VERSION {
            return Err(DatasetError::BadVersion(version));
        }

        let n_slots = cur.take(1)?[0] as usize;
        if n_slots != FEATURE_COUNT {
            return Err(DatasetError::Corrupt(format!(
                "expected {FEATURE_COUNT} feature slots, found {n_slots}"
            )));
        }
        for expected in SLOT_NAMES {
            let len = u16::from_le_bytes(cur.take(2)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| DatasetError::Corrupt("slot name not utf8".into()))?;
            if name != expected {
                return Err(DatasetError::Corrupt(format!(
                    "feature order mismatch: expected {expected}, found {name}"
                )));
            }
        }

        let window_s = f64::from_bits(u64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
        let min_dns = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
        let min_len = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        let rule = LabelRule {
            window_s,
            min_dns,
            min_len,
        };

        let mut sv = [0f64; 4];
        for v in &mut sv {
            *v = f64::from_bits(u64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
        }
        let stats = NormStats::new(sv[0], sv[1], sv[2], sv[3])
            .ok_or_else(|| DatasetError::Corrupt("invalid normalization stats".into()))?;

        let mut tables = Vec::with_capacity(FEATURE_COUNT);
        for _ in 0..FEATURE_COUNT {
            let n = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
            let mut table = Vec::with_capacity(n);
            for _ in 0..n {
                let tag = cur.take(1)?[0];
                match tag {
                    0 => {
                        let v = u64::from_le_bytes(cur.take(8)?.try_into().unwrap());
                        table.push(FeatureValue::Int(v));
                    }
                    1 => {
                        let len = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
                        let s = std::str::from_utf8(cur.take(len)?)
                            .map_err(|_| DatasetError::Corrupt("vocab entry not utf8".into()))?;
                        table.push(FeatureValue::Text(s.to_string()));
                    }
                    t => {
                        return Err(DatasetError::Corrupt(format!("unknown vocab tag {t}")));
                    }
                }
            }
            tables.push(table);
        }
        let vocab = Vocabulary::from_tables(tables);

        let n_flows = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
        let steps = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
        let n_feats = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
        if n_feats != FEATURE_COUNT {
            return Err(DatasetError::Corrupt(format!(
                "expected {FEATURE_COUNT} features, found {n_feats}"
            )));
        }

        if n_flows > 0 && steps == 0 {
            return Err(DatasetError::Corrupt("flows with zero time steps".into()));
        }
        let mut flow_lens = Vec::with_capacity(n_flows);
        for _ in 0..n_flows {
            let len = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
            if len as usize > steps {
                return Err(DatasetError::Corrupt(format!(
                    "flow length {len} exceeds tensor steps {steps}"
                )));
            }
            flow_lens.push(len);
        }
        let mut labels = Vec::with_capacity(n_flows);
        for _ in 0..n_flows {
            let b = cur.take(1)?[0];
            labels.push(
                Label::from_u8(b)
                    .ok_or_else(|| DatasetError::Corrupt(format!("bad label byte {b}")))?,
            );
        }
        let n_vals = n_flows * steps * FEATURE_COUNT;
        let mut vals = Vec::with_capacity(n_vals);
        for _ in 0..n_vals {
            vals.push(f64::from_bits(u64::from_le_bytes(
                cur.take(8)?.try_into().unwrap(),
            )));
        }
        if !cur.at_end() {
            return Err(DatasetError::Corrupt("trailing bytes".into()));
        }

        Ok(DatasetArchive {
            rule,
            stats,
            vocab,
            tensor: Tensor3::new(vals, n_flows, steps),
            labels,
            flow_lens,
        })
    }

    /// Reconstruct the real (unpadded) raw packets of flow `i` by inverting
    /// normalization and tokenization. Only real rows are inverted; pad rows
    /// carry sentinel tokens that have no vocabulary entry.
    pub fn raw_flow(&self, i: usize) -> Result<Vec<FeatureVector>, PreprocessError> {
        let row = self.tensor.flow(i);
        let real_len = self.flow_lens[i] as usize;
        let mut packets = Vec::with_capacity(real_len);
        for t in 0..real_len {
            let mut slots: [FeatureValue; FEATURE_COUNT] =
                std::array::from_fn(|_| FeatureValue::Int(0));
            for s in 0..FEATURE_COUNT {
                let y = row[t * FEATURE_COUNT + s];
                let token = self.stats.invert(y).round();
                debug_assert!(token >= 0.0);
                let token = token as usize;
                slots[s] = self
                    .vocab
                    .value_of(s, token)
                    .cloned()
                    .ok_or(PreprocessError::UnknownToken {
                        slot: s,
                        token,
                        table_len: self.vocab.table(s).len(),
                    })?;
            }
            packets.push(FeatureVector::from_slots(slots));
        }
        Ok(packets)
    }
}

/// Export padded flows as CSV: one row per packet (pads included),
/// `flow_id,<slot values...>,label`.
pub fn export_flow_csv<W: Write>(
    flows: &FlowSet,
    labels: &[Label],
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "flow_id")?;
    for name in SLOT_NAMES {
        write!(out, ",{name}")?;
    }
    writeln!(out, ",label")?;
    for i in 0..flows.n_flows() {
        for packet in flows.flow(i) {
            write!(out, "{i}")?;
            for v in &packet.slots {
                write!(out, ",{v}")?;
            }
            writeln!(out, ",{}", labels[i])?;
        }
    }
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Cursor { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DatasetError> {
        if self.data.len() - self.pos < n {
            return Err(DatasetError::Corrupt(format!(
                "unexpected end of archive at byte {}",
                self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn at_end(&self) -> bool {
        self.pos == self.data.len()
    }
}
