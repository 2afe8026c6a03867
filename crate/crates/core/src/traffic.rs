//! Shared domain types: packets, features, flows, labels, vocabularies and
//! normalization statistics. Everything here is immutable after construction
//! and safe to share across workers.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of per-packet features carried through the whole pipeline.
pub const FEATURE_COUNT: usize = 15;

/// Canonical slot order. Vocabulary table `i` always refers to this order.
pub const SLOT_NAMES: [&str; FEATURE_COUNT] = [
    "dst_addr", "src_addr", "ip_len", "ip_id", "ip_flags", "ip_chksum", "dns_id", "dns_ra",
    "sport", "dport", "seq", "ack", "dataofs", "chksum", "urgptr",
];

/// Slot indices by name, for code that addresses individual features.
pub mod slot {
    pub const DST_ADDR: usize = 0;
    pub const SRC_ADDR: usize = 1;
    pub const IP_LEN: usize = 2;
    pub const IP_ID: usize = 3;
    pub const IP_FLAGS: usize = 4;
    pub const IP_CHKSUM: usize = 5;
    pub const DNS_ID: usize = 6;
    pub const DNS_RA: usize = 7;
    pub const SPORT: usize = 8;
    pub const DPORT: usize = 9;
    pub const SEQ: usize = 10;
    pub const ACK: usize = 11;
    pub const DATAOFS: usize = 12;
    pub const CHKSUM: usize = 13;
    pub const URGPTR: usize = 14;
}

/// Sentinel text used for absent address/flag slots before tokenization.
pub const NEUTRAL_TEXT: &str = "∅";

/// Bit width of the integer slots, used to clamp perturbed values back into
/// their protocol field. Address slots have no width.
pub fn slot_bit_width(slot_idx: usize) -> Option<u32> {
    match slot_idx {
        slot::IP_LEN => Some(16),
        slot::IP_ID => Some(16),
        slot::IP_FLAGS => Some(3),
        slot::IP_CHKSUM => Some(16),
        slot::DNS_ID => Some(16),
        slot::DNS_RA => Some(1),
        slot::SPORT => Some(16),
        slot::DPORT => Some(16),
        slot::SEQ => Some(32),
        slot::ACK => Some(32),
        slot::DATAOFS => Some(4),
        slot::CHKSUM => Some(16),
        slot::URGPTR => Some(16),
        _ => None,
    }
}

/// A raw feature value before tokenization. Addresses stay as dotted-quad
/// strings (they are categorical, not ordinal); everything else is an
/// unsigned integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureValue {
    Int(u64),
    Text(String),
}

impl FeatureValue {
    pub fn text(s: &str) -> Self {
        FeatureValue::Text(s.to_string())
    }

    pub fn as_int(&self) -> Option<u64> {
        match self {
            FeatureValue::Int(v) => Some(*v),
            FeatureValue::Text(_) => None,
        }
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Int(v) => write!(f, "{v}"),
            FeatureValue::Text(s) => write!(f, "{s}"),
        }
    }
}

/// IPv4 header fields as decoded from the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpFields {
    pub version: u8,
    pub ihl: u8,
    pub tos: u8,
    /// IP total length in bytes.
    pub len: u16,
    pub id: u16,
    /// The 3-bit flags field as an integer.
    pub flags: u8,
    pub frag_off: u16,
    pub ttl: u8,
    pub proto: u8,
    pub chksum: u16,
    pub src: [u8; 4],
    pub dst: [u8; 4],
}

impl IpFields {
    pub fn src_string(&self) -> String {
        dotted_quad(self.src)
    }

    pub fn dst_string(&self) -> String {
        dotted_quad(self.dst)
    }
}

fn dotted_quad(a: [u8; 4]) -> String {
    format!("{}.{}.{}.{}", a[0], a[1], a[2], a[3])
}

/// Transport-layer fields. The enum makes the protocol invariants
/// structural: a UDP packet cannot carry TCP sequence numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFields {
    Udp {
        sport: u16,
        dport: u16,
        len: u16,
        chksum: u16,
    },
    Tcp {
        sport: u16,
        dport: u16,
        seq: u32,
        ack: u32,
        dataofs: u8,
        reserved: u8,
        flags: u8,
        window: u16,
        chksum: u16,
        urgptr: u16,
    },
    Other,
}

impl TransportFields {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TransportFields::Udp { .. } => "UDP",
            TransportFields::Tcp { .. } => "TCP",
            TransportFields::Other => "OTHER",
        }
    }

    pub fn sport(&self) -> Option<u16> {
        match self {
            TransportFields::Udp { sport, .. } | TransportFields::Tcp { sport, .. } => Some(*sport),
            TransportFields::Other => None,
        }
    }

    pub fn dport(&self) -> Option<u16> {
        match self {
            TransportFields::Udp { dport, .. } | TransportFields::Tcp { dport, .. } => Some(*dport),
            TransportFields::Other => None,
        }
    }
}

/// DNS header fields (header only; question/answer bodies are out of scope).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnsFields {
    pub id: u16,
    pub qr: u8,
    pub opcode: u8,
    pub aa: u8,
    pub tc: u8,
    pub rd: u8,
    pub ra: u8,
    pub z: u8,
    pub rcode: u8,
    pub qdcount: u16,
    pub ancount: u16,
    pub nscount: u16,
    pub arcount: u16,
}

/// One decoded IPv4 packet from a capture. Non-IP frames never become
/// `RawPacket`s; they are skipped and counted at load time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPacket {
    pub ts_sec: u32,
    pub ts_usec: u32,
    /// Captured frame length in bytes (link layer included).
    pub frame_len: u32,
    pub ip: IpFields,
    pub transport: TransportFields,
    /// Present only when a DNS header was decoded from the payload.
    pub dns: Option<DnsFields>,
    /// Transport payload length in bytes.
    pub payload_len: u32,
}

impl RawPacket {
    /// Seconds since the capture epoch at microsecond resolution.
    pub fn timestamp(&self) -> f64 {
        self.ts_sec as f64 + self.ts_usec as f64 * 1e-6
    }
}

/// The 15 selected per-packet features, pre-tokenization, plus the metadata
/// the labeling heuristic needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub slots: [FeatureValue; FEATURE_COUNT],
    pub timestamp: f64,
    pub dns_present: bool,
    pub ip_len_bytes: u32,
}

impl FeatureVector {
    /// Rebuild a vector from bare slot values, deriving the metadata that is
    /// recoverable from them. `dns_present` is encoded by the dns_ra slot
    /// (absent DNS uses the text sentinel) and `ip_len_bytes` by the ip_len
    /// slot; the timestamp is not encoded in feature slots and comes back 0.
    pub fn from_slots(slots: [FeatureValue; FEATURE_COUNT]) -> Self {
        let dns_present = matches!(slots[slot::DNS_RA], FeatureValue::Int(_));
        let ip_len_bytes = slots[slot::IP_LEN]
            .as_int()
            .map(|v| v.min(u32::MAX as u64) as u32)
            .unwrap_or(0);
        FeatureVector {
            slots,
            timestamp: 0.0,
            dns_present,
            ip_len_bytes,
        }
    }

    /// The padding packet: nothing in it can contribute to a DNS label.
    pub fn neutral() -> Self {
        FeatureVector {
            slots: [
                FeatureValue::text(NEUTRAL_TEXT), // dst_addr
                FeatureValue::text(NEUTRAL_TEXT), // src_addr
                FeatureValue::Int(0),             // ip_len
                FeatureValue::Int(0),             // ip_id
                FeatureValue::Int(0),             // ip_flags
                FeatureValue::Int(0),             // ip_chksum
                FeatureValue::Int(0),             // dns_id
                FeatureValue::text(NEUTRAL_TEXT), // dns_ra
                FeatureValue::Int(0),             // sport
                FeatureValue::Int(0),             // dport
                FeatureValue::Int(0),             // seq
                FeatureValue::Int(0),             // ack
                FeatureValue::Int(0),             // dataofs
                FeatureValue::Int(0),             // chksum
                FeatureValue::Int(0),             // urgptr
            ],
            timestamp: 0.0,
            dns_present: false,
            ip_len_bytes: 0,
        }
    }
}

/// Flow classification label: 0 = benign, 1 = attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Benign,
    Attack,
}

impl Label {
    pub fn from_bool(attack: bool) -> Self {
        if attack {
            Label::Attack
        } else {
            Label::Benign
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Benign => 0,
            Label::Attack => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Benign),
            1 => Some(Label::Attack),
            _ => None,
        }
    }

    pub fn is_attack(self) -> bool {
        matches!(self, Label::Attack)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Shape of a flow collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowShape {
    Ragged,
    /// Every flow has exactly this many packets (pad packets included).
    Padded(usize),
}

/// One flow per originating packet: the contiguous run of packets starting
/// at `start`, plus `pad` trailing copies of the pad packet once padded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowSpan {
    pub start: usize,
    pub len: usize,
    pub pad: usize,
}

/// A collection of time-windowed packet flows over one capture.
///
/// Flows are stored as spans over the shared packet table rather than as
/// materialized lists: flow `i` is always the contiguous run of the source
/// capture starting at packet `i`, which keeps an n-packet capture at O(n)
/// memory even though flows overlap heavily.
#[derive(Debug, Clone)]
pub struct FlowSet {
    packets: Vec<FeatureVector>,
    spans: Vec<FlowSpan>,
    shape: FlowShape,
    pad_packet: Option<FeatureVector>,
}

impl FlowSet {
    pub(crate) fn ragged(packets: Vec<FeatureVector>, spans: Vec<FlowSpan>) -> Self {
        debug_assert_eq!(packets.len(), spans.len());
        FlowSet {
            packets,
            spans,
            shape: FlowShape::Ragged,
            pad_packet: None,
        }
    }

    pub(crate) fn padded(
        packets: Vec<FeatureVector>,
        spans: Vec<FlowSpan>,
        max_len: usize,
        pad_packet: FeatureVector,
    ) -> Self {
        FlowSet {
            packets,
            spans,
            shape: FlowShape::Padded(max_len),
            pad_packet: Some(pad_packet),
        }
    }

    pub fn n_flows(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn shape(&self) -> FlowShape {
        self.shape
    }

    pub fn packets(&self) -> &[FeatureVector] {
        &self.packets
    }

    pub fn span(&self, i: usize) -> FlowSpan {
        self.spans[i]
    }

    pub fn pad_packet(&self) -> Option<&FeatureVector> {
        self.pad_packet.as_ref()
    }

    pub(crate) fn into_parts(self) -> (Vec<FeatureVector>, Vec<FlowSpan>) {
        (self.packets, self.spans)
    }

    /// Number of real (unpadded) packets in flow `i`.
    pub fn real_len(&self, i: usize) -> usize {
        self.spans[i].len
    }

    /// Total length of flow `i`, pad packets included.
    pub fn flow_len(&self, i: usize) -> usize {
        let s = self.spans[i];
        s.len + s.pad
    }

    /// Longest real flow in the set.
    pub fn max_real_len(&self) -> usize {
        self.spans.iter().map(|s| s.len).max().unwrap_or(0)
    }

    /// Iterate the packets of flow `i`, pad packets included.
    pub fn flow(&self, i: usize) -> impl Iterator<Item = &FeatureVector> + '_ {
        let s = self.spans[i];
        let pad_ref = self.pad_packet.as_ref();
        let real = self.packets[s.start..s.start + s.len].iter();
        // Ragged sets have pad == 0, so the closure is never reached there.
        let pad = std::iter::repeat_with(move || pad_ref.expect("padded flow without pad packet"))
            .take(s.pad);
        real.chain(pad)
    }
}

/// Per-feature token tables. The token of a value is its first-occurrence
/// index within its slot's table; distinct values at the same slot never
/// share a token.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tables: Vec<Vec<FeatureValue>>,
    lookup: Vec<HashMap<FeatureValue, usize>>,
}

impl Vocabulary {
    pub fn new(n_slots: usize) -> Self {
        Vocabulary {
            tables: vec![Vec::new(); n_slots],
            lookup: vec![HashMap::new(); n_slots],
        }
    }

    pub fn n_slots(&self) -> usize {
        self.tables.len()
    }

    /// Token for `value` at `slot_idx`, inserting it if unseen.
    pub fn observe(&mut self, slot_idx: usize, value: &FeatureValue) -> usize {
        if let Some(&tok) = self.lookup[slot_idx].get(value) {
            return tok;
        }
        let tok = self.tables[slot_idx].len();
        self.tables[slot_idx].push(value.clone());
        self.lookup[slot_idx].insert(value.clone(), tok);
        tok
    }

    pub fn token_of(&self, slot_idx: usize, value: &FeatureValue) -> Option<usize> {
        self.lookup[slot_idx].get(value).copied()
    }

    /// Token for `value`, or the reserved sentinel (= table length) when the
    /// value was never seen during vocabulary construction.
    pub fn token_or_sentinel(&self, slot_idx: usize, value: &FeatureValue) -> usize {
        self.token_of(slot_idx, value)
            .unwrap_or_else(|| self.sentinel(slot_idx))
    }

    pub fn sentinel(&self, slot_idx: usize) -> usize {
        self.tables[slot_idx].len()
    }

    pub fn table(&self, slot_idx: usize) -> &[FeatureValue] {
        &self.tables[slot_idx]
    }

    pub fn value_of(&self, slot_idx: usize, token: usize) -> Option<&FeatureValue> {
        self.tables[slot_idx].get(token)
    }

    /// Rebuild from stored tables (archive load).
    pub fn from_tables(tables: Vec<Vec<FeatureValue>>) -> Self {
        let lookup = tables
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), i))
                    .collect::<HashMap<_, _>>()
            })
            .collect();
        Vocabulary { tables, lookup }
    }

    pub fn tables(&self) -> &[Vec<FeatureValue>] {
        &self.tables
    }
}

/// Global min/max of a tokenized tensor plus the target range, enough to
/// invert the normalization exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub global_min: f64,
    pub global_max: f64,
    pub low: f64,
    pub high: f64,
}

impl NormStats {
    pub fn new(global_min: f64, global_max: f64, low: f64, high: f64) -> Option<Self> {
        if global_min <= global_max && low < high {
            Some(NormStats {
                global_min,
                global_max,
                low,
                high,
            })
        } else {
            None
        }
    }

    /// Forward map: raw value -> normalized range.
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.global_min) * (self.high - self.low) / (self.global_max - self.global_min)
            + self.low
    }

    /// Inverse map: normalized value -> raw scale.
    pub fn invert(&self, y: f64) -> f64 {
        (y - self.low) * (self.global_max - self.global_min) / (self.high - self.low)
            + self.global_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_packet_cannot_be_labeled_dns() {
        let n = FeatureVector::neutral();
        assert!(!n.dns_present);
        assert_eq!(n.ip_len_bytes, 0);
        assert_eq!(n.slots.len(), FEATURE_COUNT);
    }

    #[test]
    fn vocabulary_first_occurrence_order() {
        let mut v = Vocabulary::new(1);
        let a = FeatureValue::text("a.b");
        let c = FeatureValue::text("c.d");
        assert_eq!(v.observe(0, &a), 0);
        assert_eq!(v.observe(0, &c), 1);
        assert_eq!(v.observe(0, &a), 0);
        assert_eq!(v.table(0), &[a.clone(), c.clone()]);
        assert_eq!(v.sentinel(0), 2);
        assert_eq!(v.token_or_sentinel(0, &FeatureValue::text("zz")), 2);
    }

    #[test]
    fn vocabulary_injective_per_slot() {
        let mut v = Vocabulary::new(2);
        let vals = [
            FeatureValue::Int(1),
            FeatureValue::Int(2),
            FeatureValue::Int(1),
            FeatureValue::text("1"),
        ];
        let toks: Vec<usize> = vals.iter().map(|x| v.observe(0, x)).collect();
        assert_eq!(toks, vec![0, 1, 0, 2]); // Int(1) and Text("1") are distinct
    }

    #[test]
    fn norm_stats_round_trip() {
        let s = NormStats::new(0.0, 10.0, -0.5, 0.5).unwrap();
        assert_eq!(s.apply(0.0), -0.5);
        assert_eq!(s.apply(5.0), 0.0);
        assert_eq!(s.apply(10.0), 0.5);
        assert!((s.invert(s.apply(7.3)) - 7.3).abs() < 1e-12);
    }

    #[test]
    fn norm_stats_rejects_bad_ranges() {
        assert!(NormStats::new(5.0, 1.0, -0.5, 0.5).is_none());
        assert!(NormStats::new(0.0, 1.0, 0.5, 0.5).is_none());
    }

    #[test]
    fn label_round_trip() {
        assert_eq!(Label::from_u8(0), Some(Label::Benign));
        assert_eq!(Label::from_u8(1), Some(Label::Attack));
        assert_eq!(Label::from_u8(2), None);
        assert!(Label::Attack.is_attack());
    }
}
