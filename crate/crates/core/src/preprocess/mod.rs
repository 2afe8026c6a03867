//! The preprocessing pipeline: tokenization, time-window flow construction,
//! labeling, padding and global min-max normalization, together with the
//! exact inverses the attack engines need to map perturbed tensors back to
//! packet values.

mod dataset;

pub use dataset::{export_flow_csv, DatasetArchive, DatasetError};

use thiserror::Error;

use crate::traffic::{
    FeatureValue, FeatureVector, FlowSet, FlowShape, FlowSpan, Label, NormStats, Vocabulary,
    FEATURE_COUNT,
};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("token {token} out of range for slot {slot} (table length {table_len})")]
    UnknownToken {
        slot: usize,
        token: usize,
        table_len: usize,
    },
    #[error("pad packet would change flow labels (it carries a DNS layer)")]
    NonNeutralPad,
    #[error("cannot normalize: all tensor elements equal {0}")]
    DegenerateRange(f64),
    #[error("cannot normalize an empty tensor")]
    EmptyTensor,
    #[error("invalid label rule: {0}")]
    BadLabelRule(String),
    #[error("capture timestamps are not finite and non-decreasing (packet {0})")]
    BadTimestamps(usize),
}

/// The DNS-amplification labeling heuristic: a flow is an attack when it
/// holds at least `min_dns` DNS packets longer than `min_len` bytes inside
/// the `window_s`-second window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRule {
    pub window_s: f64,
    pub min_dns: usize,
    pub min_len: u32,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule {
            window_s: 30.0,
            min_dns: 3,
            min_len: 100,
        }
    }
}

impl LabelRule {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(self.window_s > 0.0) {
            return Err(PreprocessError::BadLabelRule(format!(
                "window_s {} must be positive",
                self.window_s
            )));
        }
        if self.min_dns < 1 {
            return Err(PreprocessError::BadLabelRule(
                "min_dns must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Per-packet token rows in canonical slot order.
pub type TokenRow = [usize; FEATURE_COUNT];

/// Map every feature value to its first-occurrence index within its slot's
/// table. Running it twice over the same dataset gives identical output.
pub fn tokenize(dataset: &[FeatureVector]) -> (Vec<TokenRow>, Vocabulary) {
    let mut vocab = Vocabulary::new(FEATURE_COUNT);
    let rows = dataset
        .iter()
        .map(|fv| {
            let mut row = [0usize; FEATURE_COUNT];
            for (i, value) in fv.slots.iter().enumerate() {
                row[i] = vocab.observe(i, value);
            }
            row
        })
        .collect();
    (rows, vocab)
}

/// Invert `tokenize`: look every token back up in its slot table. Metadata
/// recoverable from the slots is rebuilt; timestamps are not encoded in
/// tokens and come back as 0.
pub fn detokenize(
    tokens: &[TokenRow],
    vocab: &Vocabulary,
) -> Result<Vec<FeatureVector>, PreprocessError> {
    tokens
        .iter()
        .map(|row| {
            let mut slots: [FeatureValue; FEATURE_COUNT] =
                std::array::from_fn(|_| FeatureValue::Int(0));
            for (i, &tok) in row.iter().enumerate() {
                slots[i] = vocab
                    .value_of(i, tok)
                    .cloned()
                    .ok_or(PreprocessError::UnknownToken {
                        slot: i,
                        token: tok,
                        table_len: vocab.table(i).len(),
                    })?;
            }
            Ok(FeatureVector::from_slots(slots))
        })
        .collect()
}

/// Build one flow per originating packet: the maximal contiguous run
/// `p_i, p_{i+1}, ...` whose timestamps all lie strictly within `window_s`
/// seconds of `p_i`.
///
/// Timestamps must be non-decreasing (capture order), which makes the window
/// predicate monotone, so each flow end is found by binary search.
pub fn build_flows(packets: Vec<FeatureVector>, window_s: f64) -> FlowSet {
    assert!(window_s > 0.0, "window must be positive");
    let ts: Vec<f64> = packets.iter().map(|p| p.timestamp).collect();
    assert!(
        ts.windows(2).all(|w| w[0] <= w[1]),
        "packet timestamps must be non-decreasing"
    );
    let spans: Vec<FlowSpan> = (0..packets.len())
        .map(|i| {
            let len = ts[i..].partition_point(|&t| t - ts[i] < window_s);
            FlowSpan {
                start: i,
                len,
                pad: 0,
            }
        })
        .collect();
    FlowSet::ragged(packets, spans)
}

/// Label one flow: attack iff it contains at least `min_dns` DNS packets
/// strictly longer than `min_len` bytes.
pub fn label_flow<'a, I>(flow: I, rule: &LabelRule) -> Label
where
    I: IntoIterator<Item = &'a FeatureVector>,
{
    let hits = flow
        .into_iter()
        .filter(|p| p.dns_present && p.ip_len_bytes > rule.min_len)
        .count();
    Label::from_bool(hits >= rule.min_dns)
}

/// Label every flow in a set.
pub fn label_flows(flows: &FlowSet, rule: &LabelRule) -> Vec<Label> {
    (0..flows.n_flows())
        .map(|i| label_flow(flows.flow(i), rule))
        .collect()
}

/// Extend every flow to the ragged maximum length by appending copies of the
/// neutral packet. The pad packet must not carry a DNS layer, otherwise it
/// could flip labels.
pub fn pad_flows(flows: FlowSet, neutral: &FeatureVector) -> Result<FlowSet, PreprocessError> {
    if neutral.dns_present {
        return Err(PreprocessError::NonNeutralPad);
    }
    match flows.shape() {
        FlowShape::Padded(_) => Ok(flows),
        FlowShape::Ragged => {
            let max_len = flows.max_real_len();
            let (packets, mut spans) = flows.into_parts();
            for s in &mut spans {
                s.pad = max_len - s.len;
            }
            Ok(FlowSet::padded(packets, spans, max_len, neutral.clone()))
        }
    }
}

/// Scale every element into `[low, high]` using the global min/max over the
/// whole tensor. Shape is the caller's view; this operates on flat storage
/// and leaves ordering intact (the map is a monotone affine function).
pub fn normalize(
    values: &mut [f64],
    low: f64,
    high: f64,
) -> Result<NormStats, PreprocessError> {
    if values.is_empty() {
        return Err(PreprocessError::EmptyTensor);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values.iter() {
        min = min.min(v);
        max = max.max(v);
    }
    if min == max {
        return Err(PreprocessError::DegenerateRange(min));
    }
    let stats = NormStats::new(min, max, low, high).expect("validated range");
    for v in values.iter_mut() {
        *v = stats.apply(*v);
    }
    Ok(stats)
}

/// Invert a prior `normalize` call.
pub fn denormalize(values: &mut [f64], stats: &NormStats) {
    for v in values.iter_mut() {
        *v = stats.invert(*v);
    }
}

/// Apply an existing normalization map (no re-fitting); used when perturbed
/// data re-enters the pipeline.
pub fn apply_normalization(values: &mut [f64], stats: &NormStats) {
    for v in values.iter_mut() {
        *v = stats.apply(*v);
    }
}

/// A rectangular flow tensor: `n_flows x steps x FEATURE_COUNT`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    data: Vec<f64>,
    n_flows: usize,
    steps: usize,
}

impl Tensor3 {
    pub fn new(data: Vec<f64>, n_flows: usize, steps: usize) -> Self {
        assert_eq!(data.len(), n_flows * steps * FEATURE_COUNT);
        Tensor3 {
            data,
            n_flows,
            steps,
        }
    }

    pub fn n_flows(&self) -> usize {
        self.n_flows
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn flow(&self, i: usize) -> &[f64] {
        let w = self.steps * FEATURE_COUNT;
        &self.data[i * w..(i + 1) * w]
    }

    pub fn flow_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.steps * FEATURE_COUNT;
        &mut self.data[i * w..(i + 1) * w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Materialize the token tensor of a padded flow set. Pad packets tokenize
/// through the same vocabulary; values unseen at vocabulary-building time
/// (the pad sentinels in particular) get the reserved sentinel token.
pub fn flow_tensor(flows: &FlowSet, vocab: &Vocabulary) -> Tensor3 {
    let steps = match flows.shape() {
        FlowShape::Padded(n) => n,
        FlowShape::Ragged => panic!("flow_tensor needs a padded flow set"),
    };
    let n = flows.n_flows();
    let mut data = Vec::with_capacity(n * steps * FEATURE_COUNT);
    for i in 0..n {
        for packet in flows.flow(i) {
            for (s, value) in packet.slots.iter().enumerate() {
                data.push(vocab.token_or_sentinel(s, value) as f64);
            }
        }
    }
    Tensor3::new(data, n, steps)
}

/// Materialize ragged token rows, one `len*FEATURE_COUNT` vector per flow.
pub fn ragged_rows(flows: &FlowSet, vocab: &Vocabulary) -> Vec<Vec<f64>> {
    (0..flows.n_flows())
        .map(|i| {
            let mut row = Vec::with_capacity(flows.real_len(i) * FEATURE_COUNT);
            for packet in flows.flow(i).take(flows.real_len(i)) {
                for (s, value) in packet.slots.iter().enumerate() {
                    row.push(vocab.token_or_sentinel(s, value) as f64);
                }
            }
            row
        })
        .collect()
}

/// Re-enter one perturbed raw flow into the fixed pipeline: tokenize against
/// the existing vocabulary (sentinel for unseen values), pad to `steps`, and
/// apply the existing normalization. Returns a `steps x FEATURE_COUNT`
/// row-major tensor ready for the classifier.
pub fn reenter_flow(
    packets: &[FeatureVector],
    vocab: &Vocabulary,
    stats: &NormStats,
    steps: usize,
) -> Vec<f64> {
    assert!(packets.len() <= steps, "flow longer than tensor steps");
    let neutral = FeatureVector::neutral();
    let mut out = Vec::with_capacity(steps * FEATURE_COUNT);
    for t in 0..steps {
        let packet = packets.get(t).unwrap_or(&neutral);
        for (s, value) in packet.slots.iter().enumerate() {
            out.push(stats.apply(vocab.token_or_sentinel(s, value) as f64));
        }
    }
    out
}

/// Check the capture-order precondition the windowing step relies on:
/// finite, non-decreasing timestamps.
pub fn validate_capture_order(features: &[FeatureVector]) -> Result<(), PreprocessError> {
    for (i, fv) in features.iter().enumerate() {
        if !fv.timestamp.is_finite() {
            return Err(PreprocessError::BadTimestamps(i));
        }
        if i > 0 && fv.timestamp < features[i - 1].timestamp {
            return Err(PreprocessError::BadTimestamps(i));
        }
    }
    Ok(())
}

/// Everything the preprocessing stage hands downstream.
#[derive(Debug)]
pub struct PipelineOutput {
    /// Padded flows over the source capture.
    pub flows: FlowSet,
    pub vocab: Vocabulary,
    pub stats: NormStats,
    /// Normalized padded token tensor.
    pub tensor: Tensor3,
    pub labels: Vec<Label>,
}

/// Run the full preprocessing chain on an extracted capture: tokenize,
/// window into flows, label, pad, tensorize, normalize.
pub fn run_pipeline(
    features: Vec<FeatureVector>,
    rule: &LabelRule,
) -> Result<PipelineOutput, PreprocessError> {
    rule.validate()?;
    validate_capture_order(&features)?;
    let (_tokens, vocab) = tokenize(&features);
    let ragged = build_flows(features, rule.window_s);
    let labels = label_flows(&ragged, rule);
    let flows = pad_flows(ragged, &FeatureVector::neutral())?;
    let mut tensor = flow_tensor(&flows, &vocab);
    let stats = normalize(tensor.as_mut_slice(), -0.5, 0.5)?;
    Ok(PipelineOutput {
        flows,
        vocab,
        stats,
        tensor,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::slot;
    use proptest::prelude::*;

    /// Quick packet builder: `dns` + `len` drive labeling, `addr` makes the
    /// dst slot distinguishable, everything else stays neutral.
    fn pkt(ts: f64, dns: bool, len: u32, addr: &str) -> FeatureVector {
        let mut fv = FeatureVector::neutral();
        fv.timestamp = ts;
        fv.dns_present = dns;
        fv.ip_len_bytes = len;
        fv.slots[slot::DST_ADDR] = FeatureValue::text(addr);
        fv.slots[slot::IP_LEN] = FeatureValue::Int(len as u64);
        fv.slots[slot::DNS_RA] = if dns {
            FeatureValue::Int(1)
        } else {
            FeatureValue::text(crate::traffic::NEUTRAL_TEXT)
        };
        fv
    }

    /// Brute-force O(n^2) flow definition: scan forward from every packet.
    fn brute_force_spans(ts: &[f64], window: f64) -> Vec<(usize, usize)> {
        (0..ts.len())
            .map(|i| {
                let mut len = 0;
                for j in i..ts.len() {
                    if ts[j] - ts[i] < window {
                        len += 1;
                    } else {
                        break;
                    }
                }
                (i, len)
            })
            .collect()
    }

    #[test]
    fn tokenize_first_occurrence_example() {
        let packets: Vec<FeatureVector> = ["a.b", "c.d", "a.b"]
            .iter()
            .map(|a| pkt(0.0, false, 60, a))
            .collect();
        let (rows, vocab) = tokenize(&packets);
        let dst: Vec<usize> = rows.iter().map(|r| r[slot::DST_ADDR]).collect();
        assert_eq!(dst, vec![0, 1, 0]);
        assert_eq!(
            vocab.table(slot::DST_ADDR),
            &[FeatureValue::text("a.b"), FeatureValue::text("c.d")]
        );
    }

    #[test]
    fn tokenize_empty_dataset() {
        let (rows, vocab) = tokenize(&[]);
        assert!(rows.is_empty());
        for s in 0..FEATURE_COUNT {
            assert!(vocab.table(s).is_empty());
        }
    }

    #[test]
    fn tokenize_is_deterministic() {
        let packets: Vec<FeatureVector> = (0..50)
            .map(|i| pkt(i as f64, i % 3 == 0, 100 + i, &format!("10.0.0.{}", i % 7)))
            .collect();
        let (r1, v1) = tokenize(&packets);
        let (r2, v2) = tokenize(&packets);
        assert_eq!(r1, r2);
        assert_eq!(v1, v2);
    }

    #[test]
    fn detokenize_inverts_tokenize() {
        let packets: Vec<FeatureVector> = (0..40)
            .map(|i| pkt(i as f64, i % 2 == 0, 50 + i * 3, &format!("10.9.{}.1", i % 5)))
            .collect();
        let (rows, vocab) = tokenize(&packets);
        let back = detokenize(&rows, &vocab).unwrap();
        for (orig, rebuilt) in packets.iter().zip(&back) {
            assert_eq!(orig.slots, rebuilt.slots);
            assert_eq!(orig.dns_present, rebuilt.dns_present);
            assert_eq!(orig.ip_len_bytes, rebuilt.ip_len_bytes);
        }
    }

    #[test]
    fn detokenize_rejects_out_of_range_token() {
        let packets = vec![pkt(0.0, false, 60, "a.b"), pkt(1.0, false, 60, "c.d")];
        let (_, vocab) = tokenize(&packets);
        let mut bad = [0usize; FEATURE_COUNT];
        bad[slot::DST_ADDR] = 5;
        match detokenize(&[bad], &vocab) {
            Err(PreprocessError::UnknownToken {
                token: 5,
                table_len: 2,
                ..
            }) => {}
            other => panic!("expected UnknownToken, got {other:?}"),
        }
    }

    #[test]
    fn build_flows_worked_example() {
        let packets: Vec<FeatureVector> = [0.0, 10.0, 25.0, 40.0]
            .iter()
            .map(|&t| pkt(t, false, 60, "x"))
            .collect();
        let flows = build_flows(packets, 30.0);
        assert_eq!(flows.n_flows(), 4);
        let lens: Vec<usize> = (0..4).map(|i| flows.real_len(i)).collect();
        assert_eq!(lens, vec![3, 2, 2, 1]); // [0,10,25] [10,25] [25,40] [40]
        assert_eq!(flows.span(2).start, 2);
    }

    #[test]
    fn build_flows_single_packet() {
        let flows = build_flows(vec![pkt(5.0, false, 60, "x")], 30.0);
        assert_eq!(flows.n_flows(), 1);
        assert_eq!(flows.real_len(0), 1);
    }

    #[test]
    fn build_flows_zero_spread() {
        let packets: Vec<FeatureVector> =
            (0..6).map(|_| pkt(0.0, false, 60, "x")).collect();
        let flows = build_flows(packets, 30.0);
        for i in 0..6 {
            assert_eq!(flows.real_len(i), 6 - i);
        }
    }

    #[test]
    fn label_flow_threshold_cases() {
        let rule = LabelRule::default();
        let attack: Vec<FeatureVector> = [120, 150, 1378]
            .iter()
            .map(|&l| pkt(0.0, true, l, "x"))
            .collect();
        assert_eq!(label_flow(&attack, &rule), Label::Attack);

        let too_few: Vec<FeatureVector> =
            (0..2).map(|_| pkt(0.0, true, 500, "x")).collect();
        assert_eq!(label_flow(&too_few, &rule), Label::Benign);

        let too_small: Vec<FeatureVector> =
            (0..5).map(|_| pkt(0.0, true, 90, "x")).collect();
        assert_eq!(label_flow(&too_small, &rule), Label::Benign);

        // Threshold is strict: exactly 100 bytes does not count.
        let at_threshold: Vec<FeatureVector> =
            (0..3).map(|_| pkt(0.0, true, 100, "x")).collect();
        assert_eq!(label_flow(&at_threshold, &rule), Label::Benign);
    }

    #[test]
    fn pad_flows_extends_to_max() {
        // Timestamps shaped so real lengths come out [3, 2, 1].
        let packets = vec![
            pkt(0.0, false, 60, "a"),
            pkt(1.0, false, 60, "b"),
            pkt(2.0, false, 60, "c"),
        ];
        let ragged = build_flows(packets, 30.0);
        let padded = pad_flows(ragged, &FeatureVector::neutral()).unwrap();
        assert_eq!(padded.shape(), FlowShape::Padded(3));
        for i in 0..3 {
            assert_eq!(padded.flow_len(i), 3);
            assert_eq!(padded.flow(i).count(), 3);
        }
        // Flow 0 had no padding to start with.
        assert_eq!(padded.span(0).pad, 0);
        assert_eq!(padded.span(2).pad, 2);
    }

    #[test]
    fn pad_flows_is_idempotent() {
        let packets: Vec<FeatureVector> =
            (0..4).map(|i| pkt(i as f64, false, 60, "x")).collect();
        let padded = pad_flows(build_flows(packets, 30.0), &FeatureVector::neutral()).unwrap();
        let lens: Vec<usize> = (0..4).map(|i| padded.flow_len(i)).collect();
        let again = pad_flows(padded, &FeatureVector::neutral()).unwrap();
        let lens2: Vec<usize> = (0..4).map(|i| again.flow_len(i)).collect();
        assert_eq!(lens, lens2);
    }

    #[test]
    fn pad_flows_rejects_dns_pad_packet() {
        let packets = vec![pkt(0.0, false, 60, "x")];
        let ragged = build_flows(packets, 30.0);
        let mut bad = FeatureVector::neutral();
        bad.dns_present = true;
        match pad_flows(ragged, &bad) {
            Err(PreprocessError::NonNeutralPad) => {}
            other => panic!("expected NonNeutralPad, got {other:?}"),
        }
    }

    #[test]
    fn out_of_order_captures_are_rejected_cleanly() {
        let packets = vec![pkt(5.0, false, 60, "a"), pkt(1.0, false, 60, "b")];
        match run_pipeline(packets, &LabelRule::default()) {
            Err(PreprocessError::BadTimestamps(1)) => {}
            other => panic!("expected BadTimestamps, got {other:?}"),
        }
        let mut nan = vec![pkt(0.0, false, 60, "a")];
        nan[0].timestamp = f64::NAN;
        assert!(matches!(
            run_pipeline(nan, &LabelRule::default()),
            Err(PreprocessError::BadTimestamps(0))
        ));
    }

    #[test]
    fn normalize_affine_endpoints() {
        let mut vals = [0.0, 5.0, 10.0];
        let stats = normalize(&mut vals, -0.5, 0.5).unwrap();
        assert_eq!(vals, [-0.5, 0.0, 0.5]);
        assert_eq!(stats.global_min, 0.0);
        assert_eq!(stats.global_max, 10.0);
    }

    #[test]
    fn normalize_rejects_constant_tensor() {
        let mut vals = [3.0; 8];
        match normalize(&mut vals, -0.5, 0.5) {
            Err(PreprocessError::DegenerateRange(v)) => assert_eq!(v, 3.0),
            other => panic!("expected DegenerateRange, got {other:?}"),
        }
    }

    #[test]
    fn denormalize_worked_example() {
        let stats = NormStats::new(0.0, 10.0, -0.5, 0.5).unwrap();
        let mut vals = [-0.5, 0.0, 0.5];
        denormalize(&mut vals, &stats);
        assert_eq!(vals, [0.0, 5.0, 10.0]);
    }

    proptest! {
        /// Flow construction matches the brute-force definition on random
        /// non-decreasing timestamp sequences.
        #[test]
        fn build_flows_matches_brute_force(gaps in prop::collection::vec(0.0f64..20.0, 1..120)) {
            let mut t = 0.0;
            let ts: Vec<f64> = gaps.iter().map(|g| { t += g; t }).collect();
            let packets: Vec<FeatureVector> = ts.iter().map(|&t| pkt(t, false, 60, "x")).collect();
            let flows = build_flows(packets, 30.0);
            let expect = brute_force_spans(&ts, 30.0);
            for (i, (start, len)) in expect.into_iter().enumerate() {
                prop_assert_eq!(flows.span(i).start, start);
                prop_assert_eq!(flows.real_len(i), len);
            }
        }

        /// Padding never alters any flow's label.
        #[test]
        fn padding_preserves_labels(
            cases in prop::collection::vec((0.0f64..10.0, any::<bool>(), 40u32..1400), 1..80)
        ) {
            let rule = LabelRule::default();
            let mut t = 0.0;
            let packets: Vec<FeatureVector> = cases.iter().map(|&(gap, dns, len)| {
                t += gap;
                pkt(t, dns, len, "x")
            }).collect();
            let ragged = build_flows(packets, rule.window_s);
            let before = label_flows(&ragged, &rule);
            let padded = pad_flows(ragged, &FeatureVector::neutral()).unwrap();
            let after = label_flows(&padded, &rule);
            prop_assert_eq!(before, after);
        }

        /// Normalization preserves ordering (monotone affine) and shape.
        #[test]
        fn normalize_is_rank_preserving(vals in prop::collection::vec(-1e6f64..1e6, 2..200)) {
            let mut normed = vals.clone();
            match normalize(&mut normed, -0.5, 0.5) {
                Ok(stats) => {
                    prop_assert_eq!(normed.len(), vals.len());
                    for i in 0..vals.len() {
                        for j in 0..vals.len() {
                            if vals[i] < vals[j] {
                                prop_assert!(normed[i] < normed[j]);
                            }
                        }
                    }
                    // Round trip.
                    denormalize(&mut normed, &stats);
                    for (orig, back) in vals.iter().zip(&normed) {
                        let scale = (stats.global_max - stats.global_min).abs();
                        prop_assert!((orig - back).abs() <= 1e-9 * scale);
                    }
                }
                Err(PreprocessError::DegenerateRange(_)) => {
                    // All-equal input; nothing to check.
                }
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }

        /// Tokenize/detokenize round-trips arbitrary slot contents.
        #[test]
        fn tokenize_round_trip(seed in prop::collection::vec((any::<bool>(), 40u32..1400, 0u8..6), 0..60)) {
            let packets: Vec<FeatureVector> = seed.iter().enumerate().map(|(i, &(dns, len, a))| {
                pkt(i as f64, dns, len, &format!("10.0.0.{a}"))
            }).collect();
            let (rows, vocab) = tokenize(&packets);
            let back = detokenize(&rows, &vocab).unwrap();
            prop_assert_eq!(packets.len(), back.len());
            for (orig, rebuilt) in packets.iter().zip(&back) {
                prop_assert_eq!(&orig.slots, &rebuilt.slots);
            }
        }
    }
}
