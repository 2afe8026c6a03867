//! Evaluation: the symmetric percent-perturbation metric, attack success
//! rate, confusion matrices, and the per-stage preprocessing benchmark.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::adversary::AttackReport;
use crate::pcap::{extract_features, load_pcap};
use crate::preprocess::{
    build_flows, flow_tensor, label_flows, normalize, pad_flows, ragged_rows, tokenize, LabelRule,
};
use crate::traffic::{FeatureVector, Label};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("report holds no attack-labeled flows")]
    NoAttackFlows,
    #[error("bench input problem: {0}")]
    BenchInput(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Mean symmetric percent difference between two feature sequences: each
/// feature contributes |p - p'| / ((p + p')/2), an unchanged zero feature
/// contributes 0, and the result is expressed as a percentage (at most 200
/// per feature).
pub fn avg_percent_perturbation(p: &[f64], p_prime: &[f64]) -> Result<f64, EvaluateError> {
    if p.len() != p_prime.len() {
        return Err(EvaluateError::LengthMismatch {
            a: p.len(),
            b: p_prime.len(),
        });
    }
    if p.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(p_prime.iter()) {
        let mid = (a + b) / 2.0;
        if mid != 0.0 {
            sum += (a - b).abs() / mid;
        }
        // Both zero: the feature did not change, contribution 0.
    }
    Ok(sum / p.len() as f64 * 100.0)
}

/// Percentage of attack-labeled flows whose perturbed version classifies
/// benign.
pub fn attack_success_rate(report: &AttackReport) -> Result<f64, EvaluateError> {
    let attacks = report.rows.iter().filter(|r| r.label.is_attack()).count();
    if attacks == 0 {
        return Err(EvaluateError::NoAttackFlows);
    }
    let successes = report
        .rows
        .iter()
        .filter(|r| r.label.is_attack() && r.success)
        .count();
    Ok(100.0 * successes as f64 / attacks as f64)
}

/// Aggregate view of an attack run, for the JSON summary and the
/// side-by-side comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct AttackSummary {
    pub attack_flows: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean percent perturbation over attack-labeled flows.
    pub mean_pct_perturbed: f64,
}

pub fn attack_summary(report: &AttackReport) -> Result<AttackSummary, EvaluateError> {
    let success_rate = attack_success_rate(report)?;
    let attack_rows: Vec<_> = report.rows.iter().filter(|r| r.label.is_attack()).collect();
    let mean_pct =
        attack_rows.iter().map(|r| r.pct_perturbed).sum::<f64>() / attack_rows.len() as f64;
    Ok(AttackSummary {
        attack_flows: attack_rows.len(),
        successes: attack_rows.iter().filter(|r| r.success).count(),
        success_rate,
        mean_pct_perturbed: mean_pct,
    })
}

/// Standard 2x2 counts with attack as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    /// Fixed-width text rendering.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("                 predicted\n");
        s.push_str("                 attack      benign\n");
        s.push_str(&format!(
            "actual attack  {:>8} TP {:>8} FN\n",
            self.true_pos, self.false_neg
        ));
        s.push_str(&format!(
            "actual benign  {:>8} FP {:>8} TN\n",
            self.false_pos, self.true_neg
        ));
        s
    }
}

pub fn confusion(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix, EvaluateError> {
    if y_true.len() != y_pred.len() {
        return Err(EvaluateError::LengthMismatch {
            a: y_true.len(),
            b: y_pred.len(),
        });
    }
    let mut m = ConfusionMatrix {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred.iter()) {
        match (t.is_attack(), p.is_attack()) {
            (true, true) => m.true_pos += 1,
            (false, true) => m.false_pos += 1,
            (false, false) => m.true_neg += 1,
            (true, false) => m.false_neg += 1,
        }
    }
    Ok(m)
}

/// The five capture sizes of the timing table.
pub const BENCH_SIZES: [usize; 5] = [500, 1_000, 5_000, 10_000, 100_000];

/// The six benchmarked stages, in table order.
pub const BENCH_STAGES: [&str; 6] = [
    "Loading pcap",
    "Format and Label",
    "Padding",
    "Normalize Padded",
    "Normalize Ragged",
    "Conversion to Ragged",
];

/// One stage's wall-clock milliseconds per capture size, plus the per-packet
/// rates derived at the largest size.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub stage: String,
    pub elapsed_ms: Vec<f64>,
    pub packets_per_ms: f64,
    pub ms_per_packet: f64,
}

fn time_ms<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    // Clamp away a zero from coarse clocks; elapsed stays positive.
    let ms = (start.elapsed().as_secs_f64() * 1e3).max(1e-6);
    (out, ms)
}

fn normalize_ragged_rows(rows: &mut [Vec<f64>]) -> Result<(), EvaluateError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in rows.iter() {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(hi > lo) {
        return Err(EvaluateError::BenchInput(
            "degenerate ragged tensor (all values equal)".into(),
        ));
    }
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            *v = (*v - lo) / (hi - lo) - 0.5;
        }
    }
    Ok(())
}

/// Benchmark the preprocessing stages over captures of the declared sizes.
/// Absolute timings are hardware-dependent and carry no tolerance; the
/// derived per-packet columns come from the largest size.
pub fn bench_pipeline(
    inputs: &[(usize, &Path)],
    rule: &LabelRule,
) -> Result<Vec<TimingRow>, EvaluateError> {
    if inputs.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    let mut elapsed: Vec<Vec<f64>> = vec![Vec::with_capacity(inputs.len()); BENCH_STAGES.len()];

    for &(declared, path) in inputs {
        let (features, t_load) = time_ms(|| -> Result<Vec<FeatureVector>, EvaluateError> {
            let cap = load_pcap(path)
                .map_err(|e| EvaluateError::BenchInput(format!("{}: {e}", path.display())))?;
            Ok(cap.packets.iter().map(extract_features).collect())
        });
        let features = features?;
        if features.len() != declared {
            return Err(EvaluateError::BenchInput(format!(
                "{}: declared {declared} packets, found {}",
                path.display(),
                features.len()
            )));
        }
        crate::preprocess::validate_capture_order(&features)
            .map_err(|e| EvaluateError::BenchInput(format!("{}: {e}", path.display())))?;

        // The ownership clone stays outside the timed region.
        let flow_input = features.clone();
        let ((vocab, flows, _labels), t_format) = time_ms(move || {
            let (_rows, vocab) = tokenize(&features);
            let flows = build_flows(flow_input, rule.window_s);
            let labels = label_flows(&flows, rule);
            (vocab, flows, labels)
        });

        let (mut ragged, t_ragged) = time_ms(|| ragged_rows(&flows, &vocab));
        let (norm_ragged, t_norm_ragged) = time_ms(|| normalize_ragged_rows(&mut ragged));
        norm_ragged?;
        drop(ragged);

        let (mut padded_tensor, t_pad) = time_ms(|| {
            let padded = pad_flows(flows, &FeatureVector::neutral()).expect("neutral pad packet");
            flow_tensor(&padded, &vocab)
        });
        let (norm_padded, t_norm_padded) =
            time_ms(|| normalize(padded_tensor.as_mut_slice(), -0.5, 0.5));
        norm_padded.map_err(|e| EvaluateError::BenchInput(e.to_string()))?;

        for (k, t) in [
            t_load,
            t_format,
            t_pad,
            t_norm_padded,
            t_norm_ragged,
            t_ragged,
        ]
        .into_iter()
        .enumerate()
        {
            elapsed[k].push(t);
        }
    }

    // Derived per-packet columns come from the largest capture.
    let (largest_idx, &(largest_n, _)) = inputs
        .iter()
        .enumerate()
        .max_by_key(|(_, (n, _))| *n)
        .expect("non-empty inputs");
    let rows = BENCH_STAGES
        .iter()
        .enumerate()
        .map(|(k, stage)| {
            let at_largest = elapsed[k][largest_idx];
            TimingRow {
                stage: stage.to_string(),
                elapsed_ms: elapsed[k].clone(),
                packets_per_ms: largest_n as f64 / at_largest,
                ms_per_packet: at_largest / largest_n as f64,
            }
        })
        .collect();
    Ok(rows)
}

/// Timing table as CSV mirroring the benchmark layout.
pub fn write_timing_csv<W: Write>(
    rows: &[TimingRow],
    sizes: &[usize],
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "algorithm")?;
    for s in sizes {
        write!(out, ",{s}_packets")?;
    }
    writeln!(out, ",packets_per_ms,ms_per_packet")?;
    for r in rows {
        write!(out, "{}", r.stage)?;
        for v in &r.elapsed_ms {
            write!(out, ",{v:.3}")?;
        }
        writeln!(out, ",{:.4},{:.4}", r.packets_per_ms, r.ms_per_packet)?;
    }
    Ok(())
}
