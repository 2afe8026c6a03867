//! Genetic-algorithm feature selection over the 42 candidate packet fields.
//!
//! Fitness is the mean k-fold validation accuracy of a lightweight logistic
//! separator on the masked, tokenized, normalized features, minus a size
//! penalty. The shipped pipeline uses the canonical 15 features; this module
//! is the reproduction path for that choice.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pcap::{candidate_features, CANDIDATE_COUNT, CANDIDATE_NAMES};
use crate::preprocess::{build_flows, label_flows, LabelRule};
use crate::traffic::{FeatureValue, Label, RawPacket, SLOT_NAMES};

/// Size-penalty weight in the fitness.
const SIZE_PENALTY: f64 = 0.05;

#[derive(Debug, Error)]
pub enum FeatureSelectError {
    #[error("dataset contains a single class; selection needs both")]
    SingleClassDataset,
    #[error("invalid GA config: {0}")]
    BadConfig(String),
    #[error("bad mask file: {0}")]
    BadMaskFile(String),
    #[error(transparent)]
    Preprocess(#[from] crate::preprocess::PreprocessError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene flip probability.
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
    pub fitness_folds: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 32,
            generations: 40,
            crossover_rate: 0.8,
            mutation_rate: 0.02,
            elitism: 2,
            seed: 0,
            fitness_folds: 3,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), FeatureSelectError> {
        if self.population < 2 {
            return Err(FeatureSelectError::BadConfig(
                "population must be at least 2".into(),
            ));
        }
        if self.elitism >= self.population {
            return Err(FeatureSelectError::BadConfig(
                "elitism must be smaller than the population".into(),
            ));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(FeatureSelectError::BadConfig(format!(
                    "{name} {r} outside [0,1]"
                )));
            }
        }
        if self.fitness_folds < 2 {
            return Err(FeatureSelectError::BadConfig(
                "fitness_folds must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// A feature mask over the 42 candidates; always has at least one bit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genome {
    pub mask: Vec<bool>,
}

impl Genome {
    pub fn bits(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn selected_names(&self) -> Vec<&'static str> {
        CANDIDATE_NAMES
            .iter()
            .zip(self.mask.iter())
            .filter_map(|(n, &b)| if b { Some(*n) } else { None })
            .collect()
    }

    /// The hard-coded default: exactly the 15 canonical pipeline features.
    pub fn canonical() -> Self {
        let mask = CANDIDATE_NAMES
            .iter()
            .map(|n| SLOT_NAMES.contains(n))
            .collect();
        Genome { mask }
    }

    /// Does this mask select exactly the canonical 15-feature set?
    pub fn is_canonical(&self) -> bool {
        *self == Genome::canonical()
    }
}

/// Per-packet 42-field rows plus the flow label of each originating packet.
pub struct CandidateDataset {
    pub rows: Vec<Vec<FeatureValue>>,
    pub labels: Vec<Label>,
}

/// Build the GA's input from a capture: candidate fields per packet, labeled
/// by the packet's own flow.
pub fn candidate_dataset(
    packets: &[RawPacket],
    rule: &LabelRule,
) -> Result<CandidateDataset, FeatureSelectError> {
    let rows = packets.iter().map(candidate_features).collect();
    let features: Vec<_> = packets.iter().map(crate::pcap::extract_features).collect();
    crate::preprocess::validate_capture_order(&features)?;
    let flows = build_flows(features, rule.window_s);
    let labels = label_flows(&flows, rule);
    Ok(CandidateDataset { rows, labels })
}

/// Tokenized + normalized candidate matrix, precomputed once per run.
struct FitnessContext {
    /// Row-major n x CANDIDATE_COUNT normalized token values.
    matrix: Vec<f64>,
    targets: Vec<f64>,
    folds: Vec<Vec<usize>>,
}

impl FitnessContext {
    fn new(data: &CandidateDataset, cfg: &GaConfig) -> Self {
        let n = data.rows.len();
        assert!(
            data.rows.iter().all(|r| r.len() == CANDIDATE_COUNT),
            "candidate rows must have {CANDIDATE_COUNT} fields"
        );
        // First-occurrence tokenization per column.
        let mut matrix = vec![0.0f64; n * CANDIDATE_COUNT];
        for col in 0..CANDIDATE_COUNT {
            let mut seen: HashMap<&FeatureValue, usize> = HashMap::new();
            for (r, row) in data.rows.iter().enumerate() {
                let next = seen.len();
                let tok = *seen.entry(&row[col]).or_insert(next);
                matrix[r * CANDIDATE_COUNT + col] = tok as f64;
            }
        }
        // Per-column min-max to [-0.5, 0.5] so every candidate enters the
        // separator at the same scale; constant columns stay at zero.
        for col in 0..CANDIDATE_COUNT {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in 0..n {
                let v = matrix[r * CANDIDATE_COUNT + col];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > lo {
                for r in 0..n {
                    let v = &mut matrix[r * CANDIDATE_COUNT + col];
                    *v = (*v - lo) / (hi - lo) - 0.5;
                }
            } else {
                for r in 0..n {
                    matrix[r * CANDIDATE_COUNT + col] = 0.0;
                }
            }
        }

        let targets = data.labels.iter().map(|l| l.as_u8() as f64).collect();

        // One fixed fold assignment per run keeps fitness deterministic and
        // schedule-independent.
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x666f6c64)); // "fold"
        idx.shuffle(&mut rng);
        let folds = idx
            .chunks(n.div_ceil(cfg.fitness_folds))
            .map(|c| c.to_vec())
            .collect();

        FitnessContext {
            matrix,
            targets,
            folds,
        }
    }

    /// Mean k-fold validation accuracy of a logistic separator on the masked
    /// columns, minus the size penalty.
    fn fitness(&self, genome: &Genome) -> f64 {
        let cols: Vec<usize> = genome
            .mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| if b { Some(i) } else { None })
            .collect();
        let mut acc_sum = 0.0;
        for v in 0..self.folds.len() {
            let (w, b) = self.fit_logistic(&cols, v);
            acc_sum += self.fold_accuracy(&cols, v, &w, b);
        }
        let mean_acc = acc_sum / self.folds.len() as f64;
        mean_acc - SIZE_PENALTY * cols.len() as f64 / CANDIDATE_COUNT as f64
    }

    fn fit_logistic(&self, cols: &[usize], holdout: usize) -> (Vec<f64>, f64) {
        let mut w = vec![0.0f64; cols.len()];
        let mut b = 0.0f64;
        let train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != holdout)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        if train.is_empty() {
            return (w, b);
        }
        let lr = 0.5;
        for _ in 0..100 {
            let mut gw = vec![0.0f64; cols.len()];
            let mut gb = 0.0f64;
            for &r in &train {
                let row = &self.matrix[r * CANDIDATE_COUNT..(r + 1) * CANDIDATE_COUNT];
                let z: f64 = cols.iter().zip(w.iter()).map(|(&c, wv)| wv * row[c]).sum::<f64>() + b;
                let p = 1.0 / (1.0 + (-z).exp());
                let e = p - self.targets[r];
                for (g, &c) in gw.iter_mut().zip(cols.iter()) {
                    *g += e * row[c];
                }
                gb += e;
            }
            let inv = 1.0 / train.len() as f64;
            for (wv, g) in w.iter_mut().zip(gw.iter()) {
                *wv -= lr * g * inv;
            }
            b -= lr * gb * inv;
        }
        (w, b)
    }

    fn fold_accuracy(&self, cols: &[usize], fold: usize, w: &[f64], b: f64) -> f64 {
        let ids = &self.folds[fold];
        if ids.is_empty() {
            return 0.0;
        }
        let mut correct = 0usize;
        for &r in ids {
            let row = &self.matrix[r * CANDIDATE_COUNT..(r + 1) * CANDIDATE_COUNT];
            let z: f64 = cols.iter().zip(w.iter()).map(|(&c, wv)| wv * row[c]).sum::<f64>() + b;
            let pred = z > 0.0;
            if pred == (self.targets[r] > 0.5) {
                correct += 1;
            }
        }
        correct as f64 / ids.len() as f64
    }
}

fn random_genome(rng: &mut ChaCha8Rng) -> Genome {
    let mut mask: Vec<bool> = (0..CANDIDATE_COUNT).map(|_| rng.gen_bool(0.5)).collect();
    repair(&mut mask, rng);
    Genome { mask }
}

/// Keep the at-least-one-bit invariant after mutation/crossover.
fn repair(mask: &mut [bool], rng: &mut ChaCha8Rng) {
    if !mask.iter().any(|&b| b) {
        let k = rng.gen_range(0..mask.len());
        mask[k] = true;
    }
}

fn tournament<'a>(
    scored: &'a [(Genome, f64)],
    rng: &mut ChaCha8Rng,
) -> &'a Genome {
    let mut best: Option<&(Genome, f64)> = None;
    for _ in 0..3 {
        let pick = &scored[rng.gen_range(0..scored.len())];
        if best.is_none_or(|b| pick.1 > b.1) {
            best = Some(pick);
        }
    }
    &best.unwrap().0
}

/// Run the GA. Returns the best genome ever observed and the per-generation
/// best fitness trace (non-decreasing thanks to elitism).
pub fn ga_select(
    data: &CandidateDataset,
    cfg: &GaConfig,
) -> Result<(Genome, Vec<f64>), FeatureSelectError> {
    cfg.validate()?;
    let has_attack = data.labels.iter().any(|l| l.is_attack());
    let has_benign = data.labels.iter().any(|l| !l.is_attack());
    if !has_attack || !has_benign {
        return Err(FeatureSelectError::SingleClassDataset);
    }

    let ctx = FitnessContext::new(data, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut scored: Vec<(Genome, f64)> = (0..cfg.population)
        .map(|_| {
            let g = random_genome(&mut rng);
            let f = ctx.fitness(&g);
            (g, f)
        })
        .collect();

    let mut history = Vec::with_capacity(cfg.generations);
    let mut best = scored
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .expect("population is non-empty");

    for _gen in 0..cfg.generations {
        // Elites first, in fitness order.
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut next: Vec<Genome> = scored[..cfg.elitism].iter().map(|(g, _)| g.clone()).collect();

        while next.len() < cfg.population {
            let a = tournament(&scored, &mut rng).clone();
            let b = tournament(&scored, &mut rng).clone();
            let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
                let point = rng.gen_range(1..CANDIDATE_COUNT);
                let mut m1 = a.mask.clone();
                let mut m2 = b.mask.clone();
                for k in point..CANDIDATE_COUNT {
                    std::mem::swap(&mut m1[k], &mut m2[k]);
                }
                (Genome { mask: m1 }, Genome { mask: m2 })
            } else {
                (a, b)
            };
            for child in [&mut c1, &mut c2] {
                for bit in child.mask.iter_mut() {
                    if rng.gen_bool(cfg.mutation_rate) {
                        *bit = !*bit;
                    }
                }
                repair(&mut child.mask, &mut rng);
            }
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }

        scored = next
            .into_iter()
            .map(|g| {
                let f = ctx.fitness(&g);
                (g, f)
            })
            .collect();

        let gen_best = scored
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("population is non-empty");
        if gen_best.1 > best.1 {
            best = gen_best.clone();
        }
        history.push(best.1);
    }

    Ok((best.0, history))
}

/// Write a feature-mask file: one `name true|false` line per candidate, in
/// candidate order.
pub fn write_mask(path: &Path, genome: &Genome) -> Result<(), FeatureSelectError> {
    let mut out = String::new();
    for (name, &bit) in CANDIDATE_NAMES.iter().zip(genome.mask.iter()) {
        writeln!(out, "{name} {bit}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a feature-mask file written by `write_mask`.
pub fn read_mask(path: &Path) -> Result<Genome, FeatureSelectError> {
    let text = std::fs::read_to_string(path)?;
    let mut mask = vec![false; CANDIDATE_COUNT];
    let mut seen = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = line.split_once(' ').ok_or_else(|| {
            FeatureSelectError::BadMaskFile(format!("line {}: expected `name bool`", lineno + 1))
        })?;
        let idx = CANDIDATE_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| {
                FeatureSelectError::BadMaskFile(format!("unknown feature `{name}`"))
            })?;
        mask[idx] = value.trim().parse().map_err(|_| {
            FeatureSelectError::BadMaskFile(format!("line {}: bad boolean `{value}`", lineno + 1))
        })?;
        seen += 1;
    }
    if seen != CANDIDATE_COUNT {
        return Err(FeatureSelectError::BadMaskFile(format!(
            "expected {CANDIDATE_COUNT} feature lines, found {seen}"
        )));
    }
    let genome = Genome { mask };
    if genome.bits() == 0 {
        return Err(FeatureSelectError::BadMaskFile(
            "mask selects no features".into(),
        ));
    }
    Ok(genome)
}
