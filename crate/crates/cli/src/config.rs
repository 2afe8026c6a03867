//! Run configuration: a flat `key = value` text file covering every module's
//! knobs, with CLI flags overriding individual keys. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use dnsamp_core::adversary::{CharSwapConfig, CharSwapOp, EadConfig};
use dnsamp_core::classifier::ModelConfig;
use dnsamp_core::feature_select::GaConfig;
use dnsamp_core::pcap::SynthConfig;
use dnsamp_core::preprocess::LabelRule;
use dnsamp_core::traffic::SLOT_NAMES;

/// Which box bounds the elastic-net attack uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    /// The verbatim defaults: [0, 1e10].
    Paper,
    /// The normalized data range: [-0.5, +0.5].
    Normalized,
}

impl BoundsMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(BoundsMode::Paper),
            "normalized" => Ok(BoundsMode::Normalized),
            other => bail!("bad bounds `{other}` (expected `paper` or `normalized`)"),
        }
    }

    pub fn apply(self, mut cfg: EadConfig) -> EadConfig {
        match self {
            BoundsMode::Paper => {
                cfg.lower = 0.0;
                cfg.upper = 1e10;
            }
            BoundsMode::Normalized => {
                cfg.lower = -0.5;
                cfg.upper = 0.5;
            }
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub synth: SynthConfig,
    pub label: LabelRule,
    pub ga: GaConfig,
    pub model: ModelConfig,
    /// Train split fraction for the flow-index split.
    pub train_frac: f64,
    pub ead: EadConfig,
    pub bounds: BoundsMode,
    pub charswap: CharSwapConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            synth: SynthConfig::default(),
            label: LabelRule::default(),
            ga: GaConfig::default(),
            model: ModelConfig::default(),
            train_frac: 0.67,
            ead: EadConfig::default(),
            bounds: BoundsMode::Paper,
            charswap: CharSwapConfig::default(),
        }
    }
}

pub fn parse_ops(s: &str) -> Result<Vec<CharSwapOp>> {
    let ops: Vec<CharSwapOp> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| CharSwapOp::parse(t).ok_or_else(|| anyhow!("unknown op `{t}`")))
        .collect::<Result<_>>()?;
    if ops.is_empty() {
        bail!("ops list is empty");
    }
    Ok(ops)
}

pub fn parse_slots(s: &str) -> Result<Vec<usize>> {
    let slots: Vec<usize> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            SLOT_NAMES
                .iter()
                .position(|n| *n == t)
                .ok_or_else(|| anyhow!("unknown feature slot `{t}`"))
        })
        .collect::<Result<_>>()?;
    if slots.is_empty() {
        bail!("mutable slot list is empty");
    }
    Ok(slots)
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let Some(path) = path else {
            return Ok(cfg);
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", idx + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("config line {}", idx + 1))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| anyhow!("bad value `{value}` for `{key}`"))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),

            "synth.n_benign" => self.synth.n_benign = num(key, value)?,
            "synth.n_attack_bursts" => self.synth.n_attack_bursts = num(key, value)?,
            "synth.burst_size" => self.synth.burst_size = num(key, value)?,
            "synth.burst_span_s" => self.synth.burst_span_s = num(key, value)?,
            "synth.attack_resp_len" => self.synth.attack_resp_len = num(key, value)?,
            "synth.benign_dns_len" => self.synth.benign_dns_len = num(key, value)?,
            "synth.duration_s" => self.synth.duration_s = num(key, value)?,
            "synth.benign_dns_frac" => self.synth.benign_dns_frac = num(key, value)?,

            "label.window_s" => self.label.window_s = num(key, value)?,
            "label.min_dns" => self.label.min_dns = num(key, value)?,
            "label.min_len" => self.label.min_len = num(key, value)?,

            "ga.population" => self.ga.population = num(key, value)?,
            "ga.generations" => self.ga.generations = num(key, value)?,
            "ga.crossover_rate" => self.ga.crossover_rate = num(key, value)?,
            "ga.mutation_rate" => self.ga.mutation_rate = num(key, value)?,
            "ga.elitism" => self.ga.elitism = num(key, value)?,
            "ga.fitness_folds" => self.ga.fitness_folds = num(key, value)?,

            "model.hidden" => self.model.hidden = num(key, value)?,
            "model.dense" => self.model.dense = num(key, value)?,
            "model.lr" => self.model.lr = num(key, value)?,
            "model.epochs" => self.model.epochs = num(key, value)?,
            "model.batch" => self.model.batch = num(key, value)?,
            "model.clip" => self.model.clip = num(key, value)?,
            "model.train_frac" => self.train_frac = num(key, value)?,

            "ead.beta" => self.ead.beta = num(key, value)?,
            "ead.c" => self.ead.c = num(key, value)?,
            "ead.steps" => self.ead.steps = num(key, value)?,
            "ead.step_size" => self.ead.step_size = num(key, value)?,
            "ead.kappa" => self.ead.kappa = num(key, value)?,
            "ead.c_search" => self.ead.c_search = num(key, value)?,
            "ead.bounds" => self.bounds = BoundsMode::parse(value)?,

            "charswap.rounds" => self.charswap.rounds = num(key, value)?,
            "charswap.ops" => self.charswap.ops = parse_ops(value)?,
            "charswap.mutable_slots" => self.charswap.mutable_slots = parse_slots(value)?,

            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }
}
