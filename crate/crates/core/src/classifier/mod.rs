//! The flow classifier: one LSTM layer over the packet sequence, a tanh
//! dense layer on the final hidden state, and a sigmoid output. Training is
//! plain mini-batch SGD on binary cross-entropy with gradient-norm clipping,
//! single-threaded and bit-deterministic for a fixed seed. Backpropagation
//! through time also yields the exact input gradients the white-box attack
//! needs.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::preprocess::Tensor3;
use crate::traffic::{Label, FEATURE_COUNT};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dataset contains a single class; training needs both")]
    SingleClassDataset,
    #[error("loss diverged (NaN/Inf) at epoch {0}")]
    DivergedLoss(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// LSTM hidden state width.
    pub hidden: usize,
    /// Width of the tanh dense layer.
    pub dense: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Global gradient-norm clip.
    pub clip: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 32,
            dense: 16,
            lr: 0.01,
            epochs: 20,
            batch: 32,
            seed: 0,
            clip: 5.0,
        }
    }
}

/// All trainable parameters. Gate weight matrices are `hidden x (input+hidden)`
/// row-major over the concatenated `[x_t, h_{t-1}]` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hidden: usize,
    pub dense: usize,
    pub w_i: Vec<f64>,
    pub w_f: Vec<f64>,
    pub w_g: Vec<f64>,
    pub w_o: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_g: Vec<f64>,
    pub b_o: Vec<f64>,
    /// Dense-1 weights, `dense x hidden` row-major, tanh activation.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Dense-2 weights, length `dense`, sigmoid output.
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl ModelParams {
    pub fn zeros(hidden: usize, dense: usize) -> Self {
        let z = hidden * (FEATURE_COUNT + hidden);
        ModelParams {
            hidden,
            dense,
            w_i: vec![0.0; z],
            w_f: vec![0.0; z],
            w_g: vec![0.0; z],
            w_o: vec![0.0; z],
            b_i: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
            w1: vec![0.0; dense * hidden],
            b1: vec![0.0; dense],
            w2: vec![0.0; dense],
            b2: 0.0,
        }
    }

    /// Seeded uniform init in [-0.08, 0.08], the whole block in one fixed
    /// field order. The forget-gate bias gets +1 on top so cell state
    /// survives the pad suffix at the start of training; with a neutral
    /// forget gate the final-state readout never sees the real packets.
    pub fn init(cfg: &ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut p = ModelParams::zeros(cfg.hidden, cfg.dense);
        p.for_each_mut(|v| *v = rng.gen_range(-0.08..0.08));
        for b in &mut p.b_f {
            *b += 1.0;
        }
        p
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for block in [
            &mut self.w_i,
            &mut self.w_f,
            &mut self.w_g,
            &mut self.w_o,
            &mut self.b_i,
            &mut self.b_f,
            &mut self.b_g,
            &mut self.b_o,
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
        ] {
            for v in block.iter_mut() {
                f(v);
            }
        }
        f(&mut self.b2);
    }

    fn sq_norm(&self) -> f64 {
        let mut s = 0.0;
        for block in [
            &self.w_i, &self.w_f, &self.w_g, &self.w_o, &self.b_i, &self.b_f, &self.b_g,
            &self.b_o, &self.w1, &self.b1, &self.w2,
        ] {
            for v in block.iter() {
                s += v * v;
            }
        }
        s + self.b2 * self.b2
    }

    fn scale(&mut self, s: f64) {
        self.for_each_mut(|v| *v *= s);
    }

    /// self += a * other, field by field.
    fn axpy(&mut self, a: f64, other: &ModelParams) {
        let pairs: [(&mut Vec<f64>, &Vec<f64>); 11] = [
            (&mut self.w_i, &other.w_i),
            (&mut self.w_f, &other.w_f),
            (&mut self.w_g, &other.w_g),
            (&mut self.w_o, &other.w_o),
            (&mut self.b_i, &other.b_i),
            (&mut self.b_f, &other.b_f),
            (&mut self.b_g, &other.b_g),
            (&mut self.b_o, &other.b_o),
            (&mut self.w1, &other.w1),
            (&mut self.b1, &other.b1),
            (&mut self.w2, &other.w2),
        ];
        for (dst, src) in pairs {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += a * s;
            }
        }
        self.b2 += a * other.b2;
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z), overflow-safe.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// y = W x + b for a rows x cols row-major matrix.
fn matvec(w: &[f64], x: &[f64], b: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = b[r];
        for (wv, xv) in row.iter().zip(x.iter()) {
            acc += wv * xv;
        }
        *o = acc;
    }
}

/// out += W^T v for a rows x cols row-major matrix.
fn matvec_t_add(w: &[f64], v: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (r, vv) in v.iter().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        for (o, wv) in out.iter_mut().zip(row.iter()) {
            *o += wv * vv;
        }
    }
}

/// Intermediate activations kept for backpropagation through time.
struct ForwardCache {
    /// Concatenated [x_t, h_{t-1}] per step.
    zs: Vec<Vec<f64>>,
    gate_i: Vec<Vec<f64>>,
    gate_f: Vec<Vec<f64>>,
    gate_g: Vec<Vec<f64>>,
    gate_o: Vec<Vec<f64>>,
    cells: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
    d1: Vec<f64>,
    logit: f64,
}

fn check_flow(flow: &[f64]) -> Result<usize, ClassifierError> {
    if flow.is_empty() || !flow.len().is_multiple_of(FEATURE_COUNT) {
        return Err(ClassifierError::ShapeMismatch(format!(
            "flow length {} is not a positive multiple of {FEATURE_COUNT}",
            flow.len()
        )));
    }
    Ok(flow.len() / FEATURE_COUNT)
}

fn forward_cached(params: &ModelParams, flow: &[f64]) -> ForwardCache {
    let steps = flow.len() / FEATURE_COUNT;
    let hn = params.hidden;
    let zn = FEATURE_COUNT + hn;

    let mut cache = ForwardCache {
        zs: Vec::with_capacity(steps),
        gate_i: Vec::with_capacity(steps),
        gate_f: Vec::with_capacity(steps),
        gate_g: Vec::with_capacity(steps),
        gate_o: Vec::with_capacity(steps),
        cells: Vec::with_capacity(steps),
        hidden: Vec::with_capacity(steps),
        d1: Vec::new(),
        logit: 0.0,
    };

    let mut h = vec![0.0; hn];
    let mut c = vec![0.0; hn];
    let mut pre = vec![0.0; hn];
    for t in 0..steps {
        let x = &flow[t * FEATURE_COUNT..(t + 1) * FEATURE_COUNT];
        let mut z = Vec::with_capacity(zn);
        z.extend_from_slice(x);
        z.extend_from_slice(&h);

        matvec(&params.w_i, &z, &params.b_i, &mut pre);
        let gi: Vec<f64> = pre.iter().map(|&v| sigmoid(v)).collect();
        matvec(&params.w_f, &z, &params.b_f, &mut pre);
        let gf: Vec<f64> = pre.iter().map(|&v| sigmoid(v)).collect();
        matvec(&params.w_g, &z, &params.b_g, &mut pre);
        let gg: Vec<f64> = pre.iter().map(|&v| v.tanh()).collect();
        matvec(&params.w_o, &z, &params.b_o, &mut pre);
        let go: Vec<f64> = pre.iter().map(|&v| sigmoid(v)).collect();

        for k in 0..hn {
            c[k] = gf[k] * c[k] + gi[k] * gg[k];
            h[k] = go[k] * c[k].tanh();
        }

        cache.zs.push(z);
        cache.gate_i.push(gi);
        cache.gate_f.push(gf);
        cache.gate_g.push(gg);
        cache.gate_o.push(go);
        cache.cells.push(c.clone());
        cache.hidden.push(h.clone());
    }

    let mut d_pre = vec![0.0; params.dense];
    matvec(&params.w1, &h, &params.b1, &mut d_pre);
    cache.d1 = d_pre.iter().map(|&v| v.tanh()).collect();
    cache.logit = params
        .w2
        .iter()
        .zip(cache.d1.iter())
        .map(|(w, d)| w * d)
        .sum::<f64>()
        + params.b2;
    cache
}

struct Backprop {
    grads: ModelParams,
    input: Vec<f64>,
}

/// Backpropagate `dlogit` through the readout and the whole recurrence,
/// producing parameter gradients and the exact input gradient.
fn backward(params: &ModelParams, cache: &ForwardCache, dlogit: f64) -> Backprop {
    let hn = params.hidden;
    let dn = params.dense;
    let steps = cache.zs.len();
    let mut g = ModelParams::zeros(hn, dn);
    let mut input = vec![0.0; steps * FEATURE_COUNT];

    let h_last = &cache.hidden[steps - 1];

    // Dense-2 (sigmoid handled by the caller through dlogit).
    for k in 0..dn {
        g.w2[k] = dlogit * cache.d1[k];
    }
    g.b2 = dlogit;

    // Dense-1 with tanh.
    let mut d1_pre = vec![0.0; dn];
    for k in 0..dn {
        d1_pre[k] = dlogit * params.w2[k] * (1.0 - cache.d1[k] * cache.d1[k]);
        g.b1[k] = d1_pre[k];
        for j in 0..hn {
            g.w1[k * hn + j] = d1_pre[k] * h_last[j];
        }
    }
    let mut dh = vec![0.0; hn];
    matvec_t_add(&params.w1, &d1_pre, &mut dh);

    let mut dc = vec![0.0; hn];
    let mut da = vec![0.0; hn];
    for t in (0..steps).rev() {
        let gi = &cache.gate_i[t];
        let gf = &cache.gate_f[t];
        let gg = &cache.gate_g[t];
        let go = &cache.gate_o[t];
        let c_t = &cache.cells[t];
        let z_t = &cache.zs[t];
        let c_prev: &[f64] = if t == 0 { &[] } else { &cache.cells[t - 1] };

        let mut dz = vec![0.0; FEATURE_COUNT + hn];

        // dc accumulates the cell path; dh arrives from the step above.
        for k in 0..hn {
            let tc = c_t[k].tanh();
            dc[k] += dh[k] * go[k] * (1.0 - tc * tc);
        }

        // Output gate.
        for k in 0..hn {
            da[k] = dh[k] * c_t[k].tanh() * go[k] * (1.0 - go[k]);
            g.b_o[k] += da[k];
            let row = &mut g.w_o[k * (FEATURE_COUNT + hn)..(k + 1) * (FEATURE_COUNT + hn)];
            for (rv, zv) in row.iter_mut().zip(z_t.iter()) {
                *rv += da[k] * zv;
            }
        }
        matvec_t_add(&params.w_o, &da, &mut dz);

        // Input gate.
        for k in 0..hn {
            da[k] = dc[k] * gg[k] * gi[k] * (1.0 - gi[k]);
            g.b_i[k] += da[k];
            let row = &mut g.w_i[k * (FEATURE_COUNT + hn)..(k + 1) * (FEATURE_COUNT + hn)];
            for (rv, zv) in row.iter_mut().zip(z_t.iter()) {
                *rv += da[k] * zv;
            }
        }
        matvec_t_add(&params.w_i, &da, &mut dz);

        // Cell candidate.
        for k in 0..hn {
            da[k] = dc[k] * gi[k] * (1.0 - gg[k] * gg[k]);
            g.b_g[k] += da[k];
            let row = &mut g.w_g[k * (FEATURE_COUNT + hn)..(k + 1) * (FEATURE_COUNT + hn)];
            for (rv, zv) in row.iter_mut().zip(z_t.iter()) {
                *rv += da[k] * zv;
            }
        }
        matvec_t_add(&params.w_g, &da, &mut dz);

        // Forget gate (c_{-1} is the zero vector, so its gradient drops out).
        for k in 0..hn {
            let cp = if t == 0 { 0.0 } else { c_prev[k] };
            da[k] = dc[k] * cp * gf[k] * (1.0 - gf[k]);
            g.b_f[k] += da[k];
            let row = &mut g.w_f[k * (FEATURE_COUNT + hn)..(k + 1) * (FEATURE_COUNT + hn)];
            for (rv, zv) in row.iter_mut().zip(z_t.iter()) {
                *rv += da[k] * zv;
            }
        }
        matvec_t_add(&params.w_f, &da, &mut dz);

        // Carry the cell gradient down through the forget gate.
        for k in 0..hn {
            dc[k] *= gf[k];
        }

        input[t * FEATURE_COUNT..(t + 1) * FEATURE_COUNT]
            .copy_from_slice(&dz[..FEATURE_COUNT]);
        dh.copy_from_slice(&dz[FEATURE_COUNT..]);
    }

    Backprop { grads: g, input }
}

/// Pre-sigmoid score of one flow (`steps x FEATURE_COUNT`, row-major).
pub fn logit(params: &ModelParams, flow: &[f64]) -> Result<f64, ClassifierError> {
    check_flow(flow)?;
    Ok(forward_cached(params, flow).logit)
}

/// Probability that one flow is an attack; strictly inside (0, 1).
pub fn forward(params: &ModelParams, flow: &[f64]) -> Result<f64, ClassifierError> {
    Ok(sigmoid(logit(params, flow)?))
}

/// Elementwise `forward` over a tensor.
pub fn predict(params: &ModelParams, flows: &Tensor3) -> Result<Vec<f64>, ClassifierError> {
    (0..flows.n_flows())
        .map(|i| forward(params, flows.flow(i)))
        .collect()
}

/// Label 1 iff probability strictly exceeds `threshold` (0.5 ties go benign).
pub fn classify(
    params: &ModelParams,
    flows: &Tensor3,
    threshold: f64,
) -> Result<Vec<Label>, ClassifierError> {
    Ok(predict(params, flows)?
        .into_iter()
        .map(|p| Label::from_bool(p > threshold))
        .collect())
}

pub fn classify_prob(p: f64, threshold: f64) -> Label {
    Label::from_bool(p > threshold)
}

/// Gradient of the margin score `Z_target - Z_other` with respect to the
/// input. For this binary model the attack logit is `z` and the benign logit
/// is 0, so the margin is `+z` toward Attack and `-z` toward Benign. Same
/// shape as the flow.
pub fn input_gradient(params: &ModelParams, flow: &[f64], target: Label) -> Vec<f64> {
    let cache = forward_cached(params, flow);
    let dlogit = match target {
        Label::Attack => 1.0,
        Label::Benign => -1.0,
    };
    backward(params, &cache, dlogit).input
}

/// Per-epoch training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// Train by mini-batch SGD on binary cross-entropy. Same seed and data give
/// bit-identical parameters.
pub fn train(
    flows: &Tensor3,
    labels: &[Label],
    cfg: &ModelConfig,
) -> Result<(ModelParams, Vec<EpochStats>), ClassifierError> {
    if flows.n_flows() != labels.len() {
        return Err(ClassifierError::ShapeMismatch(format!(
            "{} flows vs {} labels",
            flows.n_flows(),
            labels.len()
        )));
    }
    if flows.n_flows() > 0 && flows.steps() == 0 {
        return Err(ClassifierError::ShapeMismatch(
            "flows have zero time steps".to_string(),
        ));
    }
    let n = labels.len();
    if n == 0 || !labels.iter().any(|l| l.is_attack()) || labels.iter().all(|l| l.is_attack()) {
        return Err(ClassifierError::SingleClassDataset);
    }

    let mut params = ModelParams::init(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch.max(1)) {
            let mut acc = ModelParams::zeros(cfg.hidden, cfg.dense);
            for &i in chunk {
                let flow = flows.flow(i);
                let cache = forward_cached(&params, flow);
                let t = labels[i].as_u8() as f64;
                let loss = softplus(cache.logit) - t * cache.logit;
                if !loss.is_finite() {
                    return Err(ClassifierError::DivergedLoss(epoch));
                }
                loss_sum += loss;
                let dlogit = sigmoid(cache.logit) - t;
                let bp = backward(&params, &cache, dlogit);
                acc.axpy(1.0, &bp.grads);
            }
            acc.scale(1.0 / chunk.len() as f64);
            let norm = acc.sq_norm().sqrt();
            if norm > cfg.clip {
                acc.scale(cfg.clip / norm);
            }
            params.axpy(-cfg.lr, &acc);
        }

        let preds = classify(&params, flows, 0.5)?;
        let correct = preds
            .iter()
            .zip(labels.iter())
            .filter(|(p, l)| p == l)
            .count();
        history.push(EpochStats {
            epoch,
            loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        });
    }

    Ok((params, history))
}

/// Seeded flow-index split; `train_frac` defaults to the usual two-thirds.
pub fn train_test_split(n: usize, train_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let cut = ((n as f64) * train_frac).round() as usize;
    let test = idx.split_off(cut.min(n));
    (idx, test)
}

/// Select rows of a tensor into a new tensor (split materialization).
pub fn select_flows(flows: &Tensor3, idx: &[usize]) -> Tensor3 {
    let w = flows.steps() * FEATURE_COUNT;
    let mut data = Vec::with_capacity(idx.len() * w);
    for &i in idx {
        data.extend_from_slice(flows.flow(i));
    }
    Tensor3::new(data, idx.len(), flows.steps())
}
