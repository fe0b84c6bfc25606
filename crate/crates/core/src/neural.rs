//! Fully connected networks with reverse-mode gradients.
//!
//! Hidden layers use ReLU and the output layer is linear. Parameters live in a
//! single flat vector, layer by layer, each layer storing its weight matrix
//! row-major (`outputs × inputs`) followed by its biases.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::rng_stream;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    /// Per-feature input offset, subtracted before the first layer.
    pub input_mean: Vec<f64>,
    /// Per-feature input divisor.
    pub input_scale: Vec<f64>,
    pub seed: u64,
}

/// Intermediate values of one forward pass, consumed by [`MlpModel::backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the standardized input, the last entry the output.
    pub activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl MlpModel {
    /// He-initialized hidden layers, Xavier-initialized output, zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(sizes)?;
        model.seed = seed;
        let mut rng = rng_stream(seed, "neural/init");
        let last = sizes.len() - 2;
        let mut offset = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = if l == last {
                (2.0 / (fan_in + fan_out) as f64).sqrt()
            } else {
                (2.0 / fan_in as f64).sqrt()
            };
            for p in &mut model.params[offset..offset + fan_in * fan_out] {
                let z: f64 = rng.sample(StandardNormal);
                *p = z * std;
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(model)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig("network needs >= 2 non-empty layers".into()));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
            input_mean: vec![0.0; sizes[0]],
            input_scale: vec![1.0; sizes[0]],
            seed: 0,
        })
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `(weights offset, biases offset)` of layer `l` in the flat vector.
    pub fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let start = param_count(&self.sizes[..=l]);
        (start, start + self.sizes[l] * self.sizes[l + 1])
    }

    /// Consistent shapes and finite values everywhere.
    pub fn check(&self) -> Result<()> {
        let expected = param_count(&self.sizes);
        if self.params.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: self.params.len() });
        }
        if self.input_mean.len() != self.inputs() || self.input_scale.len() != self.inputs() {
            return Err(Error::DimensionMismatch { expected: self.inputs(), actual: self.input_mean.len() });
        }
        let finite = self.params.iter().chain(&self.input_mean).all(|v| v.is_finite())
            && self.input_scale.iter().all(|v| v.is_finite() && *v != 0.0);
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidConfig("model holds non-finite parameters".into()))
        }
    }

    /// Stores per-feature mean and standard deviation of `inputs`. Constant
    /// features keep a unit divisor.
    pub fn fit_normalization(&mut self, inputs: &[Vec<f64>]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = self.inputs();
        let n = inputs.len() as f64;
        let mut mean = vec![0.0; d];
        for x in inputs {
            if x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: x.len() });
            }
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in inputs {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        self.input_scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        self.input_mean = mean;
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(x)?.activations.pop().unwrap_or_default())
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.inputs() {
            return Err(Error::DimensionMismatch { expected: self.inputs(), actual: x.len() });
        }
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(
            x.iter()
                .zip(&self.input_mean)
                .zip(&self.input_scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect::<Vec<f64>>(),
        );
        let last = self.layer_count() - 1;
        for l in 0..self.layer_count() {
            let (wo, bo) = self.layer_offsets(l);
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &activations[l];
            let mut out = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let row = &self.params[wo + j * n_in..wo + (j + 1) * n_in];
                let z = row.iter().zip(input).fold(self.params[bo + j], |acc, (w, a)| acc + w * a);
                out.push(if l < last && z < 0.0 { 0.0 } else { z });
            }
            activations.push(out);
        }
        Ok(ForwardTrace { activations })
    }

    /// Accumulates `∂L/∂θ` into `grads` given `∂L/∂y` for the pass recorded
    /// in `trace`, and returns `∂L/∂x` with respect to the raw input.
    pub fn backward(&self, trace: &ForwardTrace, d_out: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let mut delta = d_out.to_vec();
        let last = self.layer_count() - 1;
        for l in (0..self.layer_count()).rev() {
            let (wo, bo) = self.layer_offsets(l);
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l < last {
                // ReLU: the stored activation is zero exactly where z <= 0.
                for (d, a) in delta.iter_mut().zip(&trace.activations[l + 1]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &trace.activations[l];
            let mut d_in = vec![0.0; n_in];
            for j in 0..n_out {
                let dj = delta[j];
                if dj == 0.0 {
                    continue;
                }
                grads[bo + j] += dj;
                let row = wo + j * n_in;
                for i in 0..n_in {
                    grads[row + i] += dj * input[i];
                    d_in[i] += dj * self.params[row + i];
                }
            }
            delta = d_in;
        }
        delta.iter().zip(&self.input_scale).map(|(d, s)| d / s).collect()
    }

    /// Mean loss and exact gradient over a batch.
    pub fn gradient(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>], loss: Loss) -> Result<(f64, Vec<f64>)> {
        if inputs.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), actual: targets.len() });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut total = 0.0;
        let scale = 1.0 / inputs.len() as f64;
        for (x, t) in inputs.iter().zip(targets) {
            let trace = self.forward_trace(x)?;
            if t.len() != self.outputs() {
                return Err(Error::DimensionMismatch { expected: self.outputs(), actual: t.len() });
            }
            let (l, mut d) = loss.value_and_grad(trace.output(), t);
            total += l;
            d.iter_mut().for_each(|v| *v *= scale);
            self.backward(&trace, &d, &mut grads);
        }
        let mean = total * scale;
        if !mean.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        Ok((mean, grads))
    }

    /// Index of the largest output; ties go to the lowest index.
    pub fn argmax(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Per-sample losses, averaged over output dimensions (MSE, Huber) or summed
/// over classes (cross-entropy on softmax of the outputs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    /// Huber with threshold 1.
    Huber,
    CrossEntropy,
}

impl Loss {
    pub fn value_and_grad(self, y: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
        let d = y.len() as f64;
        match self {
            Loss::Mse => {
                let l = y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / d;
                (l, y.iter().zip(target).map(|(a, b)| 2.0 * (a - b) / d).collect())
            }
            Loss::Huber => {
                let mut l = 0.0;
                let g = y
                    .iter()
                    .zip(target)
                    .map(|(a, b)| {
                        let r = a - b;
                        if r.abs() <= 1.0 {
                            l += 0.5 * r * r;
                            r / d
                        } else {
                            l += r.abs() - 0.5;
                            r.signum() / d
                        }
                    })
                    .collect();
                (l / d, g)
            }
            Loss::CrossEntropy => {
                let p = softmax(y);
                let l = -p
                    .iter()
                    .zip(target)
                    .filter(|(_, t)| **t > 0.0)
                    .map(|(q, t)| t * q.max(f64::MIN_POSITIVE).ln())
                    .sum::<f64>();
                let mass: f64 = target.iter().sum();
                (l, p.iter().zip(target).map(|(q, t)| q * mass - t).collect())
            }
        }
    }
}

pub fn softmax(y: &[f64]) -> Vec<f64> {
    let m = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = y.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// First-order optimizer state for one parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub lr: f64,
    /// L2 coefficient applied to weights, not biases.
    pub weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64, model: &MlpModel) -> Self {
        let n = if kind == OptimizerKind::Adam { model.params.len() } else { 0 };
        Self { kind, lr, weight_decay, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &[f64]) {
        let mut g = grads.to_vec();
        if self.weight_decay != 0.0 {
            for l in 0..model.layer_count() {
                let (wo, bo) = model.layer_offsets(l);
                for i in wo..bo {
                    g[i] += self.weight_decay * model.params[i];
                }
            }
        }
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, gi) in model.params.iter_mut().zip(&g) {
                    *p -= self.lr * gi;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - BETA1.powi(self.t as i32);
                let c2 = 1.0 - BETA2.powi(self.t as i32);
                for i in 0..g.len() {
                    self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g[i];
                    self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g[i] * g[i];
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v[i] / c2;
                    model.params[i] -= self.lr * m_hat / (v_hat.sqrt() + EPSILON);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub loss: Loss,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch: 32,
            epochs: 100,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            loss: Loss::Mse,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Minibatch training with per-epoch seeded shuffling. Returns the mean
/// training loss of every epoch.
pub fn train(model: &mut MlpModel, data: &Dataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.inputs.len() != data.targets.len() {
        return Err(Error::DimensionMismatch { expected: data.inputs.len(), actual: data.targets.len() });
    }
    if cfg.batch == 0 || !(cfg.lr >= 0.0) {
        return Err(Error::InvalidConfig("batch must be >= 1 and learning rate >= 0".into()));
    }
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, cfg.weight_decay, model);
    let mut rng = rng_stream(cfg.seed, "neural/shuffle");
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| data.inputs[i].clone()).collect();
            let ts: Vec<Vec<f64>> = chunk.iter().map(|&i| data.targets[i].clone()).collect();
            let (l, g) = model.gradient(&xs, &ts, cfg.loss).map_err(|e| match e {
                Error::NonFiniteLoss => Error::Divergence { epoch },
                other => other,
            })?;
            total += l * chunk.len() as f64;
            opt.step(model, &g);
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() || model.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        trace.push(mean);
    }
    Ok(trace)
}

/// Largest relative error between [`MlpModel::gradient`] and central finite
/// differences with step `h`, using `max(|a|, |b|, 1e-6)` as the scale.
pub fn gradient_check(model: &MlpModel, inputs: &[Vec<f64>], targets: &[Vec<f64>], loss: Loss, h: f64) -> Result<f64> {
    let (_, analytic) = model.gradient(inputs, targets, loss)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for i in 0..model.params.len() {
        let base = model.params[i];
        probe.params[i] = base + h;
        let (up, _) = probe.gradient(inputs, targets, loss)?;
        probe.params[i] = base - h;
        let (down, _) = probe.gradient(inputs, targets, loss)?;
        probe.params[i] = base;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    Ok(worst)
}
