//! Mini-batch SGD for the three training criteria.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::data::SyntheticDataset;
use super::losses::{normalize_rows, normalize_rows_backward, nt_xent_with_grad, softmax_cross_entropy, supcon_with_grad};
use super::mlp::{head_logits, DenseLayer, MlpParams};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "SUPCE")]
    SupCe,
    #[serde(rename = "SIMCLR")]
    SimClr,
    #[serde(rename = "SUPCON")]
    SupCon,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::SupCe, Criterion::SimClr, Criterion::SupCon];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::SupCe => "SUPCE",
            Criterion::SimClr => "SIMCLR",
            Criterion::SupCon => "SUPCON",
        }
    }

    pub fn is_contrastive(self) -> bool {
        !matches!(self, Criterion::SupCe)
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::arg(format!("unknown criterion {s:?} (expected SUPCE, SIMCLR or SUPCON)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub criterion: Criterion,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Cosine annealing of the learning rate to zero over the run.
    pub cosine: bool,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Rescales each step's encoder and head gradient to at most this
    /// global L2 norm; 0 disables clipping.
    pub max_grad_norm: f64,
    pub temperature: f64,
    pub augment_noise_sigma: f64,
    pub augment_drop_prob: f64,
    pub hidden: Vec<usize>,
    /// Width of the projection MLP used by contrastive criteria.
    pub projection_dim: usize,
    /// Epochs of head fitting on frozen features for contrastive criteria.
    pub head_epochs: usize,
    pub head_learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::SupCe,
            epochs: 200,
            batch_size: 64,
            learning_rate: 0.05,
            cosine: true,
            momentum: 0.9,
            weight_decay: 5e-4,
            max_grad_norm: 5.0,
            temperature: 0.5,
            augment_noise_sigma: 0.5,
            augment_drop_prob: 0.1,
            hidden: vec![64, 64, 32],
            projection_dim: 32,
            head_epochs: 100,
            head_learning_rate: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::arg("train.epochs must be at least 1"));
        }
        if self.batch_size < 2 {
            return Err(Error::arg("train.batch_size must be at least 2"));
        }
        if !(self.learning_rate > 0.0) || !(self.head_learning_rate > 0.0) {
            return Err(Error::arg("learning rates must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::arg("train.momentum must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::arg("train.weight_decay must be nonnegative"));
        }
        if !(self.max_grad_norm >= 0.0) {
            return Err(Error::arg("train.max_grad_norm must be nonnegative"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::arg("train.temperature must be positive"));
        }
        if !(self.augment_noise_sigma >= 0.0) {
            return Err(Error::arg("train.augment_noise_sigma must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.augment_drop_prob) {
            return Err(Error::arg("train.augment_drop_prob must lie in [0, 1]"));
        }
        if self.projection_dim == 0 {
            return Err(Error::arg("train.projection_dim must be positive"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::arg("train.hidden must list positive layer widths"));
        }
        Ok(())
    }

    fn rate(&self, base: f64, epoch: usize, epochs: usize) -> f64 {
        if self.cosine {
            base * 0.5 * (1.0 + (PI * epoch as f64 / epochs as f64).cos())
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: MlpParams,
    /// Mean training-objective value per epoch.
    pub loss_history: Vec<f64>,
    /// Mean head cross-entropy per epoch (contrastive criteria only).
    pub head_loss_history: Vec<f64>,
}

/// SGD with momentum and L2 weight decay.
struct Sgd {
    velocity: MlpParams,
    momentum: f64,
    weight_decay: f64,
}

impl Sgd {
    fn new(params: &MlpParams, momentum: f64, weight_decay: f64) -> Self {
        Self { velocity: params.zeros_like(), momentum, weight_decay }
    }

    /// Updates the parameter blocks whose index is in `blocks`.
    fn step(&mut self, params: &mut MlpParams, grads: &MlpParams, lr: f64, blocks: std::ops::Range<usize>) {
        let grads = grads.slices();
        let velocity = self.velocity.slices_mut();
        for (b, (p, v)) in params.slices_mut().into_iter().zip(velocity).enumerate() {
            if !blocks.contains(&b) {
                continue;
            }
            for ((w, vel), &g) in p.iter_mut().zip(v.iter_mut()).zip(grads[b]) {
                *vel = self.momentum * *vel + g + self.weight_decay * *w;
                *w -= lr * *vel;
            }
        }
    }
}

/// Two-layer rectifier projection used only while training contrastive
/// encoders and discarded afterwards.
struct Projection {
    first: DenseLayer,
    second: DenseLayer,
    velocity: [Vec<f64>; 4],
    momentum: f64,
    weight_decay: f64,
}

impl Projection {
    fn new(input: usize, width: usize, config: &TrainConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut layer = |rows: usize, cols: usize| {
            let dist = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("positive std");
            DenseLayer::new(Matrix::from_fn(rows, cols, |_, _| dist.sample(rng)), vec![0.0; rows]).expect("shapes")
        };
        let first = layer(width, input);
        let second = layer(width, width);
        let velocity = [vec![0.0; width * input], vec![0.0; width], vec![0.0; width * width], vec![0.0; width]];
        Self { first, second, velocity, momentum: config.momentum, weight_decay: config.weight_decay }
    }

    /// Returns the projection and the first layer's pre-activation.
    fn forward(&self, features: &Matrix<f64>) -> (Matrix<f64>, Matrix<f64>) {
        let q = self.first.apply(features);
        let p = self.second.apply(&q.map(|v| v.max(0.0)));
        (p, q)
    }

    /// Takes an SGD step on the projection and returns `∂L/∂features`.
    fn backward(&mut self, features: &Matrix<f64>, q: &Matrix<f64>, g_p: &Matrix<f64>, lr: f64) -> Matrix<f64> {
        let r = q.map(|v| v.max(0.0));
        let g_w2 = g_p.t_matmul(&r).expect("shapes");
        let g_b2 = g_p.col_sums();
        let mut g_q = g_p.matmul(&self.second.weight).expect("shapes");
        for (g, &v) in g_q.as_mut_slice().iter_mut().zip(q.as_slice()) {
            if v <= 0.0 {
                *g = 0.0;
            }
        }
        let g_w1 = g_q.t_matmul(features).expect("shapes");
        let g_b1 = g_q.col_sums();
        let g_features = g_q.matmul(&self.first.weight).expect("shapes");
        let blocks: [(&mut [f64], &[f64]); 4] = [
            (self.first.weight.as_mut_slice(), g_w1.as_slice()),
            (&mut self.first.bias, &g_b1),
            (self.second.weight.as_mut_slice(), g_w2.as_slice()),
            (&mut self.second.bias, &g_b2),
        ];
        for ((p, g), v) in blocks.into_iter().zip(self.velocity.iter_mut()) {
            for ((w, vel), &gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                *vel = self.momentum * *vel + gi + self.weight_decay * *w;
                *w -= lr * *vel;
            }
        }
        g_features
    }
}

fn augment(x: &[f64], sigma: f64, drop: f64, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        let noise: f64 = StandardNormal.sample(rng);
        let kept = if drop > 0.0 && rng.random::<f64>() < drop { 0.0 } else { v };
        *o = kept + sigma * noise;
    }
}

fn clip_grad_norm(grads: &mut MlpParams, max_norm: f64) {
    if max_norm == 0.0 {
        return;
    }
    let norm = grads.slices().iter().flat_map(|s| s.iter()).map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for s in grads.slices_mut() {
            s.iter_mut().for_each(|g| *g *= scale);
        }
    }
}

fn diverged(epoch: usize, loss: f64) -> Error {
    Error::Diverged { epoch, loss }
}

/// Trains an encoder and head on the dataset's training split.
pub fn train_mlp(data: &SyntheticDataset, config: &TrainConfig) -> Result<MlpParams> {
    train_mlp_with_history(data, config).map(|o| o.params)
}

/// Supervised models are trained end to end with cross-entropy;
/// contrastive ones train the encoder on two augmented views per sample
/// (loss on the l2-normalised output of a projection MLP that is dropped
/// afterwards) and then fit the head on frozen features. Single-threaded and deterministic per seed.
pub fn train_mlp_with_history(data: &SyntheticDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let x = &data.train_inputs;
    let labels = data.train_labels.labels();
    let n = x.rows();
    if n < 2 {
        return Err(Error::arg("training needs at least 2 samples"));
    }
    let classes = data.train_labels.classes();
    let mut params = MlpParams::init(x.cols(), &config.hidden, classes, &mut stream(config.seed, &format!("train/{}/init", config.criterion)))?;
    let head_blocks = {
        let total = params.slices().len();
        total - 2..total
    };
    let all_blocks = 0..params.slices().len();
    let mut sgd = Sgd::new(&params, config.momentum, config.weight_decay);
    let mut projection = Projection::new(
        params.feature_dim(),
        config.projection_dim,
        config,
        &mut stream(config.seed, &format!("train/{}/projection", config.criterion)),
    );
    let mut shuffle = stream(config.seed, &format!("train/{}/shuffle", config.criterion));
    let mut aug_rng = stream(config.seed, &format!("train/{}/augment", config.criterion));
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle);
        let lr = config.rate(config.learning_rate, epoch, config.epochs);
        let (mut total, mut batches) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            if batch.len() < 2 {
                continue;
            }
            let mut grads = params.zeros_like();
            let loss = match config.criterion {
                Criterion::SupCe => {
                    let xb = x.select_rows(batch);
                    let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                    let trace = params.trace(&xb)?;
                    let logits = head_logits(params.head(), trace.features());
                    let (loss, g_logits) = softmax_cross_entropy(&logits, &yb)?;
                    let head = params.head();
                    let gw = g_logits.t_matmul(trace.features())?;
                    grads.head_mut().weight = gw;
                    grads.head_mut().bias = g_logits.col_sums();
                    let g_feat = g_logits.matmul(&head.weight)?;
                    params.backward_encoder(&trace, g_feat, &mut grads);
                    loss
                }
                Criterion::SimClr | Criterion::SupCon => {
                    let dim = x.cols();
                    let mut views = Matrix::zeros(2 * batch.len(), dim);
                    let mut view_labels = Vec::with_capacity(2 * batch.len());
                    for (b, &i) in batch.iter().enumerate() {
                        for v in 0..2 {
                            augment(
                                x.row(i),
                                config.augment_noise_sigma,
                                config.augment_drop_prob,
                                &mut aug_rng,
                                views.row_mut(2 * b + v),
                            );
                            view_labels.push(labels[i]);
                        }
                    }
                    let trace = params.trace(&views)?;
                    let (p, cache) = projection.forward(trace.features());
                    let (u, norms) = normalize_rows(&p).map_err(|_| diverged(epoch + 1, f64::NAN))?;
                    let (loss, g_u) = if config.criterion == Criterion::SimClr {
                        nt_xent_with_grad(&u, config.temperature)?
                    } else {
                        supcon_with_grad(&u, &view_labels, config.temperature)?
                    };
                    let g_p = normalize_rows_backward(&u, &norms, &g_u);
                    let g_feat = projection.backward(trace.features(), &cache, &g_p, lr);
                    params.backward_encoder(&trace, g_feat, &mut grads);
                    loss
                }
            };
            if !loss.is_finite() {
                return Err(diverged(epoch + 1, loss));
            }
            let blocks = if config.criterion.is_contrastive() { 0..head_blocks.start } else { all_blocks.clone() };
            clip_grad_norm(&mut grads, config.max_grad_norm);
            sgd.step(&mut params, &grads, lr, blocks);
            total += loss;
            batches += 1;
        }
        let mean = total / batches.max(1) as f64;
        if !mean.is_finite() || params.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(diverged(epoch + 1, mean));
        }
        loss_history.push(mean);
    }

    let mut head_loss_history = Vec::new();
    if config.criterion.is_contrastive() {
        let features = params.features(x)?;
        let mut head_sgd = Sgd::new(&params, config.momentum, config.weight_decay);
        let mut head_shuffle = stream(config.seed, &format!("train/{}/head-shuffle", config.criterion));
        for epoch in 0..config.head_epochs {
            order.shuffle(&mut head_shuffle);
            let lr = config.rate(config.head_learning_rate, epoch, config.head_epochs);
            let (mut total, mut batches) = (0.0, 0usize);
            for batch in order.chunks(config.batch_size) {
                let fb = features.select_rows(batch);
                let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                let (loss, g_logits) = softmax_cross_entropy(&head_logits(params.head(), &fb), &yb)?;
                if !loss.is_finite() {
                    return Err(diverged(config.epochs + epoch + 1, loss));
                }
                let mut grads = params.zeros_like();
                grads.head_mut().weight = g_logits.t_matmul(&fb)?;
                grads.head_mut().bias = g_logits.col_sums();
                clip_grad_norm(&mut grads, config.max_grad_norm);
                head_sgd.step(&mut params, &grads, lr, head_blocks.clone());
                total += loss;
                batches += 1;
            }
            head_loss_history.push(total / batches.max(1) as f64);
        }
    }
    Ok(TrainOutcome { params, loss_history, head_loss_history })
}

/// Fraction of rows whose arg-max logit equals the label.
pub fn accuracy(params: &MlpParams, inputs: &Matrix<f64>, labels: &[usize]) -> Result<f64> {
    let logits = params.logits(inputs)?;
    if labels.len() != logits.rows() {
        return Err(Error::shape("labels do not match inputs"));
    }
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| {
            let row = logits.row(i);
            let best = (0..row.len()).fold(0, |b, c| if row[c] > row[b] { c } else { b });
            best == y
        })
        .count();
    Ok(hits as f64 / labels.len() as f64)
}
