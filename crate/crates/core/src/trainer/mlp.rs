//! Fully connected rectifier encoders with a linear classification head.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, LogitSet};
use crate::numerics::{dot, Matrix};
use crate::scoring::LinearHead;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// `y = W x + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: Matrix<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weight: Matrix<f64>, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::shape(format!("{} biases for {} units", bias.len(), weight.rows())));
        }
        Ok(Self { weight, bias })
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    /// `X Wᵀ + 1 bᵀ`.
    pub fn apply(&self, x: &Matrix<f64>) -> Matrix<f64> {
        Matrix::from_fn(x.rows(), self.outputs(), |i, o| self.bias[o] + dot(x.row(i), self.weight.row(o)))
    }
}

/// Encoder layers (each followed by the activation) and a linear head on
/// the last hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<DenseLayer>,
    activation: Activation,
    head: LinearHead,
}

impl MlpParams {
    pub fn new(layers: Vec<DenseLayer>, activation: Activation, head: LinearHead) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Architecture("an encoder needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Architecture(format!(
                    "layer {l} emits {} units but layer {} expects {}",
                    pair[0].outputs(),
                    l + 1,
                    pair[1].inputs()
                )));
            }
        }
        let last = layers.last().expect("nonempty").outputs();
        if head.dim() != last {
            return Err(Error::Architecture(format!("head expects {} features, encoder emits {last}", head.dim())));
        }
        let params = Self { layers, activation, head };
        if params.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::arg("parameters must be finite"));
        }
        Ok(params)
    }

    /// He-normal weights, zero biases.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], classes: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Architecture(format!("invalid layer widths {input_dim} -> {hidden:?}")));
        }
        let mut layers = Vec::with_capacity(hidden.len());
        let mut fan_in = input_dim;
        for &width in hidden {
            let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let weight = Matrix::from_fn(width, fan_in, |_, _| dist.sample(rng));
            layers.push(DenseLayer::new(weight, vec![0.0; width])?);
            fan_in = width;
        }
        let dist = Normal::new(0.0, (1.0 / fan_in as f64).sqrt()).expect("positive std");
        let head = LinearHead::new(Matrix::from_fn(classes, fan_in, |_, _| dist.sample(rng)), vec![0.0; classes])?;
        Self::new(layers, Activation::Relu, head)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn head(&self) -> &LinearHead {
        &self.head
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn feature_dim(&self) -> usize {
        self.head.dim()
    }

    pub fn classes(&self) -> usize {
        self.head.classes()
    }

    /// `[input, hidden₁, …, hidden_L, classes]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.layers.iter().map(DenseLayer::outputs));
        w.push(self.classes());
        w
    }

    pub fn same_architecture(&self, other: &Self) -> bool {
        self.activation == other.activation && self.widths() == other.widths()
    }

    pub fn parameter_count(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    /// Every weight and bias block: layer weights and biases in order, then
    /// the head's.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.weight.as_slice());
            out.push(&l.bias);
        }
        out.push(self.head.weight.as_slice());
        out.push(&self.head.bias);
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(l.weight.as_mut_slice());
            out.push(&mut l.bias);
        }
        out.push(self.head.weight.as_mut_slice());
        out.push(&mut self.head.bias);
        out
    }

    /// Same architecture, every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for s in z.slices_mut() {
            s.fill(0.0);
        }
        z
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub(crate) fn head_mut(&mut self) -> &mut LinearHead {
        &mut self.head
    }

    fn check_input(&self, inputs: &Matrix<f64>) -> Result<()> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::shape(format!("inputs have {} columns, encoder expects {}", inputs.cols(), self.input_dim())));
        }
        Ok(())
    }

    /// Penultimate activations as a raw matrix.
    pub fn features(&self, inputs: &Matrix<f64>) -> Result<Matrix<f64>> {
        self.check_input(inputs)?;
        let mut h = inputs.clone();
        for l in &self.layers {
            h = l.apply(&h).map(relu);
        }
        Ok(h)
    }

    pub fn logits(&self, inputs: &Matrix<f64>) -> Result<Matrix<f64>> {
        Ok(head_logits(&self.head, &self.features(inputs)?))
    }

    /// Forward pass keeping every layer's input and pre-activation.
    pub(crate) fn trace(&self, inputs: &Matrix<f64>) -> Result<Trace> {
        self.check_input(inputs)?;
        let mut acts = vec![inputs.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let z = l.apply(acts.last().expect("nonempty"));
            acts.push(z.map(relu));
            pre.push(z);
        }
        Ok(Trace { acts, pre })
    }

    /// Back-propagates the gradient w.r.t. the features and accumulates
    /// encoder gradients into `grads`.
    pub(crate) fn backward_encoder(&self, trace: &Trace, mut grad: Matrix<f64>, grads: &mut Self) {
        for l in (0..self.layers.len()).rev() {
            for (g, &z) in grad.as_mut_slice().iter_mut().zip(trace.pre[l].as_slice()) {
                if z <= 0.0 {
                    *g = 0.0;
                }
            }
            let gw = grad.t_matmul(&trace.acts[l]).expect("shapes chain");
            let layer = &mut grads.layers[l];
            for (a, b) in layer.weight.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                *a += b;
            }
            for (a, b) in layer.bias.iter_mut().zip(grad.col_sums()) {
                *a += b;
            }
            if l > 0 {
                grad = grad.matmul(&self.layers[l].weight).expect("shapes chain");
            }
        }
    }
}

pub(crate) struct Trace {
    /// `acts[0]` is the input, `acts[l+1]` the output of layer `l`.
    pub acts: Vec<Matrix<f64>>,
    pub pre: Vec<Matrix<f64>>,
}

impl Trace {
    pub fn features(&self) -> &Matrix<f64> {
        self.acts.last().expect("nonempty")
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub(crate) fn head_logits(head: &LinearHead, features: &Matrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(features.rows(), head.classes(), |i, c| head.bias[c] + dot(features.row(i), head.weight.row(c)))
}

pub fn forward_features(params: &MlpParams, inputs: &Matrix<f64>, ids: Vec<String>) -> Result<FeatureSet> {
    FeatureSet::new(params.features(inputs)?, ids)
}

pub fn forward_logits(params: &MlpParams, inputs: &Matrix<f64>, ids: Vec<String>) -> Result<LogitSet> {
    LogitSet::new(params.logits(inputs)?, ids)
}

/// `(1−α)·a + α·b` for every weight and bias, head included.
pub fn interpolate_params(a: &MlpParams, b: &MlpParams, alpha: f64) -> Result<MlpParams> {
    if !a.same_architecture(b) {
        return Err(Error::Architecture(format!("cannot interpolate {:?} with {:?}", a.widths(), b.widths())));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::arg(format!("alpha {alpha} outside [0, 1]")));
    }
    let mut out = a.clone();
    for (o, sb) in out.slices_mut().into_iter().zip(b.slices()) {
        for (x, &y) in o.iter_mut().zip(sb) {
            *x = (1.0 - alpha) * *x + alpha * y;
        }
    }
    Ok(out)
}
