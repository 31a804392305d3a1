//! Dense feedforward regression network, written out by hand: forward pass,
//! ReLU, inverted dropout, batch mean-squared-error, backpropagation, and
//! ADAM. Everything is deterministic for a fixed seed.
//!
//! The curve predictor takes the five chain features (L, J1, J2, D, n1) and
//! emits 25 curve samples; two hidden layers of 64 and 32 ReLU units carry a
//! dropout rate of 0.1 in training mode. The MSE is the batch mean of the
//! per-sample squared residual norm (no division by the output width).

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One affine layer; weights are row-major, `weights[o * in_dim + i]`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn affine(&self, input: &[f64], out: &mut [f64]) {
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            out[o] = self.bias[o] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
    }
}

/// The trainable predictor.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub layers: Vec<Layer>,
    /// Dropout probability applied after each hidden activation in training.
    pub dropout_rate: f64,
}

impl NetworkModel {
    /// He-style uniform initialization, U(-√(6/fan_in), √(6/fan_in)), seeded.
    pub fn new(dims: &[usize], dropout_rate: f64, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidParams("need at least input and output dims".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidParams(format!("dropout rate {dropout_rate} outside [0, 1)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            let activation = if layers.len() + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::Relu
            };
            layers.push(Layer {
                in_dim: fan_in,
                out_dim: fan_out,
                weights,
                bias: vec![0.0; fan_out],
                activation,
            });
        }
        Ok(NetworkModel { layers, dropout_rate })
    }

    /// The 5 → 64 → 32 → 25 curve predictor with dropout 0.1.
    pub fn curve_predictor(seed: u64) -> Self {
        NetworkModel::new(&[5, 64, 32, 25], 0.1, seed).expect("valid dims")
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map(|l| l.in_dim).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.out_dim).unwrap_or(0)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    pub fn expect_dims(&self, input: usize, output: usize) -> Result<()> {
        if self.input_dim() != input {
            return Err(Error::DimensionMismatch { expected: input, got: self.input_dim() });
        }
        if self.output_dim() != output {
            return Err(Error::DimensionMismatch { expected: output, got: self.output_dim() });
        }
        Ok(())
    }

    /// Inference-mode forward pass: no dropout, no scaling, pure function.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut act = input.to_vec();
        for layer in &self.layers {
            let mut next = vec![0.0; layer.out_dim];
            layer.affine(&act, &mut next);
            next.iter_mut().for_each(|z| *z = layer.activation.apply(*z));
            act = next;
        }
        Ok(act)
    }

    /// Training-mode forward pass with inverted dropout after each hidden
    /// activation; returns the output and the cache backward() consumes.
    pub fn forward_train(&self, input: &[f64], rng: &mut ChaCha8Rng) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let keep = 1.0 - self.dropout_rate;
        let mut activations = vec![input.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let mut pre = vec![0.0; layer.out_dim];
            layer.affine(activations.last().unwrap(), &mut pre);
            let mut act: Vec<f64> = pre.iter().map(|&z| layer.activation.apply(z)).collect();
            let hidden = li + 1 < self.layers.len();
            let mask: Vec<f64> = if hidden && self.dropout_rate > 0.0 {
                act.iter_mut()
                    .map(|a| {
                        if rng.gen::<f64>() < keep {
                            *a /= keep;
                            1.0 / keep
                        } else {
                            *a = 0.0;
                            0.0
                        }
                    })
                    .collect()
            } else {
                vec![1.0; layer.out_dim]
            };
            pre_activations.push(pre);
            masks.push(mask);
            activations.push(act);
        }
        Ok(ForwardTrace { activations, pre_activations, masks })
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite network input".into()));
        }
        Ok(())
    }
}

/// Cached intermediates of one training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Layer inputs/outputs after dropout; `activations[0]` is the input.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
    /// Effective multipliers (1/keep or 0) per hidden unit.
    pub masks: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

/// Batch MSE: mean over samples of the squared Euclidean residual norm.
pub fn mse(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: targets.len().max(1),
            got: predictions.len(),
        });
    }
    let mut total = 0.0;
    for (p, y) in predictions.iter().zip(targets) {
        if p.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), got: p.len() });
        }
        total += p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / predictions.len() as f64)
}

/// Per-parameter gradients, same layout as the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &NetworkModel) -> Self {
        Gradients {
            weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }
}

/// Exact gradients of the batch MSE with the dropout masks held fixed.
pub fn backward(
    model: &NetworkModel,
    traces: &[ForwardTrace],
    targets: &[Vec<f64>],
) -> Result<Gradients> {
    if traces.len() != targets.len() || traces.is_empty() {
        return Err(Error::DimensionMismatch { expected: targets.len().max(1), got: traces.len() });
    }
    let batch = traces.len() as f64;
    let mut grads = Gradients::zeros_like(model);
    for (trace, target) in traces.iter().zip(targets) {
        if target.len() != model.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.output_dim(),
                got: target.len(),
            });
        }
        // d(batch MSE)/d(output) = 2 (out - y) / batch.
        let mut delta: Vec<f64> = trace
            .output()
            .iter()
            .zip(target)
            .map(|(o, y)| 2.0 * (o - y) / batch)
            .collect();
        for li in (0..model.layers.len()).rev() {
            let layer = &model.layers[li];
            // Through the dropout multiplier and the activation.
            let mut dz = vec![0.0; layer.out_dim];
            for o in 0..layer.out_dim {
                dz[o] = delta[o]
                    * trace.masks[li][o]
                    * layer.activation.derivative(trace.pre_activations[li][o]);
            }
            let input = &trace.activations[li];
            for o in 0..layer.out_dim {
                grads.bias[li][o] += dz[o];
                let row = &mut grads.weights[li][o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += dz[o] * x;
                }
            }
            if li > 0 {
                let mut prev = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, w) in prev.iter_mut().zip(row) {
                        *p += dz[o] * w;
                    }
                }
                delta = prev;
            }
        }
    }
    Ok(grads)
}

/// ADAM hyperparameters and the training loop configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 500,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParams("learning rate must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0 < b && b < 1.0) {
                return Err(Error::InvalidParams(format!("{name} = {b} outside (0, 1)")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch size must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// First/second moment accumulators mirroring the model parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m_weights: Vec<Vec<f64>>,
    pub v_weights: Vec<Vec<f64>>,
    pub m_bias: Vec<Vec<f64>>,
    pub v_bias: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &NetworkModel) -> Self {
        let zw: Vec<Vec<f64>> =
            model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let zb: Vec<Vec<f64>> = model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
        AdamState { m_weights: zw.clone(), v_weights: zw, m_bias: zb.clone(), v_bias: zb, step: 0 }
    }
}

/// One bias-corrected ADAM update in place.
pub fn adam_step(
    model: &mut NetworkModel,
    grads: &Gradients,
    state: &mut AdamState,
    config: &TrainConfig,
) {
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - config.beta1.powf(t);
    let bc2 = 1.0 - config.beta2.powf(t);
    let mut update = |param: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..param.len() {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            let mh = m[i] / bc1;
            let vh = v[i] / bc2;
            param[i] -= config.learning_rate * mh / (vh.sqrt() + config.epsilon);
        }
    };
    for (li, layer) in model.layers.iter_mut().enumerate() {
        update(&mut layer.weights, &grads.weights[li], &mut state.m_weights[li], &mut state.v_weights[li]);
        update(&mut layer.bias, &grads.bias[li], &mut state.m_bias[li], &mut state.v_bias[li]);
    }
}

/// Per-epoch losses recorded during training.
#[derive(Debug, Clone, Default)]
pub struct TrainHistory {
    pub train_mse: Vec<f64>,
    pub holdout_mse: Vec<f64>,
}

/// Epoch loop: seeded shuffling, minibatch forward/backward/ADAM. The
/// holdout set, when given, is evaluated in inference mode after each epoch.
pub fn train(
    model: &mut NetworkModel,
    dataset: &[(Vec<f64>, Vec<f64>)],
    holdout: Option<&[(Vec<f64>, Vec<f64>)]>,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(model);
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..dataset.len()).collect();

    for _ in 0..config.epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let mut traces = Vec::with_capacity(chunk.len());
            let mut targets = Vec::with_capacity(chunk.len());
            for &idx in chunk {
                let (x, y) = &dataset[idx];
                traces.push(model.forward_train(x, &mut rng)?);
                targets.push(y.clone());
            }
            let preds: Vec<Vec<f64>> = traces.iter().map(|t| t.output().to_vec()).collect();
            epoch_loss += mse(&preds, &targets)? * chunk.len() as f64;
            seen += chunk.len();
            let grads = backward(model, &traces, &targets)?;
            adam_step(model, &grads, &mut state, config);
        }
        history.train_mse.push(epoch_loss / seen as f64);
        if let Some(held) = holdout {
            history.holdout_mse.push(evaluate_mse(model, held)?);
        }
    }
    Ok(history)
}

/// Inference-mode MSE over a labelled set.
pub fn evaluate_mse(model: &NetworkModel, set: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut preds = Vec::with_capacity(set.len());
    let mut targets = Vec::with_capacity(set.len());
    for (x, y) in set {
        preds.push(model.infer(x)?);
        targets.push(y.clone());
    }
    mse(&preds, &targets)
}

/// Fisher-Yates with the training RNG stream.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    dims: Vec<usize>,
    activations: Vec<Activation>,
    dropout_rate: f64,
    /// Row-major weight matrices, one per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Writes the model as a versioned JSON document with full-precision floats.
pub fn save_model(model: &NetworkModel, path: &Path) -> Result<()> {
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        dims: model.dims(),
        activations: model.layers.iter().map(|l| l.activation).collect(),
        dropout_rate: model.dropout_rate,
        weights: model.layers.iter().map(|l| l.weights.clone()).collect(),
        biases: model.layers.iter().map(|l| l.bias.clone()).collect(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::MalformedModel(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a model back, checking the version and every declared dimension.
pub fn load_model(path: &Path) -> Result<NetworkModel> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::MalformedModel(e.to_string()))?;
    if file.version != MODEL_FILE_VERSION {
        return Err(Error::ModelVersion { expected: MODEL_FILE_VERSION, got: file.version });
    }
    if file.dims.len() < 2
        || file.weights.len() != file.dims.len() - 1
        || file.biases.len() != file.dims.len() - 1
        || file.activations.len() != file.dims.len() - 1
    {
        return Err(Error::MalformedModel("inconsistent layer counts".into()));
    }
    if !(0.0..1.0).contains(&file.dropout_rate) {
        return Err(Error::MalformedModel(format!("dropout rate {}", file.dropout_rate)));
    }
    let mut layers = Vec::with_capacity(file.dims.len() - 1);
    for (li, w) in file.dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (w[0], w[1]);
        if file.weights[li].len() != fan_in * fan_out || file.biases[li].len() != fan_out {
            return Err(Error::MalformedModel(format!("layer {li} has wrong parameter counts")));
        }
        if file.weights[li].iter().chain(&file.biases[li]).any(|x| !x.is_finite()) {
            return Err(Error::MalformedModel(format!("layer {li} has non-finite parameters")));
        }
        layers.push(Layer {
            in_dim: fan_in,
            out_dim: fan_out,
            weights: file.weights[li].clone(),
            bias: file.biases[li].clone(),
            activation: file.activations[li],
        });
    }
    Ok(NetworkModel { layers, dropout_rate: file.dropout_rate })
}
