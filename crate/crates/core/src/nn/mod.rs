//! Dense feed-forward binary classifier.
//!
//! A network built from an [`MlpConfig`] with `hidden_layers = h` has `h + 2`
//! dense layers: an input projection of width `nodes`, `h` hidden layers of
//! width `nodes`, and a single sigmoid output unit. `activations[i]` is the
//! activation of dense layer `i`, so the list always has `h + 2` entries and
//! ends in `sigmoid`.
//!
//! Training is mini-batch gradient descent on binary cross-entropy with the
//! configured [`Optimizer`], Glorot-uniform kernels, zero biases and
//! patience-based early stopping on the mean epoch loss.

mod activation;
mod early_stop;
mod init;
mod loss;
mod optim;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use activation::{sigmoid, Activation};
pub use early_stop::{stopping_epoch, EarlyStopping};
pub use init::{glorot_limit, glorot_uniform};
pub use loss::{binary_cross_entropy, EPSILON};
pub use optim::{optimizer_step, Optimizer, OptimizerHyper, OptimizerState};

use crate::matrix::Matrix;
use crate::seed;

/// Epochs without improvement tolerated before training stops.
pub const DEFAULT_PATIENCE: usize = 5;
/// Smallest decrease of the epoch loss that counts as an improvement.
pub const DEFAULT_MIN_DELTA: f64 = 1e-4;
/// Probability above which a prediction is the positive class.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("unknown optimizer {0:?}")]
    UnknownOptimizer(String),
    #[error("unknown activation {0:?}")]
    UnknownActivation(String),
    #[error("expected length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("input has {found} columns, network expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub nodes_per_hidden: usize,
    pub activations: Vec<Activation>,
    pub optimizer: Optimizer,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Overrides the optimizer's default step size.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_min_delta")]
    pub min_delta: f64,
}

fn default_patience() -> usize {
    DEFAULT_PATIENCE
}

fn default_min_delta() -> f64 {
    DEFAULT_MIN_DELTA
}

impl MlpConfig {
    /// Configuration with the standard early-stopping settings.
    pub fn new(
        hidden_layers: usize,
        nodes_per_hidden: usize,
        activations: Vec<Activation>,
        optimizer: Optimizer,
        epochs: usize,
        batch_size: usize,
        seed: u64,
    ) -> Self {
        Self {
            hidden_layers,
            nodes_per_hidden,
            activations,
            optimizer,
            epochs,
            batch_size,
            seed,
            learning_rate: None,
            patience: DEFAULT_PATIENCE,
            min_delta: DEFAULT_MIN_DELTA,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let fail = |msg: String| Err(NnError::InvalidConfig(msg));
        if self.hidden_layers == 0 || self.nodes_per_hidden == 0 {
            return fail("hidden_layers and nodes_per_hidden must be positive".into());
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch_size must be positive".into());
        }
        if self.activations.len() != self.hidden_layers + 2 {
            return fail(format!(
                "{} activations for {} hidden layers (need hidden_layers + 2)",
                self.activations.len(),
                self.hidden_layers
            ));
        }
        if self.activations.last() != Some(&Activation::Sigmoid) {
            return fail("output activation must be sigmoid".into());
        }
        Ok(())
    }

    pub fn hyper(&self) -> OptimizerHyper {
        let mut hyper = self.optimizer.default_hyper();
        if let Some(lr) = self.learning_rate {
            hyper.learning_rate = lr;
        }
        hyper
    }
}

/// Layer widths and activations plus one flat parameter vector. Layer `l`
/// stores its `out x in` row-major kernel followed by its `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    dims: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

fn parameter_offsets(dims: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(dims.len() - 1);
    let mut total = 0;
    for w in dims.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    (offsets, total)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Network {
    /// Network with explicit parameters. `dims` runs from the input width to
    /// the single output unit.
    pub fn from_parts(dims: Vec<usize>, activations: Vec<Activation>, params: Vec<f64>) -> Result<Self, NnError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(NnError::InvalidConfig("need at least an input and an output width".into()));
        }
        if dims.last() != Some(&1) {
            return Err(NnError::InvalidConfig("output layer must have one unit".into()));
        }
        if activations.len() != dims.len() - 1 {
            return Err(NnError::LengthMismatch { expected: dims.len() - 1, found: activations.len() });
        }
        if activations.last() != Some(&Activation::Sigmoid) {
            return Err(NnError::InvalidConfig("output activation must be sigmoid".into()));
        }
        let (offsets, total) = parameter_offsets(&dims);
        if params.len() != total {
            return Err(NnError::LengthMismatch { expected: total, found: params.len() });
        }
        Ok(Self { dims, activations, params, offsets })
    }

    /// All-zero parameters.
    pub fn zeros(input_width: usize, config: &MlpConfig) -> Result<Self, NnError> {
        config.validate()?;
        let dims = Self::dims_for(input_width, config);
        let (_, total) = parameter_offsets(&dims);
        Self::from_parts(dims, config.activations.clone(), vec![0.0; total])
    }

    /// Glorot-uniform kernels, zero biases.
    pub fn glorot<R: Rng + ?Sized>(input_width: usize, config: &MlpConfig, rng: &mut R) -> Result<Self, NnError> {
        let mut net = Self::zeros(input_width, config)?;
        for l in 0..net.layer_count() {
            let (fan_in, fan_out) = (net.dims[l], net.dims[l + 1]);
            let kernel = glorot_uniform(fan_in, fan_out, rng);
            let off = net.offsets[l];
            net.params[off..off + fan_in * fan_out].copy_from_slice(kernel.as_slice());
        }
        Ok(net)
    }

    fn dims_for(input_width: usize, config: &MlpConfig) -> Vec<usize> {
        let mut dims = vec![input_width];
        dims.extend(std::iter::repeat_n(config.nodes_per_hidden, config.hidden_layers + 1));
        dims.push(1);
        dims
    }

    pub fn layer_count(&self) -> usize {
        self.activations.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_width(&self) -> usize {
        self.dims[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Kernel of layer `l`, shaped `out x in` row-major.
    pub fn weights(&self, l: usize) -> &[f64] {
        let off = self.offsets[l];
        &self.params[off..off + self.dims[l] * self.dims[l + 1]]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        let off = self.offsets[l] + self.dims[l] * self.dims[l + 1];
        &self.params[off..off + self.dims[l + 1]]
    }

    fn check_input(&self, batch: &Matrix) -> Result<(), NnError> {
        if batch.cols() != self.input_width() {
            return Err(NnError::DimensionMismatch { expected: self.input_width(), found: batch.cols() });
        }
        Ok(())
    }

    /// Output probabilities, each strictly inside `(0, 1)`.
    pub fn forward(&self, batch: &Matrix) -> Result<Vec<f64>, NnError> {
        self.check_input(batch)?;
        let mut acts = self.activation_buffers(batch.rows());
        self.forward_into(batch.as_slice(), batch.rows(), &mut acts);
        let out = acts.pop().unwrap_or_default();
        Ok(out.into_iter().map(|p| p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)).collect())
    }

    /// Mean binary cross-entropy on `(batch, labels)`.
    pub fn loss(&self, batch: &Matrix, labels: &[u8]) -> Result<f64, NnError> {
        binary_cross_entropy(&self.forward(batch)?, labels)
    }

    /// Mean loss and its gradient with respect to [`Network::params`].
    pub fn loss_and_gradient(&self, batch: &Matrix, labels: &[u8]) -> Result<(f64, Vec<f64>), NnError> {
        self.check_input(batch)?;
        if labels.len() != batch.rows() {
            return Err(NnError::LengthMismatch { expected: batch.rows(), found: labels.len() });
        }
        if labels.is_empty() {
            return Err(NnError::EmptyInput);
        }
        let mut ws = Workspace::new(self, batch.rows());
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.backprop(batch.as_slice(), labels, &mut ws, &mut grad);
        Ok((loss, grad))
    }

    fn activation_buffers(&self, batch: usize) -> Vec<Vec<f64>> {
        self.dims[1..].iter().map(|&w| vec![0.0; w * batch]).collect()
    }

    fn forward_into(&self, x: &[f64], batch: usize, acts: &mut [Vec<f64>]) {
        for l in 0..self.layer_count() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let (done, rest) = acts.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let output = &mut rest[0];
            let w = self.weights(l);
            let b = self.biases(l);
            let act = self.activations[l];
            for s in 0..batch {
                let row = &input[s * n_in..(s + 1) * n_in];
                let out = &mut output[s * n_out..(s + 1) * n_out];
                for o in 0..n_out {
                    let z = b[o] + dot(&w[o * n_in..(o + 1) * n_in], row);
                    out[o] = act.apply(z);
                }
            }
        }
    }

    /// Accumulates the gradient of the mean batch loss into `grad` (which
    /// must be zeroed by the caller) and returns that loss.
    fn backprop(&self, x: &[f64], y: &[u8], ws: &mut Workspace, grad: &mut [f64]) -> f64 {
        let batch = y.len();
        self.forward_into(x, batch, &mut ws.acts);
        let last = self.layer_count() - 1;
        let scale = 1.0 / batch as f64;
        let mut loss = 0.0;
        ws.delta.clear();
        for (s, &label) in y.iter().enumerate() {
            let p = ws.acts[last][s];
            loss += loss::sample_loss(p, label);
            // Sigmoid output with cross-entropy: dL/dz = p - y.
            ws.delta.push((p - f64::from(label)) * scale);
        }
        for l in (0..=last).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let input: &[f64] = if l == 0 { x } else { &ws.acts[l - 1] };
            let off = self.offsets[l];
            let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for s in 0..batch {
                let row = &input[s * n_in..(s + 1) * n_in];
                for o in 0..n_out {
                    let d = ws.delta[s * n_out + o];
                    if d != 0.0 {
                        gb[o] += d;
                        axpy(d, row, &mut gw[o * n_in..(o + 1) * n_in]);
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = self.weights(l);
            let prev_act = self.activations[l - 1];
            ws.next_delta.clear();
            ws.next_delta.resize(batch * n_in, 0.0);
            for s in 0..batch {
                let nd = &mut ws.next_delta[s * n_in..(s + 1) * n_in];
                for o in 0..n_out {
                    let d = ws.delta[s * n_out + o];
                    if d != 0.0 {
                        axpy(d, &w[o * n_in..(o + 1) * n_in], nd);
                    }
                }
                let a = &input[s * n_in..(s + 1) * n_in];
                for (v, &ai) in nd.iter_mut().zip(a) {
                    *v *= prev_act.derivative_from_output(ai);
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.next_delta);
        }
        loss * scale
    }

    /// Layer dimensions and parameters as a JSON document, for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        let layers: Vec<serde_json::Value> = (0..self.layer_count())
            .map(|l| {
                serde_json::json!({
                    "inputs": self.dims[l],
                    "outputs": self.dims[l + 1],
                    "activation": self.activations[l],
                    "weights": self.weights(l),
                    "biases": self.biases(l),
                })
            })
            .collect();
        serde_json::json!({ "layers": layers })
    }
}

struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

impl Workspace {
    fn new(net: &Network, batch: usize) -> Self {
        let widest = net.dims.iter().copied().max().unwrap_or(1);
        Self {
            acts: net.activation_buffers(batch),
            delta: Vec::with_capacity(widest * batch),
            next_delta: Vec::with_capacity(widest * batch),
        }
    }
}

/// A network after training, with its per-epoch mean loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub network: Network,
    pub loss_history: Vec<f64>,
    pub stopped_early: bool,
    pub epochs_run: usize,
    /// Training hit a non-finite loss and was aborted.
    pub diverged: bool,
}

impl TrainedModel {
    pub fn forward(&self, batch: &Matrix) -> Result<Vec<f64>, NnError> {
        self.network.forward(batch)
    }

    /// Hard `{0, 1}` predictions at [`DECISION_THRESHOLD`].
    pub fn predict(&self, batch: &Matrix) -> Result<Vec<u8>, NnError> {
        Ok(self.forward(batch)?.into_iter().map(|p| u8::from(p > DECISION_THRESHOLD)).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "network": self.network.to_json(),
            "loss_history": self.loss_history,
            "stopped_early": self.stopped_early,
            "epochs_run": self.epochs_run,
            "diverged": self.diverged,
        })
    }
}

/// Trains a fresh network on `(features, labels)`. Deterministic in
/// `config.seed`: the same inputs give a bit-identical loss history.
pub fn train(config: &MlpConfig, features: &Matrix, labels: &[u8]) -> Result<TrainedModel, NnError> {
    config.validate()?;
    if features.rows() != labels.len() {
        return Err(NnError::LengthMismatch { expected: features.rows(), found: labels.len() });
    }
    if labels.is_empty() {
        return Err(NnError::EmptyInput);
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(NnError::InvalidLabel(bad));
    }
    let mut rng = seed::rng(config.seed);
    let mut network = Network::glorot(features.cols(), config, &mut rng)?;
    let hyper = config.hyper();
    let mut state = OptimizerState::new(network.params.len());
    let mut grad = vec![0.0; network.params.len()];
    let batch_size = config.batch_size.min(labels.len());
    let mut ws = Workspace::new(&network, batch_size);
    let n_in = features.cols();
    let mut xb = Vec::with_capacity(batch_size * n_in);
    let mut yb = Vec::with_capacity(batch_size);

    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut monitor = EarlyStopping::new(config.patience, config.min_delta);
    let mut loss_history = Vec::with_capacity(config.epochs);
    let mut stopped_early = false;
    let mut diverged = false;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch_size) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(features.row(i));
                yb.push(labels[i]);
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = network.backprop(&xb, &yb, &mut ws, &mut grad);
            total += loss * chunk.len() as f64;
            optimizer_step(config.optimizer, &mut network.params, &grad, &mut state, &hyper)?;
        }
        let epoch_loss = total / labels.len() as f64;
        if !epoch_loss.is_finite() || network.params.iter().any(|p| !p.is_finite()) {
            diverged = true;
            break;
        }
        loss_history.push(epoch_loss);
        if monitor.update(epoch_loss) {
            stopped_early = epoch + 1 < config.epochs;
            break;
        }
    }

    Ok(TrainedModel { network, epochs_run: loss_history.len(), loss_history, stopped_early, diverged })
}
