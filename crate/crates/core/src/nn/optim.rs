use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NnError;

/// Gradient-descent update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Optimizer {
    #[serde(rename = "SGD", alias = "sgd")]
    Sgd,
    #[serde(rename = "Adam", alias = "adam")]
    Adam,
    #[serde(rename = "Adamax", alias = "adamax")]
    Adamax,
    #[serde(rename = "RMSprop", alias = "rmsprop")]
    Rmsprop,
}

impl Optimizer {
    pub const ALL: [Optimizer; 4] = [Optimizer::Sgd, Optimizer::Adam, Optimizer::Adamax, Optimizer::Rmsprop];

    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Sgd => "SGD",
            Optimizer::Adam => "Adam",
            Optimizer::Adamax => "Adamax",
            Optimizer::Rmsprop => "RMSprop",
        }
    }

    /// Framework-default hyperparameters: step 0.01 for SGD, 0.001 otherwise.
    pub fn default_hyper(self) -> OptimizerHyper {
        let learning_rate = match self {
            Optimizer::Sgd => 0.01,
            _ => 0.001,
        };
        OptimizerHyper { learning_rate, beta1: 0.9, beta2: 0.999, rho: 0.9, epsilon: 1e-7 }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Optimizer {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Optimizer::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| NnError::UnknownOptimizer(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub epsilon: f64,
}

/// Per-parameter moment estimates. `first` holds Adam/Adamax first moments,
/// `second` the Adam/RMSprop second moment or the Adamax infinity norm.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    step: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl OptimizerState {
    pub fn new(len: usize) -> Self {
        Self { step: 0, first: vec![0.0; len], second: vec![0.0; len] }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

/// Applies one update in place.
pub fn optimizer_step(
    kind: Optimizer,
    params: &mut [f64],
    grads: &[f64],
    state: &mut OptimizerState,
    hyper: &OptimizerHyper,
) -> Result<(), NnError> {
    if grads.len() != params.len() {
        return Err(NnError::LengthMismatch { expected: params.len(), found: grads.len() });
    }
    if state.first.len() != params.len() {
        return Err(NnError::LengthMismatch { expected: params.len(), found: state.first.len() });
    }
    state.step += 1;
    let t = state.step as i32;
    let lr = hyper.learning_rate;
    let eps = hyper.epsilon;
    match kind {
        Optimizer::Sgd => {
            for (p, g) in params.iter_mut().zip(grads) {
                *p -= lr * g;
            }
        }
        Optimizer::Adam => {
            let (b1, b2) = (hyper.beta1, hyper.beta2);
            let c1 = 1.0 - b1.powi(t);
            let c2 = 1.0 - b2.powi(t);
            for i in 0..params.len() {
                let g = grads[i];
                let m = b1 * state.first[i] + (1.0 - b1) * g;
                let v = b2 * state.second[i] + (1.0 - b2) * g * g;
                state.first[i] = m;
                state.second[i] = v;
                params[i] -= lr * (m / c1) / ((v / c2).sqrt() + eps);
            }
        }
        Optimizer::Adamax => {
            let (b1, b2) = (hyper.beta1, hyper.beta2);
            let step = lr / (1.0 - b1.powi(t));
            for i in 0..params.len() {
                let g = grads[i];
                let m = b1 * state.first[i] + (1.0 - b1) * g;
                let u = (b2 * state.second[i]).max(g.abs());
                state.first[i] = m;
                state.second[i] = u;
                params[i] -= step * m / (u + eps);
            }
        }
        Optimizer::Rmsprop => {
            let rho = hyper.rho;
            for i in 0..params.len() {
                let g = grads[i];
                let v = rho * state.second[i] + (1.0 - rho) * g * g;
                state.second[i] = v;
                params[i] -= lr * g / (v.sqrt() + eps);
            }
        }
    }
    Ok(())
}
