//! First-order update rules.
//!
//! State is kept per parameter tensor, in the order of
//! [`MlpModel::params_mut`](super::MlpModel::params_mut).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Adadelta,
    Adagrad,
    Rmsprop,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Adam,
        OptimizerKind::Adadelta,
        OptimizerKind::Adagrad,
        OptimizerKind::Rmsprop,
        OptimizerKind::Sgd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Rmsprop => "rmsprop",
        }
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::Sgd | OptimizerKind::Adagrad => 0.01,
            OptimizerKind::Adam | OptimizerKind::Rmsprop => 0.001,
            OptimizerKind::Adadelta => 1.0,
        }
    }

    pub fn default_hyperparams(self) -> Hyperparams {
        Hyperparams {
            learning_rate: self.default_learning_rate(),
            ..Hyperparams::default()
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "adadelta" => Ok(OptimizerKind::Adadelta),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            other => Err(Error::InvalidArgument(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    /// Decay of the squared-gradient average (RMSprop).
    pub rho: f64,
    /// Decay of both running averages (Adadelta).
    pub adadelta_rho: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.001,
            rho: 0.9,
            adadelta_rho: 0.95,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub hyper: Hyperparams,
    pub step: u64,
    /// Adam: first moment. Adadelta: running mean of squared gradients.
    first: Vec<Vec<f64>>,
    /// Adam: second moment. Adagrad: gradient-square sum. RMSprop: running
    /// mean of squared gradients. Adadelta: running mean of squared updates.
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    /// Zeroed accumulators for tensors of the given sizes.
    pub fn new(kind: OptimizerKind, hyper: Hyperparams, sizes: &[usize]) -> Self {
        let zeros = |used: bool| {
            if used {
                sizes.iter().map(|&n| vec![0.0; n]).collect()
            } else {
                Vec::new()
            }
        };
        let (first, second) = match kind {
            OptimizerKind::Sgd => (false, false),
            OptimizerKind::Adagrad | OptimizerKind::Rmsprop => (false, true),
            OptimizerKind::Adam | OptimizerKind::Adadelta => (true, true),
        };
        OptimizerState {
            kind,
            hyper,
            step: 0,
            first: zeros(first),
            second: zeros(second),
        }
    }

    /// Applies one update in place.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::DimMismatch {
                left: params.len(),
                right: grads.len(),
            });
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            let expected = self.first.get(i).or(self.second.get(i)).map(Vec::len);
            if p.len() != g.len() || expected.is_some_and(|n| n != p.len()) {
                return Err(Error::DimMismatch {
                    left: p.len(),
                    right: g.len(),
                });
            }
        }
        self.step += 1;
        let h = self.hyper;
        let lr = h.learning_rate;
        let eps = h.epsilon;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (x, &d) in p.iter_mut().zip(*g) {
                        *x -= lr * d;
                    }
                }
            }
            OptimizerKind::Adagrad => {
                for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.second) {
                    for ((x, &d), s) in p.iter_mut().zip(*g).zip(acc.iter_mut()) {
                        *s += d * d;
                        *x -= lr * d / (*s + eps).sqrt();
                    }
                }
            }
            OptimizerKind::Rmsprop => {
                let rho = h.rho;
                for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.second) {
                    for ((x, &d), s) in p.iter_mut().zip(*g).zip(acc.iter_mut()) {
                        *s = rho * *s + (1.0 - rho) * d * d;
                        *x -= lr * d / (*s + eps).sqrt();
                    }
                }
            }
            OptimizerKind::Adadelta => {
                let rho = h.adadelta_rho;
                let tensors = params
                    .iter_mut()
                    .zip(grads)
                    .zip(self.first.iter_mut().zip(&mut self.second));
                for ((p, g), (sq_grad, sq_update)) in tensors {
                    let accs = sq_grad.iter_mut().zip(sq_update.iter_mut());
                    for ((x, &d), (eg, ex)) in p.iter_mut().zip(*g).zip(accs) {
                        *eg = rho * *eg + (1.0 - rho) * d * d;
                        let update = -((*ex + eps).sqrt() / (*eg + eps).sqrt()) * d;
                        *ex = rho * *ex + (1.0 - rho) * update * update;
                        *x += lr * update;
                    }
                }
            }
            OptimizerKind::Adam => {
                let t = self.step as i32;
                let inv_c1 = 1.0 / (1.0 - h.beta1.powi(t));
                let inv_c2 = 1.0 / (1.0 - h.beta2.powi(t));
                let tensors = params
                    .iter_mut()
                    .zip(grads)
                    .zip(self.first.iter_mut().zip(&mut self.second));
                for ((p, g), (m, v)) in tensors {
                    for ((x, &d), (mi, vi)) in p.iter_mut().zip(*g).zip(m.iter_mut().zip(v.iter_mut())) {
                        *mi = h.beta1 * *mi + (1.0 - h.beta1) * d;
                        *vi = h.beta2 * *vi + (1.0 - h.beta2) * d * d;
                        let m_hat = *mi * inv_c1;
                        let v_hat = *vi * inv_c2;
                        *x -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Convenience wrapper matching the functional form `step(kind, state, params, grads)`.
pub fn optimizer_step(
    state: &mut OptimizerState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
) -> Result<()> {
    state.step(params, grads)
}
