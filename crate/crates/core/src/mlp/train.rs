use std::time::{Duration, Instant};

use ndarray::{s, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::Samples;
use super::model::{loss, MlpModel};
use super::optim::{OptimizerKind, OptimizerState};
use crate::error::{Error, Result};

/// Outputs at or above this value are predicted as class 1.
pub const DECISION_THRESHOLD: f64 = 0.5;

const EVAL_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
    /// Overrides the optimizer's default learning rate.
    pub learning_rate: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            seed: 0,
            shuffle_each_epoch: true,
            learning_rate: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean loss over the epoch's samples, measured before each batch update.
    pub train_loss: f64,
    pub eval_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochStats>,
    /// Time spent in the training loop, excluding per-epoch evaluation.
    pub duration: Duration,
    pub optimizer: OptimizerState,
}

/// Mini-batch training for `cfg.epochs` epochs.
///
/// Single-threaded and fully determined by `(model, data, cfg, kind)`. When
/// `eval` is given its accuracy is recorded after every epoch.
pub fn train(
    model: &mut MlpModel,
    data: &Samples,
    cfg: &TrainConfig,
    kind: OptimizerKind,
    eval: Option<&Samples>,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    if data.width() != model.input_dim() {
        return Err(Error::DimMismatch {
            left: data.width(),
            right: model.input_dim(),
        });
    }
    let mut hyper = kind.default_hyperparams();
    if let Some(lr) = cfg.learning_rate {
        hyper.learning_rate = lr;
    }
    let mut optimizer = OptimizerState::new(kind, hyper, &model.param_sizes());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut elapsed = Duration::ZERO;

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let inputs = data.inputs.select(Axis(0), idx);
            let labels: Vec<f64> = idx.iter().map(|&i| data.labels[i]).collect();
            let (grads, batch_loss) = model.backward(inputs.view(), &labels)?;
            loss_sum += batch_loss * idx.len() as f64;
            optimizer.step(&mut model.params_mut(), &grads.tensors())?;
        }
        elapsed += started.elapsed();

        let eval_accuracy = match eval {
            Some(set) => Some(evaluate(model, set)?.accuracy),
            None => None,
        };
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / data.len() as f64,
            eval_accuracy,
        });
    }
    Ok(TrainOutcome {
        history,
        duration: elapsed,
        optimizer,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    fn merge(mut self, other: Confusion) -> Confusion {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub mean_loss: f64,
    pub confusion: Confusion,
    pub duration_s: f64,
}

/// Accuracy, mean loss and confusion counts on `data`.
///
/// Chunks are scored in parallel and reduced in order, so the result does not
/// depend on the thread count.
pub fn evaluate(model: &MlpModel, data: &Samples) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let started = Instant::now();
    let n_chunks = data.len().div_ceil(EVAL_CHUNK);
    let parts = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * EVAL_CHUNK;
            let hi = (lo + EVAL_CHUNK).min(data.len());
            let probs = model.predict_batch(data.inputs.slice(s![lo..hi, ..]))?;
            let mut confusion = Confusion::default();
            let mut loss_sum = 0.0;
            for (p, &y) in probs.iter().zip(&data.labels[lo..hi]) {
                confusion.record(*p >= DECISION_THRESHOLD, y == 1.0);
                loss_sum += loss(*p, y);
            }
            Ok((confusion, loss_sum))
        })
        .collect::<Result<Vec<_>>>()?;
    let (confusion, loss_sum) = parts
        .into_iter()
        .fold((Confusion::default(), 0.0), |(c, l), (pc, pl)| (c.merge(pc), l + pl));
    Ok(Metrics {
        accuracy: confusion.accuracy(),
        mean_loss: loss_sum / data.len() as f64,
        confusion,
        duration_s: started.elapsed().as_secs_f64(),
    })
}

/// Thresholded predictions for every sample.
pub fn predict_labels(model: &MlpModel, data: &Samples) -> Result<Vec<bool>> {
    if data.is_empty() {
        return Ok(Vec::new());
    }
    let probs = model.predict_batch(data.inputs.view())?;
    Ok(probs.iter().map(|&p| p >= DECISION_THRESHOLD).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::model::{Activation, Dense, LayerSpec};
    use ndarray::{Array1, Array2};
    use rand::Rng;

    /// Points in the unit square labelled by `x1 > x2`.
    fn toy_set(n: usize, seed: u64) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut flat = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(n);
        while labels.len() < n {
            let (x1, x2): (f64, f64) = (rng.random(), rng.random());
            if (x1 - x2).abs() < 0.02 {
                continue;
            }
            flat.extend([x1, x2]);
            labels.push(if x1 > x2 { 1.0 } else { 0.0 });
        }
        Samples::new(Array2::from_shape_vec((n, 2), flat).unwrap(), labels).unwrap()
    }

    fn small_net(seed: u64) -> MlpModel {
        let specs = [
            LayerSpec {
                fan_in: 2,
                fan_out: 16,
                activation: Activation::Relu,
            },
            LayerSpec {
                fan_in: 16,
                fan_out: 1,
                activation: Activation::Sigmoid,
            },
        ];
        MlpModel::new(2, &specs, seed).unwrap()
    }

    fn smooth(xs: &[f64], window: usize) -> Vec<f64> {
        xs.windows(window)
            .map(|w| w.iter().sum::<f64>() / window as f64)
            .collect()
    }

    #[test]
    fn learns_a_separable_toy_problem() {
        let data = toy_set(2000, 1);
        let test = toy_set(500, 2);
        let mut model = small_net(3);
        let cfg = TrainConfig {
            seed: 4,
            ..TrainConfig::default()
        };
        let out = train(&mut model, &data, &cfg, OptimizerKind::Adam, Some(&test)).unwrap();
        assert_eq!(out.history.len(), 50);
        let acc = evaluate(&model, &test).unwrap().accuracy;
        assert!(acc >= 0.99, "accuracy {acc}");
    }

    #[test]
    fn smoothed_loss_is_non_increasing() {
        let data = toy_set(2000, 5);
        for kind in [OptimizerKind::Adam, OptimizerKind::Rmsprop] {
            let mut model = small_net(6);
            let cfg = TrainConfig {
                seed: 7,
                ..TrainConfig::default()
            };
            let out = train(&mut model, &data, &cfg, kind, None).unwrap();
            let losses: Vec<f64> = out.history.iter().map(|h| h.train_loss).collect();
            let smoothed = smooth(&losses, 5);
            for w in smoothed.windows(2) {
                assert!(w[1] <= w[0], "{kind}: {smoothed:?}");
            }
        }
    }

    #[test]
    fn zero_epochs_leave_model_untouched() {
        let data = toy_set(100, 1);
        let mut model = small_net(0);
        let before = model.clone();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(&mut model, &data, &cfg, OptimizerKind::Sgd, None).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(model, before);
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_set(300, 1);
        let cfg = TrainConfig {
            epochs: 5,
            seed: 9,
            ..TrainConfig::default()
        };
        let mut a = small_net(2);
        let mut b = small_net(2);
        let ha = train(&mut a, &data, &cfg, OptimizerKind::Adadelta, None).unwrap();
        let hb = train(&mut b, &data, &cfg, OptimizerKind::Adadelta, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha.history, hb.history);
    }

    #[test]
    fn empty_training_set_is_rejected() {
        let empty = Samples::new(Array2::zeros((0, 2)), vec![]).unwrap();
        let mut model = small_net(0);
        assert!(matches!(
            train(&mut model, &empty, &TrainConfig::default(), OptimizerKind::Adam, None),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(evaluate(&model, &empty), Err(Error::EmptyDataset)));
    }

    fn constant_half_model() -> MlpModel {
        let layer = Dense {
            weights: Array2::zeros((1, 2)),
            bias: Array1::zeros(1),
            activation: Activation::Sigmoid,
        };
        MlpModel::from_layers(2, vec![layer]).unwrap()
    }

    #[test]
    fn half_output_predicts_class_one() {
        let data = toy_set(400, 3);
        let m = evaluate(&constant_half_model(), &data).unwrap();
        let positives = data.labels.iter().filter(|&&y| y == 1.0).count() as f64;
        assert_eq!(m.accuracy, positives / data.len() as f64);
        assert_eq!(m.confusion.total(), 400);
        assert_eq!(m.confusion.tn + m.confusion.fn_, 0);
        assert!((m.mean_loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_model_scores_one() {
        // sigmoid(100 (x1 - x2)) is the toy labelling rule.
        let layer = Dense {
            weights: ndarray::array![[100.0, -100.0]],
            bias: Array1::zeros(1),
            activation: Activation::Sigmoid,
        };
        let model = MlpModel::from_layers(2, vec![layer]).unwrap();
        let data = toy_set(3000, 8);
        let m = evaluate(&model, &data).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.confusion.total(), 3000);
        assert_eq!(
            predict_labels(&model, &data).unwrap(),
            data.labels.iter().map(|&y| y == 1.0).collect::<Vec<_>>()
        );
    }
}
