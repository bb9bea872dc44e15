//! Majorization classifiers applied to self-catalysis questions.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean;
use super::{
    environment_note, eval_seed, train_majorization_model, ModelRecipe, TrainedModel,
    PAIRING_CONVENTION, REPORT_SCHEMA_VERSION,
};
use crate::datagen::{build_selfcat_eval_set, DatasetRow, SamplingMode};
use crate::error::{Error, Result};
use crate::mlp::{evaluate, Confusion, MlpModel, OptimizerKind, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub base_dims: Vec<usize>,
    pub optimizer: OptimizerKind,
    /// Majorization rows at the product dimension used for training.
    pub train_size: usize,
    pub test_size: usize,
    /// Incomparable base pairs in each self-catalysis set.
    pub eval_size: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
}

impl Default for TransferSpec {
    fn default() -> Self {
        TransferSpec {
            base_dims: vec![3, 4],
            optimizer: OptimizerKind::Adam,
            train_size: 8000,
            test_size: 2000,
            eval_size: 2000,
            epochs: 50,
            batch_size: 32,
            seeds: vec![0, 1, 2],
        }
    }
}

impl TransferSpec {
    pub fn recipe(&self, base_dim: usize, seed: u64) -> ModelRecipe {
        ModelRecipe {
            dim: base_dim * base_dim,
            optimizer: self.optimizer,
            train_size: self.train_size,
            test_size: self.test_size,
            epochs: self.epochs,
            batch_size: self.batch_size,
            mode: SamplingMode::Paired,
            balance: false,
            learning_rate: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub base_dim: usize,
    pub product_dim: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub dataset_seed: u64,
    pub eval_seed: u64,
    pub model_checksum: String,
    /// Held-out accuracy on plain majorization at the product dimension.
    pub native_accuracy: f64,
    pub transfer_accuracy: f64,
    /// `native_accuracy - transfer_accuracy`.
    pub delta: f64,
    /// Against the exact label at the product dimension; false positives are
    /// pairs the model calls convertible that are not.
    pub confusion: Confusion,
    pub eval_rows: usize,
    pub eval_positive_fraction: f64,
    pub train_duration_s: f64,
    pub eval_duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub base_dim: usize,
    pub optimizer: OptimizerKind,
    pub mean_native_accuracy: f64,
    pub mean_transfer_accuracy: f64,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub schema_version: u32,
    pub spec: TransferSpec,
    pub pairing: String,
    pub records: Vec<TransferRecord>,
    pub summaries: Vec<TransferSummary>,
    pub environment: String,
}

impl TransferReport {
    pub fn summary(&self, base_dim: usize) -> Option<&TransferSummary> {
        self.summaries.iter().find(|s| s.base_dim == base_dim)
    }

    pub fn strip_timings(&self) -> TransferReport {
        let mut out = self.clone();
        for r in &mut out.records {
            r.train_duration_s = 0.0;
            r.eval_duration_s = 0.0;
        }
        out
    }
}

/// The self-catalysis question of each row, `α⊗α → β⊗α`, as one sample.
pub(crate) fn encode_forward(rows: &[DatasetRow], dim: usize) -> Result<Samples> {
    let mut inputs = Array2::zeros((rows.len(), 2 * dim));
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.dim() != dim {
            return Err(Error::DimMismatch {
                left: row.dim(),
                right: dim,
            });
        }
        let concat = row.alpha.entries().iter().chain(row.beta.entries());
        for (slot, &x) in inputs.row_mut(i).iter_mut().zip(concat) {
            *slot = x;
        }
        labels.push(if row.maj_ab { 1.0 } else { 0.0 });
    }
    Samples::new(inputs, labels)
}

/// Scores `model` on a freshly built self-catalysis set for `base_dim`.
pub fn score_transfer(
    model: &MlpModel,
    base_dim: usize,
    eval_size: usize,
    seed: u64,
) -> Result<(Samples, crate::mlp::Metrics)> {
    let set = build_selfcat_eval_set(base_dim, eval_size, eval_seed(seed, base_dim))?;
    let samples = encode_forward(&set.rows, set.dim)?;
    let metrics = evaluate(model, &samples)?;
    Ok((samples, metrics))
}

fn transfer_record(trained: &TrainedModel, base_dim: usize, spec: &TransferSpec) -> Result<TransferRecord> {
    let seed = trained.recipe.seed;
    let (samples, metrics) = score_transfer(&trained.model, base_dim, spec.eval_size, seed)?;
    let native = trained.test_metrics.accuracy;
    Ok(TransferRecord {
        base_dim,
        product_dim: base_dim * base_dim,
        optimizer: trained.recipe.optimizer,
        seed,
        dataset_seed: trained.seeds.dataset,
        eval_seed: eval_seed(seed, base_dim),
        model_checksum: trained.model.checksum(),
        native_accuracy: native,
        transfer_accuracy: metrics.accuracy,
        delta: native - metrics.accuracy,
        confusion: metrics.confusion,
        eval_rows: samples.len(),
        eval_positive_fraction: samples.positive_fraction(),
        train_duration_s: trained.train_duration_s,
        eval_duration_s: metrics.duration_s,
    })
}

fn summarize(records: &[TransferRecord]) -> Vec<TransferSummary> {
    let mut groups: BTreeMap<(usize, OptimizerKind), Vec<&TransferRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.base_dim, r.optimizer)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((base_dim, optimizer), rs)| {
            let avg = |f: fn(&TransferRecord) -> f64| {
                mean(&rs.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap_or(f64::NAN)
            };
            TransferSummary {
                base_dim,
                optimizer,
                mean_native_accuracy: avg(|r| r.native_accuracy),
                mean_transfer_accuracy: avg(|r| r.transfer_accuracy),
                mean_delta: avg(|r| r.delta),
            }
        })
        .collect()
}

/// For each base dimension `d` and seed, trains on majorization at `d²` and
/// scores the model both natively and on self-catalysis pairs.
pub fn run_transfer(spec: &TransferSpec) -> Result<TransferReport> {
    if spec.base_dims.is_empty() || spec.seeds.is_empty() || spec.eval_size == 0 {
        return Err(Error::InvalidArgument(
            "base dims, seeds and eval size must be non-empty".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = spec
        .base_dims
        .iter()
        .flat_map(|&d| spec.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(d, s)| {
            let trained = train_majorization_model(&spec.recipe(d, s))?;
            transfer_record(&trained, d, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransferReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        pairing: PAIRING_CONVENTION.into(),
        summaries: summarize(&records),
        records,
        environment: environment_note(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::selfcat_row;
    use crate::majorization::ProbVector;

    fn small_spec() -> TransferSpec {
        TransferSpec {
            base_dims: vec![3],
            train_size: 200,
            test_size: 50,
            eval_size: 40,
            epochs: 2,
            seeds: vec![1],
            ..TransferSpec::default()
        }
    }

    #[test]
    fn delta_is_native_minus_transfer() {
        let report = run_transfer(&small_spec()).unwrap();
        assert_eq!(report.records.len(), 1);
        let r = &report.records[0];
        assert_eq!(r.product_dim, 9);
        assert_eq!(r.delta, r.native_accuracy - r.transfer_accuracy);
        assert_eq!(r.confusion.total(), 40);
        assert_eq!(report.pairing, PAIRING_CONVENTION);
        let s = report.summary(3).unwrap();
        assert_eq!(s.mean_delta, r.delta);
    }

    #[test]
    fn scoring_twice_is_identical() {
        let spec = small_spec();
        let trained = train_majorization_model(&spec.recipe(3, 1)).unwrap();
        let a = transfer_record(&trained, 3, &spec).unwrap();
        let b = transfer_record(&trained, 3, &spec).unwrap();
        assert_eq!(a.confusion, b.confusion);
        assert_eq!(a.transfer_accuracy.to_bits(), b.transfer_accuracy.to_bits());
    }

    #[test]
    fn forward_encoding_carries_the_self_catalysis_label() {
        let a = ProbVector::new(vec![0.900, 0.081, 0.010, 0.009]).unwrap();
        let b = ProbVector::new(vec![0.950, 0.030, 0.020, 0.0]).unwrap();
        let row = selfcat_row(&a, &b).unwrap();
        let s = encode_forward(&[row], 16).unwrap();
        assert_eq!(s.labels, vec![1.0]);
        assert_eq!(s.width(), 32);
        assert_eq!(s.inputs[[0, 0]], 0.81);
    }
}
