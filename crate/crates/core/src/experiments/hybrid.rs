//! Two-stage pipelines deciding two-copy self-catalysis.
//!
//! Each instance is an incomparable base pair `(α, β)`. Stage one asks whether
//! `α⊗α → β⊗α` is possible; instances answered yes are settled there, the rest
//! move on to stage two, which asks whether `α⊗α⊗α → β⊗α⊗α` is possible.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean;
use super::transfer::encode_forward;
use super::{
    environment_note, eval_seed, train_majorization_model, ModelRecipe, PAIRING_CONVENTION,
    REPORT_SCHEMA_VERSION,
};
use crate::datagen::{build_higher_order_set, DatasetRow, SamplingMode, HIGHER_ORDER_BASE_DIM};
use crate::error::{Error, Result};
use crate::majorization::Tolerance;
use crate::mlp::{predict_labels, Confusion, MlpModel, OptimizerKind, Samples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    /// Exact prefix-sum test first, classifier second.
    ExactThenModel,
    /// Classifier at both stages.
    ModelThenModel,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ExactThenModel => "EXACT_THEN_MODEL",
            Strategy::ModelThenModel => "MODEL_THEN_MODEL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSpec {
    /// Higher-order instances per seed.
    pub n: usize,
    pub optimizer: OptimizerKind,
    /// Majorization rows used to train each stage's classifier.
    pub train_size: usize,
    pub test_size: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
}

impl Default for HybridSpec {
    fn default() -> Self {
        HybridSpec {
            n: 2000,
            optimizer: OptimizerKind::Adam,
            train_size: 8000,
            test_size: 2000,
            epochs: 50,
            batch_size: 32,
            seeds: vec![0, 1, 2],
        }
    }
}

impl HybridSpec {
    pub fn recipe(&self, dim: usize, seed: u64) -> ModelRecipe {
        ModelRecipe {
            dim,
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
pub struct StrategyReport {
    pub strategy: Strategy,
    pub input: usize,
    /// Settled as convertible at stage one.
    pub filtered: usize,
    /// Sent on to stage two.
    pub passed: usize,
    /// Stage-one decisions against the exact one-copy label.
    pub stage1_accuracy: f64,
    /// Stage-two decisions against the exact two-copy label, over passed instances.
    pub stage2_accuracy: Option<f64>,
    /// Final decisions against the exact two-copy label.
    pub end_to_end_accuracy: f64,
    pub confusion: Confusion,
    pub stage1_wall_s: f64,
    pub stage2_wall_s: f64,
    pub total_wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSeedReport {
    pub seed: u64,
    pub instance_seed: u64,
    pub first_model_checksum: String,
    pub second_model_checksum: String,
    pub first_model_native_accuracy: f64,
    pub second_model_native_accuracy: f64,
    /// Fraction of instances on which both strategies make the same final decision.
    pub agreement_rate: f64,
    /// Instances both strategies sent to stage two.
    pub common_passed: usize,
    pub strategies: Vec<StrategyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridReport {
    pub schema_version: u32,
    pub spec: HybridSpec,
    pub pairing: String,
    pub base_dim: usize,
    pub per_seed: Vec<HybridSeedReport>,
    pub mean_agreement_rate: f64,
    pub mean_accuracy: Vec<(Strategy, f64)>,
    pub environment: String,
}

impl HybridReport {
    pub fn mean_accuracy_of(&self, strategy: Strategy) -> Option<f64> {
        self.mean_accuracy
            .iter()
            .find(|(s, _)| *s == strategy)
            .map(|(_, a)| *a)
    }

    pub fn strip_timings(&self) -> HybridReport {
        let mut out = self.clone();
        for seed in &mut out.per_seed {
            for s in &mut seed.strategies {
                s.stage1_wall_s = 0.0;
                s.stage2_wall_s = 0.0;
                s.total_wall_s = 0.0;
            }
        }
        out
    }
}

struct Instances<'a> {
    first_rows: Vec<&'a DatasetRow>,
    first: Samples,
    second: Samples,
}

fn accuracy(pred: &[bool], truth: &[bool]) -> Option<f64> {
    if pred.is_empty() {
        return None;
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Some(hits as f64 / pred.len() as f64)
}

fn truth(s: &Samples) -> Vec<bool> {
    s.labels.iter().map(|&y| y == 1.0).collect()
}

/// Runs one strategy, returning its report and final decisions.
fn run_strategy(
    strategy: Strategy,
    inst: &Instances<'_>,
    first_model: &MlpModel,
    second_model: &MlpModel,
) -> Result<(StrategyReport, Vec<bool>)> {
    let started = Instant::now();
    let stage1: Vec<bool> = match strategy {
        Strategy::ExactThenModel => inst
            .first_rows
            .iter()
            .map(|r| Tolerance::DEFAULT.precedes(&r.alpha, &r.beta))
            .collect::<Result<_>>()?,
        Strategy::ModelThenModel => predict_labels(first_model, &inst.first)?,
    };
    let stage1_wall = started.elapsed();
    let passed_idx: Vec<usize> = (0..stage1.len()).filter(|&i| !stage1[i]).collect();
    let stage2_started = Instant::now();
    let stage2 = predict_labels(second_model, &inst.second.select(&passed_idx))?;
    let stage2_wall = stage2_started.elapsed();
    let total_wall = started.elapsed();

    let mut decisions = vec![true; stage1.len()];
    for (&i, &p) in passed_idx.iter().zip(&stage2) {
        decisions[i] = p;
    }
    let first_truth = truth(&inst.first);
    let second_truth = truth(&inst.second);
    let passed_truth: Vec<bool> = passed_idx.iter().map(|&i| second_truth[i]).collect();
    let mut confusion = Confusion::default();
    for (&p, &t) in decisions.iter().zip(&second_truth) {
        confusion.record(p, t);
    }
    let report = StrategyReport {
        strategy,
        input: stage1.len(),
        filtered: stage1.len() - passed_idx.len(),
        passed: passed_idx.len(),
        stage1_accuracy: accuracy(&stage1, &first_truth).unwrap_or(f64::NAN),
        stage2_accuracy: accuracy(&stage2, &passed_truth),
        end_to_end_accuracy: confusion.accuracy(),
        confusion,
        stage1_wall_s: stage1_wall.as_secs_f64(),
        stage2_wall_s: stage2_wall.as_secs_f64(),
        total_wall_s: total_wall.as_secs_f64(),
    };
    Ok((report, decisions))
}

fn run_seed(spec: &HybridSpec, seed: u64) -> Result<HybridSeedReport> {
    let base = HIGHER_ORDER_BASE_DIM;
    let first_dim = base * base;
    let second_dim = first_dim * base;
    let first_trained = train_majorization_model(&spec.recipe(first_dim, seed))?;
    let second_trained = train_majorization_model(&spec.recipe(second_dim, seed))?;
    let instance_seed = eval_seed(seed, base);
    let set = build_higher_order_set(spec.n, instance_seed)?;
    let first_rows: Vec<&DatasetRow> = set.rows.iter().map(|r| &r.first).collect();
    let first: Vec<DatasetRow> = set.rows.iter().map(|r| r.first.clone()).collect();
    let second: Vec<DatasetRow> = set.rows.iter().map(|r| r.second.clone()).collect();
    let inst = Instances {
        first_rows,
        first: encode_forward(&first, first_dim)?,
        second: encode_forward(&second, second_dim)?,
    };
    let (exact, exact_dec) = run_strategy(
        Strategy::ExactThenModel,
        &inst,
        &first_trained.model,
        &second_trained.model,
    )?;
    let (model, model_dec) = run_strategy(
        Strategy::ModelThenModel,
        &inst,
        &first_trained.model,
        &second_trained.model,
    )?;
    let agree = exact_dec.iter().zip(&model_dec).filter(|(a, b)| a == b).count();
    let exact_passed: Vec<bool> = first.iter().map(|r| !r.maj_ab).collect();
    let model_stage1 = predict_labels(&first_trained.model, &inst.first)?;
    let common_passed = exact_passed
        .iter()
        .zip(&model_stage1)
        .filter(|(&e, &m)| e && !m)
        .count();
    Ok(HybridSeedReport {
        seed,
        instance_seed,
        first_model_checksum: first_trained.model.checksum(),
        second_model_checksum: second_trained.model.checksum(),
        first_model_native_accuracy: first_trained.test_metrics.accuracy,
        second_model_native_accuracy: second_trained.test_metrics.accuracy,
        agreement_rate: agree as f64 / exact_dec.len() as f64,
        common_passed,
        strategies: vec![exact, model],
    })
}

/// Trains classifiers at `16` and `64` entries per seed and runs both
/// strategies on `spec.n` higher-order instances built from 4-entry pairs.
/// Both are scored against the exact 64-entry label.
pub fn run_hybrid(spec: &HybridSpec) -> Result<HybridReport> {
    if spec.n == 0 || spec.seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "instance count and seeds must be non-empty".into(),
        ));
    }
    let per_seed = spec
        .seeds
        .par_iter()
        .map(|&s| run_seed(spec, s))
        .collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = per_seed.iter().map(|r| r.agreement_rate).collect();
    let mean_accuracy = [Strategy::ExactThenModel, Strategy::ModelThenModel]
        .into_iter()
        .map(|s| {
            let accs: Vec<f64> = per_seed
                .iter()
                .flat_map(|r| r.strategies.iter())
                .filter(|r| r.strategy == s)
                .map(|r| r.end_to_end_accuracy)
                .collect();
            (s, mean(&accs).unwrap_or(f64::NAN))
        })
        .collect();
    Ok(HybridReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        pairing: PAIRING_CONVENTION.into(),
        base_dim: HIGHER_ORDER_BASE_DIM,
        mean_agreement_rate: mean(&rates).unwrap_or(f64::NAN),
        mean_accuracy,
        per_seed,
        environment: environment_note(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> HybridSpec {
        HybridSpec {
            n: 30,
            train_size: 100,
            test_size: 20,
            epochs: 1,
            seeds: vec![4],
            ..HybridSpec::default()
        }
    }

    #[test]
    fn stage_counts_telescope_and_exact_stage_is_perfect() {
        let report = run_hybrid(&small_spec()).unwrap();
        let seed = &report.per_seed[0];
        assert_eq!(seed.strategies.len(), 2);
        for s in &seed.strategies {
            assert_eq!(s.input, 30);
            assert_eq!(s.filtered + s.passed, s.input);
            assert_eq!(s.confusion.total(), 30);
        }
        assert_eq!(seed.strategies[0].strategy, Strategy::ExactThenModel);
        assert_eq!(seed.strategies[0].stage1_accuracy, 1.0);
        assert!((0.0..=1.0).contains(&seed.agreement_rate));
        assert_eq!(report.pairing, PAIRING_CONVENTION);
    }

    #[test]
    fn rerun_matches_without_timings() {
        let a = run_hybrid(&small_spec()).unwrap().strip_timings();
        let b = run_hybrid(&small_spec()).unwrap().strip_timings();
        assert_eq!(a, b);
    }
}
