//! Majorization learning across dimensions, optimizers and seeds.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean, FiveNumber};
use super::{
    environment_note, train_majorization_model, ModelRecipe, RunSeeds, REPORT_SCHEMA_VERSION,
};
use crate::datagen::{write_csv, SamplingMode};
use crate::error::{Error, Result};
use crate::mlp::{save_checkpoint, Confusion, OptimizerKind, TrainConfig, TrainingProvenance};
use crate::seed::derive_seed;

const EXECUTION_ORDER_SEED: u64 = 0x006f_7264_6572;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub dims: Vec<usize>,
    pub optimizers: Vec<OptimizerKind>,
    pub epochs: usize,
    /// Rows per training split; each row yields two samples.
    pub train_size: usize,
    pub test_size: usize,
    pub seeds: Vec<u64>,
    pub batch_size: usize,
    pub mode: SamplingMode,
    pub balance: bool,
    pub learning_rate: Option<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            dims: (3..=10).collect(),
            optimizers: OptimizerKind::ALL.to_vec(),
            epochs: 50,
            train_size: 8000,
            test_size: 2000,
            seeds: vec![0, 1, 2],
            batch_size: 32,
            mode: SamplingMode::Paired,
            balance: false,
            learning_rate: None,
        }
    }
}

impl SweepSpec {
    /// One million rows in total, split four to one.
    pub fn large(mut self) -> Self {
        self.train_size = 800_000;
        self.test_size = 200_000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.optimizers.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "dims, optimizers and seeds must be non-empty".into(),
            ));
        }
        if self.test_size == 0 || self.train_size == 0 {
            return Err(Error::InvalidArgument(
                "train and test sizes must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::DimTooSmall { dim: d, min: 2 });
        }
        Ok(())
    }

    pub fn recipe(&self, dim: usize, optimizer: OptimizerKind, seed: u64) -> ModelRecipe {
        ModelRecipe {
            dim,
            optimizer,
            train_size: self.train_size,
            test_size: self.test_size,
            epochs: self.epochs,
            batch_size: self.batch_size,
            mode: self.mode,
            balance: self.balance,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: f64,
}

/// File names, relative to the artifacts directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub checkpoint: String,
    pub test_set: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dim: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub seeds: RunSeeds,
    pub train_samples: usize,
    pub test_samples: usize,
    pub test_positive_fraction: f64,
    pub curve: Vec<EpochRecord>,
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub confusion: Confusion,
    pub train_duration_s: f64,
    pub test_duration_s: f64,
    pub model_checksum: String,
    pub artifacts: Option<RunArtifacts>,
}

/// Spread across dimensions of the seed-averaged accuracy at one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRecord {
    pub optimizer: OptimizerKind,
    pub epoch: usize,
    pub accuracy: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub spec: SweepSpec,
    pub runs: Vec<RunRecord>,
    pub dispersion: Vec<DispersionRecord>,
    pub environment: String,
}

impl RunReport {
    pub fn runs_for(&self, optimizer: OptimizerKind) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.optimizer == optimizer)
    }

    /// Seed-mean final accuracy per dimension, in ascending dimension order.
    pub fn mean_final_accuracy_by_dim(&self, optimizer: OptimizerKind) -> Vec<(usize, f64)> {
        group_by_dim(self.runs_for(optimizer), |r| r.final_accuracy)
    }

    /// Seed-mean training time per dimension.
    pub fn mean_train_time_by_dim(&self, optimizer: OptimizerKind) -> Vec<(usize, f64)> {
        group_by_dim(self.runs_for(optimizer), |r| r.train_duration_s)
    }

    /// Dispersion at the last recorded epoch.
    pub fn final_dispersion(&self, optimizer: OptimizerKind) -> Option<FiveNumber> {
        self.dispersion
            .iter()
            .filter(|d| d.optimizer == optimizer)
            .max_by_key(|d| d.epoch)
            .map(|d| d.accuracy)
    }

    /// Copy with every wall-clock field zeroed, for reproducibility comparisons.
    pub fn strip_timings(&self) -> RunReport {
        let mut out = self.clone();
        for r in &mut out.runs {
            r.train_duration_s = 0.0;
            r.test_duration_s = 0.0;
        }
        out
    }
}

fn group_by_dim<'a>(
    runs: impl Iterator<Item = &'a RunRecord>,
    value: impl Fn(&RunRecord) -> f64,
) -> Vec<(usize, f64)> {
    let mut by_dim: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in runs {
        by_dim.entry(r.dim).or_default().push(value(r));
    }
    by_dim
        .into_iter()
        .filter_map(|(d, v)| mean(&v).map(|m| (d, m)))
        .collect()
}

/// Per optimizer and epoch, the five-number summary over dimensions of the
/// seed-mean test accuracy.
pub fn compute_dispersion(runs: &[RunRecord]) -> Vec<DispersionRecord> {
    let mut table: BTreeMap<(OptimizerKind, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in runs {
        for e in &r.curve {
            table
                .entry((r.optimizer, e.epoch))
                .or_default()
                .entry(r.dim)
                .or_default()
                .push(e.test_accuracy);
        }
    }
    table
        .into_iter()
        .filter_map(|((optimizer, epoch), by_dim)| {
            let per_dim: Vec<f64> = by_dim.values().filter_map(|v| mean(v)).collect();
            FiveNumber::of(&per_dim).map(|accuracy| DispersionRecord {
                optimizer,
                epoch,
                accuracy,
            })
        })
        .collect()
}

fn run_one(spec: &SweepSpec, dim: usize, optimizer: OptimizerKind, seed: u64, artifacts: Option<&Path>) -> Result<RunRecord> {
    let recipe = spec.recipe(dim, optimizer, seed);
    let trained = train_majorization_model(&recipe)?;
    let artifacts = match artifacts {
        Some(dir) => {
            let stem = format!("d{dim}_{optimizer}_s{seed}");
            let files = RunArtifacts {
                checkpoint: format!("{stem}.model.json"),
                test_set: format!("{stem}.test.csv"),
            };
            let provenance = TrainingProvenance {
                init_seed: trained.seeds.init,
                optimizer,
                config: TrainConfig {
                    epochs: spec.epochs,
                    batch_size: spec.batch_size,
                    seed: trained.seeds.shuffle,
                    shuffle_each_epoch: true,
                    learning_rate: spec.learning_rate,
                },
                dataset_dim: dim,
                dataset_seed: trained.seeds.dataset,
            };
            save_checkpoint(&trained.model, Some(provenance), dir.join(&files.checkpoint))?;
            write_csv(&trained.test_set, dir.join(&files.test_set))?;
            Some(files)
        }
        None => None,
    };
    let curve = trained
        .history
        .iter()
        .map(|h| EpochRecord {
            epoch: h.epoch,
            train_loss: h.train_loss,
            test_accuracy: h.eval_accuracy.unwrap_or(f64::NAN),
        })
        .collect();
    Ok(RunRecord {
        dim,
        optimizer,
        seed,
        seeds: trained.seeds,
        train_samples: trained.train_samples,
        test_samples: trained.test.len(),
        test_positive_fraction: trained.test.positive_fraction(),
        curve,
        final_accuracy: trained.test_metrics.accuracy,
        final_loss: trained.test_metrics.mean_loss,
        confusion: trained.test_metrics.confusion,
        train_duration_s: trained.train_duration_s,
        test_duration_s: trained.test_metrics.duration_s,
        model_checksum: trained.model.checksum(),
        artifacts,
    })
}

/// Trains one model per `(dim, optimizer, seed)`.
///
/// Runs are independent and may execute in parallel. They are started in a
/// fixed shuffled order so that slow drifts in machine speed do not line up
/// with dimension in the recorded timings; the report lists them in
/// `dims × optimizers × seeds` order regardless. With `artifacts` set, each
/// run's checkpoint and held-out rows are written there.
pub fn run_majorization_sweep(spec: &SweepSpec, artifacts: Option<&Path>) -> Result<RunReport> {
    spec.validate()?;
    if let Some(dir) = artifacts {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let jobs: Vec<(usize, OptimizerKind, u64)> = spec
        .dims
        .iter()
        .flat_map(|&d| {
            spec.optimizers
                .iter()
                .flat_map(move |&o| spec.seeds.iter().map(move |&s| (d, o, s)))
        })
        .collect();
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(EXECUTION_ORDER_SEED, &spec.seeds)));
    let mut finished = order
        .par_iter()
        .map(|&i| {
            let (d, o, s) = jobs[i];
            run_one(spec, d, o, s, artifacts).map(|r| (i, r))
        })
        .collect::<Result<Vec<_>>>()?;
    finished.sort_unstable_by_key(|(i, _)| *i);
    let runs: Vec<RunRecord> = finished.into_iter().map(|(_, r)| r).collect();
    let dispersion = compute_dispersion(&runs);
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        runs,
        dispersion,
        environment: environment_note(),
    })
}
