//! The three studies (majorization sweep, transfer to self-catalysis, hybrid
//! higher-order pipelines), timing trends and report export.

mod hybrid;
mod report;
pub mod stats;
mod sweep;
mod transfer;
mod trend;

pub use hybrid::{run_hybrid, HybridReport, HybridSeedReport, HybridSpec, Strategy, StrategyReport};
pub use report::{export_report, load_report, write_figure_csvs, Report, ReportFormat};
pub use sweep::{
    compute_dispersion, run_majorization_sweep, DispersionRecord, EpochRecord, RunArtifacts,
    RunRecord, RunReport, SweepSpec,
};
pub use transfer::{run_transfer, TransferRecord, TransferReport, TransferSpec, TransferSummary};
pub use trend::{fit_time_trend, TimeTrend};

use serde::{Deserialize, Serialize};

use crate::datagen::{generate_dataset, split_at, Dataset, SamplingMode};
use crate::error::{Error, Result};
use crate::mlp::{
    balance, encode_dataset, evaluate, train, EpochStats, Metrics, MlpModel, OptimizerKind,
    Samples, TrainConfig,
};
use crate::seed::derive_seed;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How an ordered product pair is formed from an incomparable base pair `(α, β)`.
pub const PAIRING_CONVENTION: &str = "(α⊗α, β⊗α)";

const TAG_DATA: u64 = 0;
const TAG_SPLIT: u64 = 1;
const TAG_INIT: u64 = 2;
const TAG_SHUFFLE: u64 = 3;
const TAG_BALANCE: u64 = 4;
const TAG_EVAL: u64 = 5;

/// Everything needed to train one majorization classifier from scratch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRecipe {
    pub dim: usize,
    pub optimizer: OptimizerKind,
    /// Rows (each row yields two samples).
    pub train_size: usize,
    pub test_size: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub mode: SamplingMode,
    pub balance: bool,
    pub learning_rate: Option<f64>,
    pub seed: u64,
}

/// Seeds of every random stream in one run, derived from `(seed, dim)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub dataset: u64,
    pub split: u64,
    pub init: u64,
    pub shuffle: u64,
    pub balance: u64,
}

impl RunSeeds {
    pub fn derive(seed: u64, dim: usize) -> Self {
        let d = dim as u64;
        RunSeeds {
            dataset: derive_seed(seed, &[d, TAG_DATA]),
            split: derive_seed(seed, &[d, TAG_SPLIT]),
            init: derive_seed(seed, &[d, TAG_INIT]),
            shuffle: derive_seed(seed, &[d, TAG_SHUFFLE]),
            balance: derive_seed(seed, &[d, TAG_BALANCE]),
        }
    }
}

/// Seed of an evaluation set built for base dimension `dim`.
pub(crate) fn eval_seed(seed: u64, dim: usize) -> u64 {
    derive_seed(seed, &[dim as u64, TAG_EVAL])
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub recipe: ModelRecipe,
    pub seeds: RunSeeds,
    pub model: MlpModel,
    pub test_set: Dataset,
    pub test: Samples,
    pub train_samples: usize,
    pub history: Vec<EpochStats>,
    pub train_duration_s: f64,
    pub test_metrics: Metrics,
}

/// Generates a labelled dataset, splits it, trains and scores on the held-out rows.
pub fn train_majorization_model(recipe: &ModelRecipe) -> Result<TrainedModel> {
    if recipe.train_size == 0 || recipe.test_size == 0 {
        return Err(Error::InvalidArgument(
            "train and test sizes must be positive".into(),
        ));
    }
    let seeds = RunSeeds::derive(recipe.seed, recipe.dim);
    let total = recipe.train_size + recipe.test_size;
    let ds = generate_dataset(recipe.dim, total, recipe.mode, seeds.dataset)?;
    let (train_set, test_set) = split_at(&ds, recipe.train_size, seeds.split)?;
    let mut train_samples = encode_dataset(&train_set);
    if recipe.balance {
        train_samples = balance(&train_samples, seeds.balance);
    }
    let test = encode_dataset(&test_set);
    let mut model = MlpModel::build_default(recipe.dim, seeds.init)?;
    let cfg = TrainConfig {
        epochs: recipe.epochs,
        batch_size: recipe.batch_size,
        seed: seeds.shuffle,
        shuffle_each_epoch: true,
        learning_rate: recipe.learning_rate,
    };
    let outcome = train(&mut model, &train_samples, &cfg, recipe.optimizer, Some(&test))?;
    let test_metrics = evaluate(&model, &test)?;
    Ok(TrainedModel {
        recipe: *recipe,
        seeds,
        model,
        test_set,
        test,
        train_samples: train_samples.len(),
        history: outcome.history,
        train_duration_s: outcome.duration.as_secs_f64(),
        test_metrics,
    })
}

/// Free-text description of where a report was produced.
pub fn environment_note() -> String {
    format!(
        "{}-{}, {} worker threads",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads()
    )
}
