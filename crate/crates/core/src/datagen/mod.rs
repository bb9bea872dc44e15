//! Random Schmidt vectors and oracle-labelled datasets.
//!
//! Vectors come from [`sample_simplex_vector`]: a uniform draw from the
//! simplex (flat Dirichlet), sorted non-increasing. Each entry then follows
//! `Beta(1, dim - 1)`, so the entry distribution piles up near zero (see
//! [`histogram`]). [`SimplexSampler::NormalizedUniform`] is kept for
//! comparison; it does not show that concentration.
//!
//! Every vector of a generated dataset owns its own ChaCha stream, keyed by the
//! dataset seed and the vector index, so the output does not depend on how
//! many threads generated it.

mod csv;
pub mod histogram;
mod selfcat;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorization::{compare, normalize_and_sort, ProbVector};

pub use self::csv::{read_csv, read_csv_from, write_csv, write_csv_to};
pub use self::histogram::{entry_histogram, Histogram};
pub use self::selfcat::{
    build_higher_order_set, build_selfcat_eval_set, build_selfcat_eval_set_with_budget,
    selfcat_row, HigherOrderRow, HigherOrderSet, HIGHER_ORDER_BASE_DIM,
};

/// Upper bound on rows produced by [`SamplingMode::AllPairs`].
pub const DEFAULT_ROW_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SamplingMode {
    /// Row `i` pairs `alpha_i` with `beta_i`.
    #[default]
    Paired,
    /// Every `alpha_i` against every `beta_j`.
    AllPairs,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::Paired => "PAIRED",
            SamplingMode::AllPairs => "ALL_PAIRS",
        }
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "PAIRED" => Ok(SamplingMode::Paired),
            "ALL_PAIRS" => Ok(SamplingMode::AllPairs),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// A labelled pair: `maj_ab` is `alpha ⪯ beta`, `maj_ba` is `beta ⪯ alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub alpha: ProbVector,
    pub beta: ProbVector,
    pub maj_ab: bool,
    pub maj_ba: bool,
}

impl DatasetRow {
    /// Builds a row whose labels come from the exact oracle.
    pub fn labelled(alpha: ProbVector, beta: ProbVector) -> Result<Self> {
        let (maj_ab, maj_ba) = compare(&alpha, &beta)?.directions();
        Ok(DatasetRow {
            alpha,
            beta,
            maj_ab,
            maj_ba,
        })
    }

    /// Whether the stored labels agree with a fresh oracle evaluation.
    pub fn labels_sound(&self) -> Result<bool> {
        let tag = compare(&self.alpha, &self.beta)?;
        Ok(tag.directions() == (self.maj_ab, self.maj_ba))
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub rows: Vec<DatasetRow>,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Dataset {
    /// Checks that every row has dimension `dim`.
    pub fn new(dim: usize, rows: Vec<DatasetRow>, seed: u64, mode: SamplingMode) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            for found in [row.alpha.dim(), row.beta.dim()] {
                if found != dim {
                    return Err(Error::DimInconsistent {
                        line: i + 1,
                        expected: dim,
                        found,
                    });
                }
            }
        }
        Ok(Dataset {
            dim,
            rows,
            seed,
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Fraction of rows comparable in at least one direction.
    pub fn comparable_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let n = self.rows.iter().filter(|r| r.maj_ab || r.maj_ba).count();
        n as f64 / self.rows.len() as f64
    }

    fn with_rows(&self, rows: Vec<DatasetRow>) -> Dataset {
        Dataset {
            dim: self.dim,
            rows,
            seed: self.seed,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SimplexSampler {
    /// Normalized i.i.d. unit exponentials: uniform on the simplex.
    #[default]
    FlatDirichlet,
    /// Normalized i.i.d. uniforms on `[0, 1)`.
    NormalizedUniform,
}

impl SimplexSampler {
    pub fn sample<R: Rng + ?Sized>(self, dim: usize, rng: &mut R) -> Result<ProbVector> {
        if dim < 2 {
            return Err(Error::DimTooSmall { dim, min: 2 });
        }
        loop {
            let raw: Vec<f64> = match self {
                SimplexSampler::FlatDirichlet => (0..dim).map(|_| rng.sample(Exp1)).collect(),
                SimplexSampler::NormalizedUniform => (0..dim).map(|_| rng.random()).collect(),
            };
            match normalize_and_sort(&raw) {
                Err(Error::AllZero) => continue,
                other => return other,
            }
        }
    }
}

/// Draws one sorted probability vector of length `dim` with the default sampler.
pub fn sample_simplex_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ProbVector> {
    SimplexSampler::default().sample(dim, rng)
}

fn vector_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `alpha_i` and `beta_i` of a dataset with the given seed.
fn sample_pair_vectors(dim: usize, seed: u64, i: usize) -> Result<(ProbVector, ProbVector)> {
    let a = sample_simplex_vector(dim, &mut vector_stream(seed, 2 * i as u64))?;
    let b = sample_simplex_vector(dim, &mut vector_stream(seed, 2 * i as u64 + 1))?;
    Ok((a, b))
}

/// `n` independent vectors, vector `i` drawn from stream `i` of `seed`.
pub fn sample_vectors(dim: usize, n: usize, seed: u64) -> Result<Vec<ProbVector>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| sample_simplex_vector(dim, &mut vector_stream(seed, i as u64)))
        .collect()
}

pub fn generate_dataset(dim: usize, n: usize, mode: SamplingMode, seed: u64) -> Result<Dataset> {
    generate_dataset_capped(dim, n, mode, seed, DEFAULT_ROW_CAP)
}

/// Like [`generate_dataset`] with an explicit cap on the number of rows.
pub fn generate_dataset_capped(
    dim: usize,
    n: usize,
    mode: SamplingMode,
    seed: u64,
    row_cap: usize,
) -> Result<Dataset> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let rows = match mode {
        SamplingMode::Paired => {
            if n > row_cap {
                return Err(Error::Overflow {
                    rows: n as u128,
                    cap: row_cap,
                });
            }
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let (a, b) = sample_pair_vectors(dim, seed, i)?;
                    DatasetRow::labelled(a, b)
                })
                .collect::<Result<Vec<_>>>()?
        }
        SamplingMode::AllPairs => {
            let total = (n as u128) * (n as u128);
            if total > row_cap as u128 {
                return Err(Error::Overflow {
                    rows: total,
                    cap: row_cap,
                });
            }
            let pairs = (0..n)
                .into_par_iter()
                .map(|i| sample_pair_vectors(dim, seed, i))
                .collect::<Result<Vec<_>>>()?;
            (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let pairs = &pairs;
                    (0..n).map(move |j| {
                        DatasetRow::labelled(pairs[i].0.clone(), pairs[j].1.clone())
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Dataset::new(dim, rows, seed, mode)
}

/// Shuffles with `seed` and cuts at `⌊train_fraction · N⌋`.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * ds.len() as f64).floor() as usize;
    if n_train == 0 || n_train == ds.len() {
        return Err(Error::EmptySplit {
            total: ds.len(),
            fraction: train_fraction,
        });
    }
    split_at(ds, n_train, seed)
}

/// Shuffles with `seed` and puts the first `n_train` rows in the training part.
pub fn split_at(ds: &Dataset, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_train >= ds.len() {
        return Err(Error::EmptySplit {
            total: ds.len(),
            fraction: n_train as f64 / ds.len().max(1) as f64,
        });
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| ds.rows[i].clone()).collect();
    Ok((
        ds.with_rows(pick(&order[..n_train])),
        ds.with_rows(pick(&order[n_train..])),
    ))
}
