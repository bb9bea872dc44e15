//! Evaluation sets for self-catalysis.
//!
//! Only incomparable base pairs `(a, b)` are kept. The one-copy question
//! "does `a ⊗ a -> b ⊗ a` hold?" becomes an ordinary majorization row at
//! dimension `d²` with `alpha' = a ⊗ a` and `beta' = b ⊗ a`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_simplex_vector, Dataset, DatasetRow, SamplingMode};
use crate::error::{Error, Result};
use crate::majorization::{compare, kron, Comparability, ProbVector};

/// Base dimension of higher-order rows: products live at 16 and 64.
pub const HIGHER_ORDER_BASE_DIM: usize = 4;

/// Draws allowed per requested row before giving up.
const DRAWS_PER_ROW: usize = 1000;

/// The `(a ⊗ a, b ⊗ a)` row for an incomparable pair.
pub fn selfcat_row(a: &ProbVector, b: &ProbVector) -> Result<DatasetRow> {
    let tag = compare(a, b)?;
    if tag != Comparability::Incomparable {
        return Err(Error::NotIncomparable(tag.to_string()));
    }
    DatasetRow::labelled(kron(a, a), kron(b, a))
}

/// Collects `n` incomparable pairs at base dimension `dim`.
fn incomparable_pairs(
    dim: usize,
    n: usize,
    seed: u64,
    budget: usize,
) -> Result<Vec<(ProbVector, ProbVector)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..budget {
        if pairs.len() == n {
            break;
        }
        let a = sample_simplex_vector(dim, &mut rng)?;
        let b = sample_simplex_vector(dim, &mut rng)?;
        if compare(&a, &b)? == Comparability::Incomparable {
            pairs.push((a, b));
        }
    }
    if pairs.len() < n {
        return Err(Error::Underfull {
            wanted: n,
            found: pairs.len(),
            budget,
        });
    }
    Ok(pairs)
}

pub fn build_selfcat_eval_set(dim: usize, n: usize, seed: u64) -> Result<Dataset> {
    build_selfcat_eval_set_with_budget(dim, n, seed, n.saturating_mul(DRAWS_PER_ROW))
}

/// Like [`build_selfcat_eval_set`] with an explicit cap on pair draws.
pub fn build_selfcat_eval_set_with_budget(
    dim: usize,
    n: usize,
    seed: u64,
    budget: usize,
) -> Result<Dataset> {
    if dim < 3 {
        return Err(Error::DimTooSmall { dim, min: 3 });
    }
    let rows = incomparable_pairs(dim, n, seed, budget)?
        .iter()
        .map(|(a, b)| selfcat_row(a, b))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(dim * dim, rows, seed, SamplingMode::Paired)
}

/// One incomparable base pair followed through two rounds of self-catalysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderRow {
    /// `(a, b)`; both labels false.
    pub base: DatasetRow,
    /// `(a ⊗ a, b ⊗ a)`.
    pub first: DatasetRow,
    /// `(a ⊗ a ⊗ a, b ⊗ a ⊗ a)`.
    pub second: DatasetRow,
}

impl HigherOrderRow {
    pub fn from_pair(a: &ProbVector, b: &ProbVector) -> Result<Self> {
        let first = selfcat_row(a, b)?;
        let second = DatasetRow::labelled(kron(&first.alpha, a), kron(&first.beta, a))?;
        Ok(HigherOrderRow {
            base: DatasetRow::labelled(a.clone(), b.clone())?,
            first,
            second,
        })
    }

    /// Rows already convertible with one copy never reach the second stage.
    pub fn needs_second_stage(&self) -> bool {
        !self.first.maj_ab
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderSet {
    pub seed: u64,
    pub rows: Vec<HigherOrderRow>,
}

impl HigherOrderSet {
    /// Rows whose one-copy transformation fails, i.e. the exact-filter survivors.
    pub fn second_stage_rows(&self) -> impl Iterator<Item = &HigherOrderRow> {
        self.rows.iter().filter(|r| r.needs_second_stage())
    }
}

pub fn build_higher_order_set(n: usize, seed: u64) -> Result<HigherOrderSet> {
    let pairs = incomparable_pairs(
        HIGHER_ORDER_BASE_DIM,
        n,
        seed,
        n.saturating_mul(DRAWS_PER_ROW),
    )?;
    let rows = pairs
        .iter()
        .map(|(a, b)| HigherOrderRow::from_pair(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(HigherOrderSet { seed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorization::{kron_power, precedes};

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn one_copy_example_is_labelled_true() {
        let a = pv(&[0.900, 0.081, 0.010, 0.009]);
        let b = pv(&[0.950, 0.030, 0.020, 0.0]);
        let row = selfcat_row(&a, &b).unwrap();
        assert_eq!(row.dim(), 16);
        assert!(row.maj_ab);
    }

    #[test]
    fn incomparable_example_is_not_self_catalytic() {
        // Verified with the prefix-sum oracle: neither direction holds at d = 16.
        let a = pv(&[0.5, 0.25, 0.25, 0.0]);
        let b = pv(&[0.4, 0.4, 0.1, 0.1]);
        let row = selfcat_row(&a, &b).unwrap();
        assert!(!row.maj_ab);
        assert!(!row.maj_ba);
        let rev = selfcat_row(&b, &a).unwrap();
        assert!(!rev.maj_ab);
    }

    #[test]
    fn ordered_pairs_are_rejected() {
        let err = selfcat_row(&ProbVector::uniform(3), &ProbVector::product(3)).unwrap_err();
        assert!(matches!(err, Error::NotIncomparable(_)));
    }

    #[test]
    fn eval_set_rows_come_from_incomparable_pairs() {
        let ds = build_selfcat_eval_set(3, 200, 5).unwrap();
        assert_eq!(ds.dim, 9);
        assert_eq!(ds.len(), 200);
        for row in &ds.rows {
            assert!(row.labels_sound().unwrap());
        }
        // Rebuilding from the same draws reproduces the base pairs.
        let pairs = incomparable_pairs(3, 200, 5, 200_000).unwrap();
        for ((a, b), row) in pairs.iter().zip(&ds.rows) {
            assert_eq!(compare(a, b).unwrap(), Comparability::Incomparable);
            assert_eq!(&kron(a, a), &row.alpha);
            assert_eq!(&kron(b, a), &row.beta);
        }
    }

    #[test]
    fn eval_set_reports_underfull_budget() {
        let err = build_selfcat_eval_set_with_budget(3, 50, 0, 10).unwrap_err();
        assert!(matches!(err, Error::Underfull { wanted: 50, .. }));
        assert!(build_selfcat_eval_set(2, 5, 0).is_err());
    }

    #[test]
    fn higher_order_rows_chain_products() {
        let set = build_higher_order_set(100, 3).unwrap();
        assert_eq!(set.rows.len(), 100);
        for row in &set.rows {
            let a = &row.base.alpha;
            let b = &row.base.beta;
            assert!(!row.base.maj_ab && !row.base.maj_ba);
            assert_eq!(row.first.alpha, kron(a, a));
            assert_eq!(row.first.beta, kron(b, a));
            assert_eq!(row.second.dim(), 64);
            let lhs = kron_power(a, 3);
            let rhs = kron(b, &kron_power(a, 2));
            assert_eq!(row.second.maj_ab, precedes(&lhs, &rhs).unwrap());
            // One copy suffices => two copies suffice.
            if row.first.maj_ab {
                assert!(row.second.maj_ab);
            }
        }
        assert!(set.second_stage_rows().all(|r| !r.first.maj_ab));
    }
}
