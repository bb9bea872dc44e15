//! The majorization preorder on probability vectors.
//!
//! A pure bipartite state is represented here only by its Schmidt vector: a
//! probability vector sorted in non-increasing order. Deterministic LOCC
//! convertibility `a -> b` holds exactly when every prefix sum of `a` is at most
//! the matching prefix sum of `b`, which is what [`precedes`] decides.
//!
//! All inequality and normalization checks go through a [`Tolerance`]. The free
//! functions use [`Tolerance::DEFAULT`]; the methods on [`Tolerance`] take an
//! explicit one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used for every prefix-sum and normalization check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Tolerance(eps))
        } else {
            Err(Error::InvalidArgument(format!(
                "tolerance must be positive and finite, got {eps}"
            )))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    /// Decides `a ⪯ b`: every prefix sum of `a` is at most that of `b` plus eps.
    pub fn precedes(self, a: &ProbVector, b: &ProbVector) -> Result<bool> {
        check_same_dim(a, b)?;
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        for (x, y) in a.entries.iter().zip(&b.entries) {
            sum_a += x;
            sum_b += y;
            if sum_a > sum_b + self.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn compare(self, a: &ProbVector, b: &ProbVector) -> Result<Comparability> {
        let ab = self.precedes(a, b)?;
        let ba = self.precedes(b, a)?;
        Ok(Comparability::from_directions(ab, ba))
    }

    /// True iff `a -> b` is forbidden outright but `a ⊗ c -> b ⊗ c` is allowed.
    pub fn is_catalyst(self, catalyst: &ProbVector, a: &ProbVector, b: &ProbVector) -> Result<bool> {
        if self.precedes(a, b)? {
            return Ok(false);
        }
        self.precedes(&kron(a, catalyst), &kron(b, catalyst))
    }

    /// Smallest `k` in `1..=k_max` with `a^{⊗(k+1)} ⪯ b ⊗ a^{⊗k}`.
    ///
    /// Only the `a -> b` direction is searched. `Ok(None)` means no order up to
    /// `k_max` works.
    pub fn self_catalysis_order(
        self,
        a: &ProbVector,
        b: &ProbVector,
        k_max: usize,
    ) -> Result<Option<usize>> {
        let tag = self.compare(a, b)?;
        if tag != Comparability::Incomparable {
            return Err(Error::NotIncomparable(tag.to_string()));
        }
        let mut copies = a.clone();
        for k in 1..=k_max {
            let lhs = kron(a, &copies);
            let rhs = kron(b, &copies);
            if self.precedes(&lhs, &rhs)? {
                return Ok(Some(k));
            }
            copies = lhs;
        }
        Ok(None)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

/// A Schmidt vector: non-negative entries, sorted non-increasing, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Validates `entries` as-is (no sorting or rescaling) with the default tolerance.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(entries, Tolerance::DEFAULT)
    }

    pub fn with_tolerance(entries: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        let eps = tol.eps();
        for (i, &x) in entries.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if x < -eps || x > 1.0 + eps {
                return Err(Error::InvalidProbVector(format!(
                    "entry {i} = {x} outside [0, 1]"
                )));
            }
        }
        if let Some(i) = entries.windows(2).position(|w| w[1] > w[0] + eps) {
            return Err(Error::InvalidProbVector(format!(
                "entries {i} and {} are not in non-increasing order",
                i + 1
            )));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > eps {
            return Err(Error::InvalidProbVector(format!("entries sum to {sum}")));
        }
        Ok(ProbVector { entries })
    }

    /// `(1/d, ..., 1/d)`, the maximally entangled Schmidt vector.
    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ProbVector {
            entries: vec![1.0 / dim as f64; dim],
        }
    }

    /// `(1, 0, ..., 0)`, the Schmidt vector of a product state.
    pub fn product(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut entries = vec![0.0; dim];
        entries[0] = 1.0;
        ProbVector { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        ProbVector::new(entries)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(v: ProbVector) -> Self {
        v.entries
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.entries
    }
}

/// Outcome of comparing two vectors in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Comparability {
    APrecedesB,
    BPrecedesA,
    Equivalent,
    Incomparable,
}

impl Comparability {
    pub fn from_directions(a_precedes_b: bool, b_precedes_a: bool) -> Self {
        match (a_precedes_b, b_precedes_a) {
            (true, true) => Comparability::Equivalent,
            (true, false) => Comparability::APrecedesB,
            (false, true) => Comparability::BPrecedesA,
            (false, false) => Comparability::Incomparable,
        }
    }

    /// The `(a ⪯ b, b ⪯ a)` pair this tag stands for.
    pub fn directions(self) -> (bool, bool) {
        match self {
            Comparability::Equivalent => (true, true),
            Comparability::APrecedesB => (true, false),
            Comparability::BPrecedesA => (false, true),
            Comparability::Incomparable => (false, false),
        }
    }
}

impl fmt::Display for Comparability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Comparability::APrecedesB => "A_PRECEDES_B",
            Comparability::BPrecedesA => "B_PRECEDES_A",
            Comparability::Equivalent => "EQUIVALENT",
            Comparability::Incomparable => "INCOMPARABLE",
        };
        f.write_str(s)
    }
}

fn check_same_dim(a: &ProbVector, b: &ProbVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Rescales non-negative weights onto the simplex and sorts them non-increasing.
pub fn normalize_and_sort(raw: &[f64]) -> Result<ProbVector> {
    if raw.is_empty() {
        return Err(Error::EmptyVector);
    }
    for (i, &x) in raw.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        if x < 0.0 {
            return Err(Error::NegativeEntry { index: i, value: x });
        }
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::AllZero);
    }
    let mut entries: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    sort_descending(&mut entries);
    Ok(ProbVector { entries })
}

fn sort_descending(v: &mut [f64]) {
    v.sort_unstable_by(|x, y| y.total_cmp(x));
}

pub fn prefix_sums(v: &ProbVector) -> Vec<f64> {
    v.entries
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

pub fn precedes(a: &ProbVector, b: &ProbVector) -> Result<bool> {
    Tolerance::DEFAULT.precedes(a, b)
}

pub fn compare(a: &ProbVector, b: &ProbVector) -> Result<Comparability> {
    Tolerance::DEFAULT.compare(a, b)
}

/// Kronecker product of two Schmidt vectors, re-sorted non-increasing.
pub fn kron(a: &ProbVector, b: &ProbVector) -> ProbVector {
    let mut entries = Vec::with_capacity(a.dim() * b.dim());
    for &x in &a.entries {
        entries.extend(b.entries.iter().map(|&y| x * y));
    }
    sort_descending(&mut entries);
    ProbVector { entries }
}

/// `v^{⊗k}`; `k = 0` gives the one-entry vector `(1)`.
pub fn kron_power(v: &ProbVector, k: usize) -> ProbVector {
    let mut acc = ProbVector { entries: vec![1.0] };
    for _ in 0..k {
        acc = kron(&acc, v);
    }
    acc
}

/// Appends zeros up to dimension `target`.
pub fn pad(v: &ProbVector, target: usize) -> Result<ProbVector> {
    if target < v.dim() {
        return Err(Error::TargetTooSmall {
            dim: v.dim(),
            target,
        });
    }
    let mut entries = v.entries.clone();
    entries.resize(target, 0.0);
    Ok(ProbVector { entries })
}

pub fn is_catalyst(catalyst: &ProbVector, a: &ProbVector, b: &ProbVector) -> Result<bool> {
    Tolerance::DEFAULT.is_catalyst(catalyst, a, b)
}

pub fn self_catalysis_order(a: &ProbVector, b: &ProbVector, k_max: usize) -> Result<Option<usize>> {
    Tolerance::DEFAULT.self_catalysis_order(a, b, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    fn example2() -> (ProbVector, ProbVector) {
        (pv(&[0.5, 0.25, 0.25, 0.0]), pv(&[0.4, 0.4, 0.1, 0.1]))
    }

    #[test]
    fn normalize_permutes_and_scales() {
        assert_close(
            normalize_and_sort(&[0.25, 0.5, 0.25]).unwrap().entries(),
            &[0.5, 0.25, 0.25],
        );
        assert_close(
            normalize_and_sort(&[2.0, 1.0, 1.0]).unwrap().entries(),
            &[0.5, 0.25, 0.25],
        );
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(matches!(normalize_and_sort(&[0.0, 0.0, 0.0]), Err(Error::AllZero)));
        assert!(matches!(
            normalize_and_sort(&[1.0, -0.5]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(normalize_and_sort(&[]), Err(Error::EmptyVector)));
    }

    #[test]
    fn new_validates_invariants() {
        assert!(ProbVector::new(vec![0.25, 0.75]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.4]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn prefix_sums_examples() {
        assert_close(&prefix_sums(&pv(&[0.5, 0.25, 0.25, 0.0])), &[0.5, 0.75, 1.0, 1.0]);
        assert_close(&prefix_sums(&ProbVector::product(3)), &[1.0, 1.0, 1.0]);
        assert_close(
            &prefix_sums(&ProbVector::uniform(3)),
            &[1.0 / 3.0, 2.0 / 3.0, 1.0],
        );
    }

    #[test]
    fn uniform_is_below_and_product_above() {
        let v = pv(&[0.5, 0.25, 0.25, 0.0]);
        assert!(precedes(&ProbVector::uniform(4), &v).unwrap());
        assert!(precedes(&v, &ProbVector::product(4)).unwrap());
        assert_eq!(
            compare(&ProbVector::uniform(4), &ProbVector::product(4)).unwrap(),
            Comparability::APrecedesB
        );
    }

    #[test]
    fn incomparable_pair() {
        let (a, b) = example2();
        assert!(!precedes(&a, &b).unwrap());
        assert!(!precedes(&b, &a).unwrap());
        assert_eq!(compare(&a, &b).unwrap(), Comparability::Incomparable);
        assert_eq!(compare(&a, &a).unwrap(), Comparability::Equivalent);
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let err = precedes(&ProbVector::uniform(3), &ProbVector::uniform(4)).unwrap_err();
        assert!(matches!(err, Error::DimMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn kron_products() {
        let (a, b) = example2();
        let c = pv(&[0.6, 0.4]);
        assert_close(
            kron(&a, &c).entries(),
            &[0.30, 0.20, 0.15, 0.15, 0.10, 0.10, 0.0, 0.0],
        );
        assert_close(
            kron(&b, &c).entries(),
            &[0.24, 0.24, 0.16, 0.16, 0.06, 0.06, 0.04, 0.04],
        );
        assert_eq!(kron(&a, &pv(&[1.0])), a);
        assert_eq!(kron_power(&c, 0), pv(&[1.0]));
        assert_eq!(kron_power(&c, 2).dim(), 4);
    }

    #[test]
    fn pad_appends_zeros() {
        let v = pv(&[0.95, 0.03, 0.02]);
        assert_close(pad(&v, 4).unwrap().entries(), &[0.95, 0.03, 0.02, 0.0]);
        assert_eq!(pad(&v, 3).unwrap(), v);
        assert_close(pad(&pv(&[1.0]), 3).unwrap().entries(), &[1.0, 0.0, 0.0]);
        assert!(matches!(pad(&v, 2), Err(Error::TargetTooSmall { dim: 3, target: 2 })));
    }

    #[test]
    fn catalysis_with_two_level_catalyst() {
        // The products give (b ⊗ c) ⪯ (a ⊗ c), so c catalyses b -> a.
        let (a, b) = example2();
        let c = pv(&[0.6, 0.4]);
        assert!(is_catalyst(&c, &b, &a).unwrap());
        assert!(!is_catalyst(&c, &a, &b).unwrap());
    }

    #[test]
    fn uniform_and_trivial_catalysts_do_nothing() {
        let (a, b) = example2();
        for k in 1..=4 {
            let u = ProbVector::uniform(k);
            assert!(!is_catalyst(&u, &a, &b).unwrap());
            assert!(!is_catalyst(&u, &b, &a).unwrap());
        }
    }

    #[test]
    fn self_catalysis_orders() {
        let beta = pv(&[0.950, 0.030, 0.020, 0.0]);
        let first = pv(&[0.900, 0.081, 0.010, 0.009]);
        assert_eq!(self_catalysis_order(&first, &beta, 8).unwrap(), Some(1));

        let second = pv(&[0.928, 0.060, 0.006, 0.006]);
        let beta3 = pad(&pv(&[0.950, 0.030, 0.020]), 4).unwrap();
        assert_eq!(self_catalysis_order(&second, &beta3, 8).unwrap(), Some(6));
        assert_eq!(self_catalysis_order(&second, &beta3, 5).unwrap(), None);
    }

    #[test]
    fn self_catalysis_absent_for_incomparable_example() {
        let (a, b) = example2();
        assert_eq!(self_catalysis_order(&a, &b, 4).unwrap(), None);
        assert_eq!(self_catalysis_order(&b, &a, 4).unwrap(), None);
    }

    #[test]
    fn self_catalysis_rejects_ordered_pairs() {
        let err = self_catalysis_order(&ProbVector::uniform(3), &ProbVector::product(3), 3)
            .unwrap_err();
        assert!(matches!(err, Error::NotIncomparable(_)));
    }

    #[test]
    fn loose_tolerance_breaks_self_catalysis_check() {
        let tol = Tolerance::new(1e-1).unwrap();
        let beta = pv(&[0.950, 0.030, 0.020, 0.0]);
        let first = pv(&[0.900, 0.081, 0.010, 0.009]);
        assert!(tol.self_catalysis_order(&first, &beta, 8).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let v = pv(&[0.5, 0.3, 0.2]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<ProbVector>(&s).unwrap(), v);
        assert!(serde_json::from_str::<ProbVector>("[0.2,0.8]").is_err());
    }
}
