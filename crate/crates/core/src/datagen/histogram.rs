//! Entry histograms over `[0, 1]`, used to show where sampled mass concentrates.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` equally spaced edges from 0 to 1.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Histogram of `values` over `bins` equal-width bins of `[0, 1]`.
    ///
    /// Values are clamped into range; `1.0` lands in the last bin.
    pub fn from_values(values: impl IntoIterator<Item = f64>, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        let mut counts = vec![0u64; bins];
        for x in values {
            let idx = ((x.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        Ok(Histogram { bin_edges, counts })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the most populated bin (first one on ties).
    pub fn modal_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("bin_left_edge,count\n");
        for (edge, count) in self.bin_edges.iter().zip(&self.counts) {
            let _ = writeln!(out, "{edge},{count}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Histogram over every entry of both vector columns.
pub fn entry_histogram(ds: &Dataset, bins: usize) -> Result<Histogram> {
    Histogram::from_values(
        ds.rows
            .iter()
            .flat_map(|r| r.alpha.entries().iter().chain(r.beta.entries()).copied()),
        bins,
    )
}

/// Mean and median of a sample, for the right-skew check.
pub fn mean_and_median(values: &mut [f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Some((mean, median))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_dataset, DatasetRow, SamplingMode};
    use crate::majorization::ProbVector;

    #[test]
    fn product_vectors_fill_the_end_bins() {
        let row = DatasetRow::labelled(ProbVector::product(3), ProbVector::product(3)).unwrap();
        let ds = Dataset::new(3, vec![row; 5], 0, SamplingMode::Paired).unwrap();
        let h = entry_histogram(&ds, 10).unwrap();
        assert_eq!(h.counts[0], 20);
        assert_eq!(h.counts[9], 10);
        assert_eq!(h.total(), 30);
    }

    #[test]
    fn two_bins_conserve_mass() {
        let ds = generate_dataset(4, 100, SamplingMode::Paired, 2).unwrap();
        let h = entry_histogram(&ds, 2).unwrap();
        assert_eq!(h.counts.len(), 2);
        assert_eq!(h.total(), 2 * 100 * 4);
        assert_eq!(h.bin_edges, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_single_bin() {
        assert!(Histogram::from_values([0.5], 1).is_err());
    }

    #[test]
    fn csv_has_two_columns() {
        let h = Histogram::from_values([0.1, 0.9, 0.95], 2).unwrap();
        assert_eq!(h.to_csv_string(), "bin_left_edge,count\n0,1\n0.5,2\n");
    }

    #[test]
    fn median_of_even_sample() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(mean_and_median(&mut v), Some((2.5, 2.5)));
        assert_eq!(mean_and_median(&mut []), None);
    }
}
