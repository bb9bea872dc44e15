use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datagen::{Dataset, DatasetRow};
use crate::error::{Error, Result};

/// Supervised samples: one input row per label, labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub inputs: Array2<f64>,
    pub labels: Vec<f64>,
}

impl Samples {
    pub fn new(inputs: Array2<f64>, labels: Vec<f64>) -> Result<Self> {
        if inputs.nrows() != labels.len() {
            return Err(Error::DimMismatch {
                left: inputs.nrows(),
                right: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Samples { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn input(&self, i: usize) -> ArrayView1<'_, f64> {
        self.inputs.row(i)
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().sum::<f64>() / self.len() as f64
    }

    /// The samples at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Samples {
        Samples {
            inputs: self.inputs.select(Axis(0), idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

fn concat(first: &[f64], second: &[f64]) -> Vec<f64> {
    first.iter().chain(second).copied().collect()
}

/// `(alpha ++ beta, maj_ab)` and `(beta ++ alpha, maj_ba)`.
pub fn encode_row(row: &DatasetRow) -> [(Vec<f64>, f64); 2] {
    let a = row.alpha.entries();
    let b = row.beta.entries();
    [
        (concat(a, b), f64::from(u8::from(row.maj_ab))),
        (concat(b, a), f64::from(u8::from(row.maj_ba))),
    ]
}

/// Two samples per row, in row order.
pub fn encode_rows<'a>(rows: impl IntoIterator<Item = &'a DatasetRow>, dim: usize) -> Samples {
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for row in rows {
        for (x, y) in encode_row(row) {
            flat.extend(x);
            labels.push(y);
        }
    }
    let inputs = Array2::from_shape_vec((labels.len(), 2 * dim), flat)
        .expect("rows share the dataset dimension");
    Samples { inputs, labels }
}

pub fn encode_dataset(ds: &Dataset) -> Samples {
    encode_rows(&ds.rows, ds.dim)
}

/// Subsamples the majority class down to the size of the minority class.
///
/// Sample order after balancing is the original order of the kept samples.
pub fn balance(samples: &Samples, seed: u64) -> Samples {
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
        (0..samples.len()).partition(|&i| samples.labels[i] == 1.0);
    let keep = pos.len().min(neg.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let majority = if pos.len() > keep { &mut pos } else { &mut neg };
    majority.shuffle(&mut rng);
    majority.truncate(keep);
    let mut idx: Vec<usize> = pos.into_iter().chain(neg).collect();
    idx.sort_unstable();
    samples.select(&idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_dataset, SamplingMode};
    use crate::majorization::ProbVector;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn incomparable_row_gives_two_negatives() {
        let row =
            DatasetRow::labelled(pv(&[0.5, 0.25, 0.25, 0.0]), pv(&[0.4, 0.4, 0.1, 0.1])).unwrap();
        let [(x1, y1), (x2, y2)] = encode_row(&row);
        assert_eq!((y1, y2), (0.0, 0.0));
        assert_eq!(x1.len(), 8);
        assert_eq!(&x1[..4], &x2[4..]);
    }

    #[test]
    fn ordered_and_reflexive_rows() {
        let row = DatasetRow::labelled(ProbVector::uniform(4), ProbVector::product(4)).unwrap();
        let [(_, y1), (_, y2)] = encode_row(&row);
        assert_eq!((y1, y2), (1.0, 0.0));
        let v = pv(&[0.6, 0.3, 0.1]);
        let row = DatasetRow::labelled(v.clone(), v).unwrap();
        let [(_, y1), (_, y2)] = encode_row(&row);
        assert_eq!((y1, y2), (1.0, 1.0));
    }

    #[test]
    fn dataset_encoding_doubles_rows() {
        let ds = generate_dataset(3, 20, SamplingMode::Paired, 0).unwrap();
        let s = encode_dataset(&ds);
        assert_eq!(s.len(), 40);
        assert_eq!(s.width(), 6);
        assert_eq!(s.input(1).to_vec(), encode_row(&ds.rows[0])[1].0);
    }

    #[test]
    fn balancing_equalizes_classes() {
        let ds = generate_dataset(5, 500, SamplingMode::Paired, 2).unwrap();
        let s = encode_dataset(&ds);
        let b = balance(&s, 1);
        let pos = b.labels.iter().filter(|&&y| y == 1.0).count();
        assert_eq!(2 * pos, b.len());
        assert!(pos > 0);
        assert_eq!(b, balance(&s, 1));
    }

    #[test]
    fn samples_validate_labels() {
        assert!(Samples::new(Array2::zeros((2, 3)), vec![0.0, 0.5]).is_err());
        assert!(Samples::new(Array2::zeros((2, 3)), vec![0.0]).is_err());
    }
}
