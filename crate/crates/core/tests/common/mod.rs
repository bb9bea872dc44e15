//! Independent oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

use entcat::majorization::ProbVector;
use entcat::mlp::{loss, Activation, LayerSpec, MlpModel};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

/// `a ⪯ b` straight from the definition: re-sort both copies descending and
/// compare the sums of the `k` largest entries for every `k`.
pub fn literal_precedes(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    b.sort_by(|x, y| y.partial_cmp(x).unwrap());
    (1..=a.len()).all(|k| {
        let sa: f64 = a[..k].iter().sum();
        let sb: f64 = b[..k].iter().sum();
        sa <= sb + EPS
    })
}

/// A random probability vector: normalized i.i.d. exponentials, sorted.
pub fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> ProbVector {
    let raw: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ProbVector::new(v).unwrap()
}

/// `t·v + (1 − t)·uniform`, which is majorized by `v` for `t` in `[0, 1]`.
pub fn toward_uniform(v: &ProbVector, t: f64) -> ProbVector {
    let u = 1.0 / v.dim() as f64;
    ProbVector::new(v.entries().iter().map(|x| t * x + (1.0 - t) * u).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn batch_loss(model: &MlpModel, x: &Array2<f64>, y: &[f64]) -> f64 {
    let total: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, &t)| loss(model.forward(row.as_slice().unwrap()).unwrap(), t))
        .sum();
    total / y.len() as f64
}

/// Largest relative difference between backpropagated gradients and central
/// finite differences with step `h`, on a 6→5→3→1 net with random weights and
/// biases and an 8-sample batch. Relative error is
/// `|g − f| / max(|g|, |f|, 1e-6)`.
pub fn gradient_check_error(seed: u64, h: f64) -> f64 {
    let specs = [
        LayerSpec { fan_in: 6, fan_out: 5, activation: Activation::Relu },
        LayerSpec { fan_in: 5, fan_out: 3, activation: Activation::Relu },
        LayerSpec { fan_in: 3, fan_out: 1, activation: Activation::Sigmoid },
    ];
    let mut model = MlpModel::new(6, &specs, seed).unwrap();
    let mut r = rng(seed ^ 0xabcdef);
    for p in model.params_mut() {
        for x in p.iter_mut() {
            *x = r.random_range(-1.0..1.0);
        }
    }
    let x = Array2::from_shape_fn((8, 6), |_| r.random_range(-1.0..1.0));
    let y: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
    let (grads, _) = model.backward(x.view(), &y).unwrap();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|g| g.to_vec()).collect();

    let mut worst = 0.0f64;
    for (t, g_t) in analytic.iter().enumerate() {
        for (i, &g) in g_t.iter().enumerate() {
            let orig = model.params_mut()[t][i];
            model.params_mut()[t][i] = orig + h;
            let up = batch_loss(&model, &x, &y);
            model.params_mut()[t][i] = orig - h;
            let down = batch_loss(&model, &x, &y);
            model.params_mut()[t][i] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}
