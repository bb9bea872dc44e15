use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Widths of the two hidden layers of the default classifier.
pub const HIDDEN_WIDTHS: [usize; 2] = [200, 100];

/// Predictions are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Activation {
    Relu,
    Sigmoid,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Sigmoid => z.mapv_inplace(sigmoid),
        }
    }

    /// Multiplies `grad` by the derivative, expressed through the output `a`.
    fn backprop(self, grad: &mut Array2<f64>, a: &Array2<f64>) {
        match self {
            Activation::Relu => grad.zip_mut_with(a, |g, &y| {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }),
            Activation::Sigmoid => grad.zip_mut_with(a, |g, &y| *g *= y * (1.0 - y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    pub activation: Activation,
}

/// A fully connected layer computing `act(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// Shape `(fan_out, fan_in)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec {
            fan_in: self.weights.ncols(),
            fan_out: self.weights.nrows(),
            activation: self.activation,
        }
    }
}

/// Mean-over-batch gradients, one `(weights, bias)` pair per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    /// Flat views in the same order as [`MlpModel::params_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|(w, b)| {
                [
                    w.as_slice().expect("contiguous gradient"),
                    b.as_slice().expect("contiguous gradient"),
                ]
            })
            .collect()
    }
}

/// Dense feed-forward binary classifier with a single sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    input_dim: usize,
    layers: Vec<Dense>,
}

impl MlpModel {
    /// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero biases.
    pub fn new(input_dim: usize, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|s| {
                let limit = (6.0 / (s.fan_in + s.fan_out) as f64).sqrt();
                let weights = Array2::from_shape_simple_fn((s.fan_out, s.fan_in), || {
                    rng.random_range(-limit..limit)
                });
                Dense {
                    weights,
                    bias: Array1::zeros(s.fan_out),
                    activation: s.activation,
                }
            })
            .collect();
        Self::from_layers(input_dim, layers)
    }

    /// Validates that the layers chain and end in one sigmoid unit.
    pub fn from_layers(input_dim: usize, layers: Vec<Dense>) -> Result<Self> {
        if input_dim == 0 || layers.is_empty() {
            return Err(Error::InvalidArgument("empty network".into()));
        }
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            let spec = layer.spec();
            if spec.fan_in != width || layer.bias.len() != spec.fan_out || spec.fan_out == 0 {
                return Err(Error::InvalidArgument(format!(
                    "layer {i} has shape {}x{} with {} biases, expected fan_in {width}",
                    spec.fan_out,
                    spec.fan_in,
                    layer.bias.len()
                )));
            }
            width = spec.fan_out;
        }
        let last = layers.last().expect("non-empty").spec();
        if last.fan_out != 1 || last.activation != Activation::Sigmoid {
            return Err(Error::InvalidArgument(
                "output layer must be a single sigmoid unit".into(),
            ));
        }
        Ok(MlpModel { input_dim, layers })
    }

    /// `2·dim -> 200 relu -> 100 relu -> 1 sigmoid`, for concatenated pairs.
    pub fn build_default(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimTooSmall { dim, min: 2 });
        }
        let [h1, h2] = HIDDEN_WIDTHS;
        let specs = [
            LayerSpec {
                fan_in: 2 * dim,
                fan_out: h1,
                activation: Activation::Relu,
            },
            LayerSpec {
                fan_in: h1,
                fan_out: h2,
                activation: Activation::Relu,
            },
            LayerSpec {
                fan_in: h2,
                fan_out: 1,
                activation: Activation::Sigmoid,
            },
        ];
        Self::new(2 * dim, &specs, seed)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Mutable flat views: weights then bias, layer by layer.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weights.as_slice_mut().expect("contiguous weights"),
                    l.bias.as_slice_mut().expect("contiguous bias"),
                ]
            })
            .collect()
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect()
    }

    /// SHA-256 over the architecture and the bit patterns of every parameter.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.input_dim as u64).to_le_bytes());
        for l in &self.layers {
            let s = l.spec();
            h.update((s.fan_in as u64).to_le_bytes());
            h.update((s.fan_out as u64).to_le_bytes());
            h.update([s.activation as u8]);
            for x in l.weights.iter().chain(l.bias.iter()) {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.input_dim {
            return Err(Error::DimMismatch {
                left: width,
                right: self.input_dim,
            });
        }
        Ok(())
    }

    /// Activations of every layer for a `(batch, input_dim)` block.
    fn activations(&self, inputs: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let prev = acts.last().map_or(inputs, |a| a.view());
            let mut z = prev.dot(&layer.weights.t());
            z += &layer.bias;
            layer.activation.apply(&mut z);
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x.len())?;
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        let acts = self.activations(view);
        Ok(clamp_prob(acts.last().expect("non-empty")[[0, 0]]))
    }

    /// Outputs for each row of a `(batch, input_dim)` block.
    pub fn predict_batch(&self, inputs: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.check_width(inputs.ncols())?;
        let out = self.activations(inputs).pop().expect("non-empty");
        Ok(out.column(0).mapv(clamp_prob))
    }

    /// Mean binary cross-entropy gradient over the batch, plus the mean loss.
    ///
    /// The output delta uses the closed form `p - y` of sigmoid + cross-entropy.
    pub fn backward(&self, inputs: ArrayView2<f64>, labels: &[f64]) -> Result<(Gradients, f64)> {
        self.check_width(inputs.ncols())?;
        let batch = inputs.nrows();
        if batch == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != batch {
            return Err(Error::DimMismatch {
                left: labels.len(),
                right: batch,
            });
        }
        let acts = self.activations(inputs);
        let out = acts.last().expect("non-empty");
        let scale = 1.0 / batch as f64;

        let mut loss_sum = 0.0;
        let mut delta = Array2::zeros((batch, 1));
        for (i, &y) in labels.iter().enumerate() {
            let p = out[[i, 0]];
            loss_sum += loss(p, y);
            delta[[i, 0]] = (p - y) * scale;
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let prev = if k == 0 { inputs } else { acts[k - 1].view() };
            let dw = delta.t().dot(&prev);
            let db = delta.sum_axis(Axis(0));
            if k > 0 {
                let mut next = delta.dot(&self.layers[k].weights);
                self.layers[k - 1].activation.backprop(&mut next, &acts[k - 1]);
                delta = next;
            }
            grads.push((dw, db));
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, loss_sum * scale))
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Binary cross-entropy `-[y ln p + (1 - y) ln(1 - p)]` with `p` clamped.
pub fn loss(y_pred: f64, y_true: f64) -> f64 {
    let p = clamp_prob(y_pred);
    -(y_true * p.ln() + (1.0 - y_true) * (1.0 - p).ln())
}
