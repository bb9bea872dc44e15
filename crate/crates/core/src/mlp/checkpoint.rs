//! JSON model checkpoints.
//!
//! Weights are stored row-major per layer. Floats use the shortest
//! representation that parses back to the same bits, so a reloaded model
//! produces identical outputs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::{Activation, Dense, MlpModel};
use super::optim::OptimizerKind;
use super::train::TrainConfig;
use crate::error::{Error, Result};

const FORMAT: &str = "entcat-mlp";
const VERSION: u32 = 1;

/// How a checkpointed model was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProvenance {
    pub init_seed: u64,
    pub optimizer: OptimizerKind,
    pub config: TrainConfig,
    pub dataset_dim: usize,
    pub dataset_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerRecord {
    fan_in: usize,
    fan_out: usize,
    activation: Activation,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    format: String,
    version: u32,
    input_dim: usize,
    layers: Vec<LayerRecord>,
    pub provenance: Option<TrainingProvenance>,
    pub checksum: String,
}

impl Checkpoint {
    pub fn from_model(model: &MlpModel, provenance: Option<TrainingProvenance>) -> Self {
        let layers = model
            .layers()
            .iter()
            .map(|l| {
                let spec = l.spec();
                LayerRecord {
                    fan_in: spec.fan_in,
                    fan_out: spec.fan_out,
                    activation: spec.activation,
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                }
            })
            .collect();
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            input_dim: model.input_dim(),
            layers,
            provenance,
            checksum: model.checksum(),
        }
    }

    pub fn to_model(&self) -> Result<MlpModel> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::MalformedCheckpoint(format!(
                "unsupported format {} v{}",
                self.format, self.version
            )));
        }
        let layers = self
            .layers
            .iter()
            .map(|r| {
                let weights = Array2::from_shape_vec((r.fan_out, r.fan_in), r.weights.clone())
                    .map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
                Ok(Dense {
                    weights,
                    bias: Array1::from_vec(r.bias.clone()),
                    activation: r.activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = MlpModel::from_layers(self.input_dim, layers)
            .map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
        if model.checksum() != self.checksum {
            return Err(Error::MalformedCheckpoint("checksum mismatch".into()));
        }
        Ok(model)
    }
}

pub fn save_checkpoint(
    model: &MlpModel,
    provenance: Option<TrainingProvenance>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &Checkpoint::from_model(model, provenance))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(MlpModel, Option<TrainingProvenance>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
    let model = ckpt.to_model()?;
    Ok((model, ckpt.provenance))
}
