//! Versioned JSON model files.
//!
//! Output is canonical: object keys sorted, no whitespace, floats printed in
//! their shortest round-trip form. Saving a loaded model reproduces the file
//! byte for byte.
//!
//! ```text
//! {
//!   "bias": f64,
//!   "borders": [[f64, ...], ...],          // per feature, strictly increasing
//!   "format_version": 1,
//!   "metadata": null | {
//!     "diffusion_temperature": f64 | null, // null when infinite
//!     "iterations": u64,
//!     "learning_rate": f64,
//!     "loss": "sla" | "logloss" | "mse",
//!     "mode": "gb" | "sgb" | "sglb",
//!     "model_shrink_rate": f64,
//!     "seed": u64,
//!     "sla_sigma": f64 | null
//!   },
//!   "trees": [{"leaf_values": [f64; 2^depth], "splits": [[feature, border], ...]}],
//!   "weights": [f64, ...]                  // one per tree, shrinkage applied
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boosting::{Ensemble, TrainMetadata};
use crate::data::BorderSet;
use crate::losses::Loss;
use crate::trees::{ObliviousTree, Split};
use crate::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    bias: f64,
    borders: Vec<Vec<f64>>,
    format_version: u64,
    metadata: Option<MetadataRecord>,
    trees: Vec<TreeRecord>,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRecord {
    leaf_values: Vec<f64>,
    splits: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetadataRecord {
    diffusion_temperature: Option<f64>,
    iterations: usize,
    learning_rate: f64,
    loss: String,
    mode: String,
    model_shrink_rate: f64,
    seed: u64,
    sla_sigma: Option<f64>,
}

impl From<&TrainMetadata> for MetadataRecord {
    fn from(m: &TrainMetadata) -> Self {
        Self {
            diffusion_temperature: m
                .diffusion_temperature
                .is_finite()
                .then_some(m.diffusion_temperature),
            iterations: m.iterations,
            learning_rate: m.learning_rate,
            loss: m.loss.name().to_string(),
            mode: m.mode.name().to_string(),
            model_shrink_rate: m.model_shrink_rate,
            seed: m.seed,
            sla_sigma: match m.loss {
                Loss::Sla { sigma } => Some(sigma),
                _ => None,
            },
        }
    }
}

impl TryFrom<MetadataRecord> for TrainMetadata {
    type Error = Error;

    fn try_from(r: MetadataRecord) -> Result<Self> {
        let loss = match (r.loss.as_str(), r.sla_sigma) {
            ("sla", Some(sigma)) => Loss::sla(sigma)?,
            ("sla", None) => return Err(Error::InvalidModel("sla loss without sla_sigma".into())),
            (other, _) => other.parse()?,
        };
        Ok(Self {
            mode: r.mode.parse()?,
            loss,
            learning_rate: r.learning_rate,
            diffusion_temperature: r.diffusion_temperature.unwrap_or(f64::INFINITY),
            model_shrink_rate: r.model_shrink_rate,
            seed: r.seed,
            iterations: r.iterations,
        })
    }
}

/// Canonical JSON text of `e`.
pub fn to_json(e: &Ensemble) -> Result<String> {
    let file = ModelFile {
        bias: e.bias(),
        borders: e.borders().as_slices().to_vec(),
        format_version: FORMAT_VERSION,
        metadata: e.metadata().map(MetadataRecord::from),
        trees: e
            .trees()
            .iter()
            .map(|t| TreeRecord {
                leaf_values: t.leaf_values().to_vec(),
                splits: t.splits().iter().map(|s| (s.feature, s.border)).collect(),
            })
            .collect(),
        weights: e.weights(),
    };
    // Value maps are ordered by key
    let value = serde_json::to_value(&file)?;
    Ok(serde_json::to_string(&value)?)
}

pub fn from_json(text: &str) -> Result<Ensemble> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::InvalidModel("missing format_version".into()))?;
    match version.as_u64() {
        Some(FORMAT_VERSION) => {}
        Some(found) => {
            return Err(Error::VersionMismatch {
                found,
                expected: FORMAT_VERSION,
            })
        }
        None => return Err(Error::InvalidModel(format!("bad format_version {version}"))),
    }
    let file: ModelFile = serde_json::from_value(value)?;
    let borders = BorderSet::new(file.borders)?;
    let trees = file
        .trees
        .into_iter()
        .map(|t| {
            let splits = t
                .splits
                .into_iter()
                .map(|(feature, border)| Split { feature, border })
                .collect();
            ObliviousTree::new(splits, t.leaf_values)
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = file.metadata.map(TrainMetadata::try_from).transpose()?;
    Ensemble::from_parts(borders, trees, file.weights, file.bias, metadata)
}

pub fn save_model(e: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(e)?).map_err(|err| Error::io(path, err))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    from_json(&text)
}
