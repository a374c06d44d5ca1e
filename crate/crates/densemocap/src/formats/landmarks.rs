//! Landmark set file.

use std::path::Path;

use densemocap_core::body::BodyModel;
use densemocap_core::landmarks::LandmarkSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{from_hex, landmark_hash, to_hex, topology_hash};
use crate::io::{check_version, read_json, write_json, FORMAT_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LandmarksFile {
    format_version: u32,
    model: String,
    topology_hash: String,
    landmark_hash: String,
    indices: Vec<usize>,
    /// Per-vertex sampling weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights_used: Option<Vec<f64>>,
}

pub fn write_landmarks(path: &Path, model: &BodyModel, set: &LandmarkSet) -> Result<()> {
    let f = LandmarksFile {
        format_version: FORMAT_VERSION,
        model: model.name().to_string(),
        topology_hash: to_hex(topology_hash(model)),
        landmark_hash: to_hex(landmark_hash(set)),
        indices: set.indices.clone(),
        weights_used: (!set.sampling_weights.is_empty()).then(|| set.sampling_weights.clone()),
    };
    write_json(path, &f)
}

/// Reads a landmark set and checks it belongs to `model`.
pub fn read_landmarks(path: &Path, model: &BodyModel) -> Result<LandmarkSet> {
    let f: LandmarksFile = read_json(path)?;
    check_version(path, f.format_version)?;
    let set = LandmarkSet { indices: f.indices, sampling_weights: f.weights_used.unwrap_or_default() };
    let stated = from_hex(&f.landmark_hash).ok_or_else(|| Error::parse(path, "malformed landmark_hash"))?;
    if stated != landmark_hash(&set) {
        return Err(Error::parse(path, "landmark_hash does not match the indices"));
    }
    if from_hex(&f.topology_hash) != Some(topology_hash(model)) {
        return Err(Error::Mismatch(format!(
            "{} was sampled on a different topology than model {:?}",
            path.display(),
            model.name()
        )));
    }
    set.validate(model.num_vertices()).map_err(|e| Error::parse(path, e))?;
    if !set.sampling_weights.is_empty() && set.sampling_weights.len() != model.num_vertices() {
        return Err(Error::parse(path, "weights_used must have one entry per vertex"));
    }
    Ok(set)
}
