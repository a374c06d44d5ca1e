//! Fit configuration and held-out marker files.

use std::path::Path;

use densemocap_core::fit::FitConfig;
use densemocap_core::marker::MarkerSpec;
use densemocap_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{check_version, read_json, write_json, FORMAT_VERSION};

fn version() -> u32 {
    FORMAT_VERSION
}

/// Absent keys take their defaults.
#[derive(Debug, Serialize, Deserialize)]
struct FitConfigFile {
    #[serde(default = "version")]
    format_version: u32,
    #[serde(flatten)]
    config: FitConfig,
}

pub fn read_fit_config(path: &Path) -> Result<FitConfig> {
    let f: FitConfigFile = read_json(path)?;
    check_version(path, f.format_version)?;
    f.config.validate().map_err(|e| Error::parse(path, e))?;
    Ok(f.config)
}

pub fn write_fit_config(path: &Path, config: &FitConfig) -> Result<()> {
    write_json(path, &FitConfigFile { format_version: FORMAT_VERSION, config: config.clone() })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkersFile {
    format_version: u32,
    markers: Vec<MarkerEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkerEntry {
    vertex: usize,
    /// Offset in the vertex's local frame, meters.
    displacement: [f64; 3],
}

pub fn read_markers(path: &Path) -> Result<Vec<MarkerSpec>> {
    let f: MarkersFile = read_json(path)?;
    check_version(path, f.format_version)?;
    Ok(f.markers
        .iter()
        .map(|m| MarkerSpec { vertex: m.vertex, displacement: Vec3::from(m.displacement) })
        .collect())
}

pub fn write_markers(path: &Path, markers: &[MarkerSpec]) -> Result<()> {
    let markers = markers
        .iter()
        .map(|m| MarkerEntry {
            vertex: m.vertex,
            displacement: [m.displacement.x, m.displacement.y, m.displacement.z],
        })
        .collect();
    write_json(path, &MarkersFile { format_version: FORMAT_VERSION, markers })
}
