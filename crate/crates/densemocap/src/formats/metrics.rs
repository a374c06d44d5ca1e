//! Metrics report (millimeters) and its per-frame series.

use std::collections::BTreeMap;
use std::path::Path;

use densemocap_core::metrics::MetricsReport;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{check_version, parse_line, read_json, read_lines, write_json, LinesWriter, FORMAT_VERSION};

const MM: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartLine {
    pub mpjpe_mm: f64,
    pub pve_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    pub format_version: u32,
    pub mpjpe_mm: f64,
    pub pve_mm: f64,
    pub per_part: BTreeMap<String, PartLine>,
    pub heldout_marker_mm: Option<f64>,
    pub miou: Option<f64>,
    pub num_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameLine {
    pub frame: usize,
    pub mpjpe_mm: f64,
    pub pve_mm: f64,
    pub heldout_marker_mm: Option<f64>,
    pub miou: Option<f64>,
}

impl MetricsFile {
    pub fn new(r: &MetricsReport) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            mpjpe_mm: r.mpjpe * MM,
            pve_mm: r.pve * MM,
            per_part: r
                .per_part
                .iter()
                .map(|p| (p.part.as_str().to_string(), PartLine { mpjpe_mm: p.mpjpe * MM, pve_mm: p.pve * MM }))
                .collect(),
            heldout_marker_mm: r.heldout_marker.map(|m| m * MM),
            miou: r.miou,
            num_frames: r.per_frame.len(),
        }
    }
}

pub fn frame_lines(r: &MetricsReport) -> Vec<FrameLine> {
    r.per_frame
        .iter()
        .map(|f| FrameLine {
            frame: f.frame,
            mpjpe_mm: f.mpjpe * MM,
            pve_mm: f.pve * MM,
            heldout_marker_mm: f.heldout_marker.map(|m| m * MM),
            miou: f.miou,
        })
        .collect()
}

pub fn write_metrics(path: &Path, m: &MetricsFile) -> Result<()> {
    write_json(path, m)
}

pub fn read_metrics(path: &Path) -> Result<MetricsFile> {
    let m: MetricsFile = read_json(path)?;
    check_version(path, m.format_version)?;
    Ok(m)
}

pub fn write_frame_metrics(path: &Path, lines: &[FrameLine]) -> Result<()> {
    let mut w = LinesWriter::create(path)?;
    for l in lines {
        w.line(l)?;
    }
    w.finish()
}

pub fn read_frame_metrics(path: &Path) -> Result<Vec<FrameLine>> {
    read_lines(path)?.iter().map(|(n, l)| parse_line(path, *n, l)).collect()
}
