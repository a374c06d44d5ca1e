//! Camera calibration file.

use std::path::Path;

use densemocap_core::camera::{Camera, Rig};
use densemocap_core::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{check_version, read_json, write_json, FORMAT_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    format_version: u32,
    name: String,
    cameras: Vec<CameraEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraEntry {
    name: String,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    /// Row-major world-to-camera rotation.
    rotation: [f64; 9],
    translation: [f64; 3],
    width: u32,
    height: u32,
}

pub fn write_calibration(path: &Path, rig: &Rig) -> Result<()> {
    let cameras = rig
        .cameras
        .iter()
        .zip(&rig.names)
        .map(|(c, name)| {
            let r = &c.rotation;
            CameraEntry {
                name: name.clone(),
                fx: c.fx,
                fy: c.fy,
                cx: c.cx,
                cy: c.cy,
                rotation: std::array::from_fn(|i| r[(i / 3, i % 3)]),
                translation: [c.translation.x, c.translation.y, c.translation.z],
                width: c.width,
                height: c.height,
            }
        })
        .collect();
    write_json(path, &CalibrationFile { format_version: FORMAT_VERSION, name: rig.name.clone(), cameras })
}

pub fn read_calibration(path: &Path) -> Result<Rig> {
    let f: CalibrationFile = read_json(path)?;
    check_version(path, f.format_version)?;
    let names = f.cameras.iter().map(|c| c.name.clone()).collect();
    let cameras = f
        .cameras
        .iter()
        .map(|c| Camera {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            rotation: Mat3::from_row_slice(&c.rotation),
            translation: Vec3::from(c.translation),
            width: c.width,
            height: c.height,
        })
        .collect();
    Rig::new(f.name, cameras, names).map_err(|e| Error::parse(path, e))
}
