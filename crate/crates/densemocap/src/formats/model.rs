//! Body model asset: dense row-major arrays.

use std::path::Path;

use densemocap_core::body::{BodyModel, BodyModelParts, Part};
use densemocap_core::toy::stick_body;
use densemocap_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{check_version, read_json, write_json, FORMAT_VERSION};

/// Model source naming the built-in toy body.
pub const BUILTIN_TOY: &str = "builtin:toy";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    name: String,
    num_vertices: usize,
    num_joints: usize,
    num_betas: usize,
    /// −1 marks the root.
    parents: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    joint_names: Vec<String>,
    /// V × 3
    template: Vec<f64>,
    /// F × 3
    faces: Vec<usize>,
    /// K × V
    joint_regressor: Vec<f64>,
    /// V × K
    skinning_weights: Vec<f64>,
    /// B × V × 3
    shape_dirs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    part_labels: Option<Vec<String>>,
}

fn flatten(points: &[Vec3]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

fn points(path: &Path, what: &str, data: &[f64], n: usize) -> Result<Vec<Vec3>> {
    if data.len() != 3 * n {
        return Err(Error::parse(path, format!("{what}: expected {} numbers, got {}", 3 * n, data.len())));
    }
    Ok(data.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
}

fn rows(path: &Path, what: &str, data: &[f64], r: usize, c: usize) -> Result<Vec<Vec<f64>>> {
    if data.len() != r * c {
        return Err(Error::parse(path, format!("{what}: expected {r}×{c} numbers, got {}", data.len())));
    }
    Ok(if c == 0 { vec![Vec::new(); r] } else { data.chunks_exact(c).map(<[f64]>::to_vec).collect() })
}

fn to_file(model: &BodyModel) -> ModelFile {
    let (k, v) = (model.num_joints(), model.num_vertices());
    let jr = model.joint_regressor();
    let sw = model.skinning_weights();
    ModelFile {
        format_version: FORMAT_VERSION,
        name: model.name().to_string(),
        num_vertices: v,
        num_joints: k,
        num_betas: model.num_betas(),
        parents: model.parents().iter().map(|p| p.map_or(-1, |p| p as i64)).collect(),
        joint_names: model.joint_names().to_vec(),
        template: flatten(model.template()),
        faces: model.faces().iter().flatten().copied().collect(),
        joint_regressor: (0..k).flat_map(|r| (0..v).map(move |c| jr[(r, c)])).collect(),
        skinning_weights: (0..v).flat_map(|r| (0..k).map(move |c| sw[(r, c)])).collect(),
        shape_dirs: model.shape_dirs().iter().flat_map(|d| flatten(d)).collect(),
        part_labels: model.part_labels().map(|l| l.iter().map(|p| p.as_str().to_string()).collect()),
    }
}

fn from_file(path: &Path, f: ModelFile) -> Result<BodyModel> {
    check_version(path, f.format_version)?;
    let (k, v, b) = (f.num_joints, f.num_vertices, f.num_betas);
    if f.parents.len() != k {
        return Err(Error::parse(path, format!("parents: expected {k} entries, got {}", f.parents.len())));
    }
    let parents = f
        .parents
        .iter()
        .map(|&p| match p {
            -1 => Ok(None),
            p if p >= 0 => Ok(Some(p as usize)),
            p => Err(Error::parse(path, format!("invalid parent {p}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if f.faces.len() % 3 != 0 {
        return Err(Error::parse(path, "faces: length is not a multiple of 3"));
    }
    let shape = rows(path, "shape_dirs", &f.shape_dirs, b, 3 * v)?;
    let part_labels = match f.part_labels {
        Some(labels) => Some(
            labels
                .iter()
                .map(|s| Part::parse(s).ok_or_else(|| Error::parse(path, format!("unknown part label {s:?}"))))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let parts = BodyModelParts {
        name: f.name,
        parents,
        joint_names: f.joint_names,
        template: points(path, "template", &f.template, v)?,
        faces: f.faces.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        joint_regressor: rows(path, "joint_regressor", &f.joint_regressor, k, v)?,
        skinning_weights: rows(path, "skinning_weights", &f.skinning_weights, v, k)?,
        shape_dirs: shape.iter().map(|d| points(path, "shape_dirs", d, v)).collect::<Result<_>>()?,
        part_labels,
    };
    BodyModel::new(parts).map_err(|e| Error::parse(path, e))
}

pub fn write_model(path: &Path, model: &BodyModel) -> Result<()> {
    write_json(path, &to_file(model))
}

pub fn read_model(path: &Path) -> Result<BodyModel> {
    let f: ModelFile = read_json(path)?;
    from_file(path, f)
}

/// `builtin:toy` or a model file path (relative paths against `base`).
pub fn load_model(source: &str, base: &Path) -> Result<BodyModel> {
    if source == BUILTIN_TOY {
        Ok(stick_body())
    } else {
        read_model(&base.join(source))
    }
}
