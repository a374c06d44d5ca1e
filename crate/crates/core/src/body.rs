//! Articulated body: shape blending, forward kinematics and linear blend
//! skinning.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::geom::{rodrigues, Mat3, Vec3};

/// Tolerance for row sums of the skinning weights and the joint regressor.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Body,
    LeftHand,
    RightHand,
    Head,
    LeftFoot,
    RightFoot,
}

impl Part {
    pub const ALL: [Part; 6] = [
        Part::Body,
        Part::LeftHand,
        Part::RightHand,
        Part::Head,
        Part::LeftFoot,
        Part::RightFoot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Part::Body => "body",
            Part::LeftHand => "left_hand",
            Part::RightHand => "right_hand",
            Part::Head => "head",
            Part::LeftFoot => "left_foot",
            Part::RightFoot => "right_foot",
        }
    }

    pub fn parse(s: &str) -> Option<Part> {
        Part::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

/// An immutable linear-blend-skinned body model.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel {
    name: String,
    parents: Vec<Option<usize>>,
    joint_names: Vec<String>,
    template: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    /// K × V
    joint_regressor: DMatrix<f64>,
    /// V × K
    skinning_weights: DMatrix<f64>,
    /// B × V
    shape_dirs: Vec<Vec<Vec3>>,
    part_labels: Option<Vec<Part>>,
}

/// Everything needed to build a [`BodyModel`]. Validated by
/// [`BodyModel::new`].
#[derive(Debug, Clone, Default)]
pub struct BodyModelParts {
    pub name: String,
    pub parents: Vec<Option<usize>>,
    pub joint_names: Vec<String>,
    pub template: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub joint_regressor: Vec<Vec<f64>>,
    pub skinning_weights: Vec<Vec<f64>>,
    pub shape_dirs: Vec<Vec<Vec3>>,
    pub part_labels: Option<Vec<Part>>,
}

fn check_stochastic_rows(rows: &[Vec<f64>], cols: usize, what: &str) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidModel(format!(
                "{what} row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some(w) = row.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "{what} row {i} has invalid entry {w}"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "{what} row {i} sums to {sum}"
            )));
        }
    }
    Ok(())
}

impl BodyModel {
    pub fn new(parts: BodyModelParts) -> Result<Self> {
        let k = parts.parents.len();
        let v = parts.template.len();
        if k == 0 {
            return Err(Error::InvalidModel("model has no joints".to_string()));
        }
        if parts.parents[0].is_some() {
            return Err(Error::InvalidModel("joint 0 must be the root".to_string()));
        }
        for (j, p) in parts.parents.iter().enumerate().skip(1) {
            match p {
                Some(p) if *p < j => {}
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "joint {j} has parent {p:?}; parents must precede children"
                    )))
                }
            }
        }
        let joint_names = if parts.joint_names.is_empty() {
            (0..k).map(|j| format!("joint_{j}")).collect()
        } else {
            check_len("joint_names", k, parts.joint_names.len())?;
            parts.joint_names
        };
        if parts.template.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidModel("non-finite template vertex".to_string()));
        }
        for (f, face) in parts.faces.iter().enumerate() {
            if face.iter().any(|&i| i >= v) {
                return Err(Error::InvalidModel(format!("face {f} indexes past {v} vertices")));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::InvalidModel(format!("face {f} is degenerate")));
            }
        }
        check_len("joint_regressor rows", k, parts.joint_regressor.len())?;
        check_stochastic_rows(&parts.joint_regressor, v, "joint_regressor")?;
        check_len("skinning_weights rows", v, parts.skinning_weights.len())?;
        check_stochastic_rows(&parts.skinning_weights, k, "skinning_weights")?;
        for (b, dir) in parts.shape_dirs.iter().enumerate() {
            if dir.len() != v {
                return Err(Error::InvalidModel(format!(
                    "shape direction {b} has {} vertices, expected {v}",
                    dir.len()
                )));
            }
        }
        if let Some(labels) = &parts.part_labels {
            check_len("part_labels", v, labels.len())?;
        }
        let joint_regressor =
            DMatrix::from_fn(k, v, |r, c| parts.joint_regressor[r][c]);
        let skinning_weights =
            DMatrix::from_fn(v, k, |r, c| parts.skinning_weights[r][c]);
        Ok(Self {
            name: parts.name,
            parents: parts.parents,
            joint_names,
            template: parts.template,
            faces: parts.faces,
            joint_regressor,
            skinning_weights,
            shape_dirs: parts.shape_dirs,
            part_labels: parts.part_labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_joints(&self) -> usize {
        self.parents.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.template.len()
    }

    pub fn num_betas(&self) -> usize {
        self.shape_dirs.len()
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    pub fn template(&self) -> &[Vec3] {
        &self.template
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn joint_regressor(&self) -> &DMatrix<f64> {
        &self.joint_regressor
    }

    pub fn skinning_weights(&self) -> &DMatrix<f64> {
        &self.skinning_weights
    }

    pub fn shape_dirs(&self) -> &[Vec<Vec3>] {
        &self.shape_dirs
    }

    pub fn part_labels(&self) -> Option<&[Part]> {
        self.part_labels.as_deref()
    }

    /// Part label per joint: the most frequent label among the vertices whose
    /// dominant skinning weight belongs to that joint (`Body` when unlabeled).
    pub fn joint_parts(&self) -> Vec<Part> {
        let k = self.num_joints();
        let Some(labels) = &self.part_labels else {
            return vec![Part::Body; k];
        };
        let mut counts = vec![[0usize; 6]; k];
        for (vi, label) in labels.iter().enumerate() {
            let row = self.skinning_weights.row(vi);
            let j = row.iter().enumerate().fold(0, |best, (j, w)| {
                if *w > row[best] {
                    j
                } else {
                    best
                }
            });
            let slot = Part::ALL.iter().position(|p| p == label).unwrap_or(0);
            counts[j][slot] += 1;
        }
        counts
            .iter()
            .map(|c| {
                let best = (0..6).fold(0, |b, i| if c[i] > c[b] { i } else { b });
                Part::ALL[best]
            })
            .collect()
    }

    /// Template plus shape offsets, and the regressed rest joints.
    pub fn shape_blend(&self, betas: &[f64]) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
        check_len("betas", self.num_betas(), betas.len())?;
        let mut verts = self.template.clone();
        for (beta, dir) in betas.iter().zip(&self.shape_dirs) {
            if *beta != 0.0 {
                for (v, d) in verts.iter_mut().zip(dir) {
                    *v += d * *beta;
                }
            }
        }
        let joints = self.regress_joints(&verts);
        Ok((verts, joints))
    }

    pub fn regress_joints(&self, verts: &[Vec3]) -> Vec<Vec3> {
        (0..self.num_joints())
            .map(|j| {
                let row = self.joint_regressor.row(j);
                let mut acc = Vec3::zeros();
                for (w, v) in row.iter().zip(verts) {
                    if *w != 0.0 {
                        acc += v * *w;
                    }
                }
                acc
            })
            .collect()
    }

    /// World-space rigid transforms of every joint for the given pose, relative
    /// to the rest configuration.
    pub fn joint_transforms(&self, rest_joints: &[Vec3], pose: &[Vec3]) -> Vec<RigidTransform> {
        let local: Vec<Mat3> = pose.iter().map(rodrigues).collect();
        chain_transforms(&self.parents, rest_joints, &local)
    }

    pub fn lbs_forward(&self, params: &BodyParams) -> Result<PosedBody> {
        params.validate(self)?;
        let (shaped, rest_joints) = self.shape_blend(&params.betas)?;
        let transforms = self.joint_transforms(&rest_joints, &params.pose);
        let vertices = shaped
            .iter()
            .enumerate()
            .map(|(vi, v)| {
                skin_vertex(v, self.skinning_weights.row(vi).iter().copied(), &transforms)
                    + params.translation
            })
            .collect();
        let joints = rest_joints
            .iter()
            .zip(&transforms)
            .map(|(j, tr)| tr.apply(j) + params.translation)
            .collect();
        Ok(PosedBody { vertices, joints })
    }
}

/// `x ↦ rotation · x + offset`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub offset: Vec3,
}

impl RigidTransform {
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.offset
    }
}

/// Compose local joint rotations about their rest joint centers down the
/// kinematic tree. At zero pose every transform is exactly the identity.
pub(crate) fn chain_transforms(
    parents: &[Option<usize>],
    rest_joints: &[Vec3],
    local: &[Mat3],
) -> Vec<RigidTransform> {
    let mut out: Vec<RigidTransform> = Vec::with_capacity(parents.len());
    for (j, parent) in parents.iter().enumerate() {
        let pivot = rest_joints[j] - local[j] * rest_joints[j];
        let tr = match parent {
            None => RigidTransform {
                rotation: local[j],
                offset: pivot,
            },
            Some(p) => {
                let pt = out[*p];
                RigidTransform {
                    rotation: pt.rotation * local[j],
                    offset: pt.rotation * pivot + pt.offset,
                }
            }
        };
        out.push(tr);
    }
    out
}

/// Blend joint transforms for one vertex, written as a correction to the
/// rest position so the rest pose is reproduced bit for bit.
pub(crate) fn skin_vertex(
    rest: &Vec3,
    weights: impl Iterator<Item = f64>,
    transforms: &[RigidTransform],
) -> Vec3 {
    let mut v = *rest;
    for (w, tr) in weights.zip(transforms) {
        if w != 0.0 {
            v += ((tr.rotation - Mat3::identity()) * rest + tr.offset) * w;
        }
    }
    v
}

/// Shape, per-joint axis-angle pose and root translation.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyParams {
    pub betas: Vec<f64>,
    pub pose: Vec<Vec3>,
    pub translation: Vec3,
}

impl BodyParams {
    pub fn zeros(num_joints: usize, num_betas: usize) -> Self {
        Self {
            betas: vec![0.0; num_betas],
            pose: vec![Vec3::zeros(); num_joints],
            translation: Vec3::zeros(),
        }
    }

    pub fn for_model(model: &BodyModel) -> Self {
        Self::zeros(model.num_joints(), model.num_betas())
    }

    pub fn validate(&self, model: &BodyModel) -> Result<()> {
        check_len("betas", model.num_betas(), self.betas.len())?;
        check_len("pose", model.num_joints(), self.pose.len())?;
        let finite = self.betas.iter().all(|b| b.is_finite())
            && self.pose.iter().all(|p| p.iter().all(|c| c.is_finite()))
            && self.translation.iter().all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".to_string()));
        }
        Ok(())
    }

    /// Packed layout: `[t(3), root θ(3), θ_1..θ_{K-1} (3 each), β(B)]`.
    pub fn pack(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 + 3 * self.pose.len() + self.betas.len());
        x.extend_from_slice(self.translation.as_slice());
        for p in &self.pose {
            x.extend_from_slice(p.as_slice());
        }
        x.extend_from_slice(&self.betas);
        x
    }

    pub fn unpack(x: &[f64], num_joints: usize, num_betas: usize) -> Result<Self> {
        check_len("packed parameters", packed_len(num_joints, num_betas), x.len())?;
        let translation = Vec3::new(x[0], x[1], x[2]);
        let pose = (0..num_joints)
            .map(|j| Vec3::new(x[3 + 3 * j], x[4 + 3 * j], x[5 + 3 * j]))
            .collect();
        let betas = x[3 + 3 * num_joints..].to_vec();
        Ok(Self {
            betas,
            pose,
            translation,
        })
    }
}

pub fn packed_len(num_joints: usize, num_betas: usize) -> usize {
    3 + 3 * num_joints + num_betas
}

/// Posed mesh vertices and joint positions in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PosedBody {
    pub vertices: Vec<Vec3>,
    pub joints: Vec<Vec3>,
}

impl PosedBody {
    pub fn transformed(&self, rotation: &Mat3, translation: &Vec3) -> PosedBody {
        PosedBody {
            vertices: self.vertices.iter().map(|v| rotation * v + translation).collect(),
            joints: self.joints.iter().map(|v| rotation * v + translation).collect(),
        }
    }
}
