//! Fitting energy for one person in one frame, with its analytic gradient.
//!
//! ```text
//! E       = E_ldmks + E_shape + E_pose + E_temp
//! E_ldmks = 1/C Σ_c Σ_l p · ρ(‖μ − Π(v_l, Q_c)‖ / σ)     (p ≥ p_min only)
//! E_shape = λ_shape ‖β‖²
//! E_pose  = λ_pose Σ_{j>0} ‖θ_j‖²
//! E_temp  = λ_temp Σ_j angle(R(θ_j^prev)ᵀ R(θ_j))²
//! ```
//!
//! The gradient is taken with respect to the packed parameter vector
//! `[t, θ_0, θ_1, …, θ_{K-1}, β]` (see [`BodyParams::pack`]). It is computed
//! by reverse accumulation through projection, skinning, the kinematic chain
//! and the shape blend.

use alloc::vec;
use alloc::vec::Vec;

use crate::body::{chain_transforms, packed_len, BodyModel, BodyParams};
use crate::camera::Rig;
use crate::error::{check_len, Error, Result};
use crate::geom::{rodrigues, rodrigues_backprop, rodrigues_with_jacobian, squared_angle_with_gradient, Mat3, Vec3};
use crate::landmarks::LandmarkSet;
use crate::observe::PersonObservations;
use crate::robust::RobustEstimator;

/// The body restricted to its landmark vertices, with the joint regressor
/// folded into per-joint shape directions.
#[derive(Debug, Clone)]
pub struct LandmarkBody {
    parents: Vec<Option<usize>>,
    template: Vec<Vec3>,
    /// B × N
    shape_dirs: Vec<Vec<Vec3>>,
    skin: Vec<Vec<(usize, f64)>>,
    rest_joints: Vec<Vec3>,
    /// B × K
    joint_shape_dirs: Vec<Vec<Vec3>>,
}

impl LandmarkBody {
    pub fn new(model: &BodyModel, landmarks: &LandmarkSet) -> Result<Self> {
        landmarks.validate(model.num_vertices())?;
        let idx = &landmarks.indices;
        let sw = model.skinning_weights();
        Ok(Self {
            parents: model.parents().to_vec(),
            template: idx.iter().map(|&i| model.template()[i]).collect(),
            shape_dirs: model
                .shape_dirs()
                .iter()
                .map(|d| idx.iter().map(|&i| d[i]).collect())
                .collect(),
            skin: idx
                .iter()
                .map(|&i| {
                    (0..model.num_joints())
                        .filter_map(|j| {
                            let w = sw[(i, j)];
                            (w != 0.0).then_some((j, w))
                        })
                        .collect()
                })
                .collect(),
            rest_joints: model.regress_joints(model.template()),
            joint_shape_dirs: model
                .shape_dirs()
                .iter()
                .map(|d| model.regress_joints(d))
                .collect(),
        })
    }

    pub fn num_joints(&self) -> usize {
        self.parents.len()
    }

    pub fn num_betas(&self) -> usize {
        self.shape_dirs.len()
    }

    pub fn num_landmarks(&self) -> usize {
        self.template.len()
    }

    pub fn packed_len(&self) -> usize {
        packed_len(self.num_joints(), self.num_betas())
    }

    fn shaped(&self, betas: &[f64]) -> (Vec<Vec3>, Vec<Vec3>) {
        let mut verts = self.template.clone();
        let mut joints = self.rest_joints.clone();
        for (b, beta) in betas.iter().enumerate() {
            if *beta == 0.0 {
                continue;
            }
            for (v, d) in verts.iter_mut().zip(&self.shape_dirs[b]) {
                *v += d * *beta;
            }
            for (j, d) in joints.iter_mut().zip(&self.joint_shape_dirs[b]) {
                *j += d * *beta;
            }
        }
        (verts, joints)
    }

    /// Posed landmark positions.
    pub fn vertices(&self, params: &BodyParams) -> Vec<Vec3> {
        let (shaped, joints) = self.shaped(&params.betas);
        let local: Vec<Mat3> = params.pose.iter().map(rodrigues).collect();
        let tr = chain_transforms(&self.parents, &joints, &local);
        shaped
            .iter()
            .zip(&self.skin)
            .map(|(v, skin)| {
                let mut out = *v;
                for &(j, w) in skin {
                    out += ((tr[j].rotation - Mat3::identity()) * v + tr[j].offset) * w;
                }
                out + params.translation
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub e_ldmks: f64,
    pub e_shape: f64,
    pub e_pose: f64,
    pub e_temp: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.e_ldmks + self.e_shape + self.e_pose + self.e_temp;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularizerWeights {
    pub lambda_shape: f64,
    pub lambda_pose: f64,
    pub lambda_temp: f64,
}

impl RegularizerWeights {
    pub const ZERO: RegularizerWeights = RegularizerWeights {
        lambda_shape: 0.0,
        lambda_pose: 0.0,
        lambda_temp: 0.0,
    };
}

/// Result of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub energy: EnergyBreakdown,
    /// Counted landmarks that fell behind their camera and were dropped.
    pub behind_camera: usize,
}

/// Energy of one person in one frame.
#[derive(Debug, Clone)]
pub struct FrameEnergy<'a> {
    body: &'a LandmarkBody,
    rig: &'a Rig,
    observations: &'a PersonObservations,
    estimator: RobustEstimator,
    visibility_threshold: f64,
    weights: RegularizerWeights,
    previous: Option<Vec<Mat3>>,
}

impl<'a> FrameEnergy<'a> {
    pub fn new(
        body: &'a LandmarkBody,
        rig: &'a Rig,
        observations: &'a PersonObservations,
        estimator: RobustEstimator,
        visibility_threshold: f64,
    ) -> Result<Self> {
        check_len("observation cameras", rig.len(), observations.cameras.len())?;
        for cam in &observations.cameras {
            check_len("landmark observations", body.num_landmarks(), cam.len())?;
            if let Some(o) = cam.iter().find(|o| !(o.sigma > 0.0)) {
                return Err(Error::NonPositiveSigma(o.sigma));
            }
        }
        if !estimator.is_valid() {
            return Err(Error::InvalidConfig(alloc::format!("invalid estimator {estimator:?}")));
        }
        Ok(Self {
            body,
            rig,
            observations,
            estimator,
            visibility_threshold,
            weights: RegularizerWeights::ZERO,
            previous: None,
        })
    }

    pub fn with_regularizers(mut self, weights: RegularizerWeights) -> Self {
        self.weights = weights;
        self
    }

    /// Previous-frame pose for the temporal term.
    pub fn with_previous(mut self, previous: Option<&BodyParams>) -> Result<Self> {
        self.previous = match previous {
            Some(p) => {
                check_len("previous pose", self.body.num_joints(), p.pose.len())?;
                Some(p.pose.iter().map(rodrigues).collect())
            }
            None => None,
        };
        Ok(self)
    }

    pub fn with_estimator(mut self, estimator: RobustEstimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn estimator(&self) -> RobustEstimator {
        self.estimator
    }

    pub fn energy(&self, params: &BodyParams) -> Result<EnergyBreakdown> {
        let x = params.pack();
        self.evaluate(&x, None).map(|e| e.energy)
    }

    /// Gauss-Newton approximation of the Hessian diagonal at `x` for the
    /// packed coordinates in `indices`, with every counted landmark taken
    /// under squared loss. Landmark motion is differenced with step `h`.
    pub fn gauss_newton_diagonal(&self, x: &[f64], indices: &[usize], h: f64) -> Result<Vec<f64>> {
        let body = self.body;
        let (k, nb) = (body.num_joints(), body.num_betas());
        check_len("packed parameters", body.packed_len(), x.len())?;
        let base = body.vertices(&BodyParams::unpack(x, k, nb)?);
        let mut counted = Vec::new();
        for (cam, obs) in self.rig.cameras.iter().zip(&self.observations.cameras) {
            for (l, o) in obs.iter().enumerate() {
                if !(o.p >= self.visibility_threshold) || o.p == 0.0 {
                    continue;
                }
                if let Some(pj) = cam.project_with_jacobian(&base[l]) {
                    counted.push((l, pj.du, pj.dv, o.p / (o.sigma * o.sigma)));
                }
            }
        }
        let inv_c = 1.0 / self.rig.len() as f64;
        let w = &self.weights;
        let temporal = if self.previous.is_some() { 2.0 * w.lambda_temp } else { 0.0 };
        let mut at = x.to_vec();
        let mut out = Vec::with_capacity(indices.len());
        for &i in indices {
            at[i] = x[i] + h;
            let plus = body.vertices(&BodyParams::unpack(&at, k, nb)?);
            at[i] = x[i] - h;
            let minus = body.vertices(&BodyParams::unpack(&at, k, nb)?);
            at[i] = x[i];
            let mut data = 0.0;
            for &(l, du, dv, weight) in &counted {
                let d = (plus[l] - minus[l]) / (2.0 * h);
                data += weight * (du.dot(&d).powi(2) + dv.dot(&d).powi(2));
            }
            let prior = if i < 3 {
                0.0
            } else if i < 6 {
                temporal
            } else if i < 3 + 3 * k {
                2.0 * w.lambda_pose + temporal
            } else {
                2.0 * w.lambda_shape
            };
            out.push(2.0 * inv_c * data + prior);
        }
        Ok(out)
    }

    /// Energy at a packed parameter vector and, when `grad` is given, its
    /// gradient (overwritten).
    pub fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>) -> Result<Evaluation> {
        let body = self.body;
        let k = body.num_joints();
        let nb = body.num_betas();
        check_len("packed parameters", body.packed_len(), x.len())?;
        let params = BodyParams::unpack(x, k, nb)?;
        let want_grad = grad.is_some();

        // forward
        let (shaped, joints) = body.shaped(&params.betas);
        let mut local = Vec::with_capacity(k);
        let mut local_jac = Vec::with_capacity(if want_grad { k } else { 0 });
        for theta in &params.pose {
            if want_grad {
                let (r, j) = rodrigues_with_jacobian(theta);
                local.push(r);
                local_jac.push(j);
            } else {
                local.push(rodrigues(theta));
            }
        }
        let tr = chain_transforms(&body.parents, &joints, &local);
        let posed: Vec<Vec3> = shaped
            .iter()
            .zip(&body.skin)
            .map(|(v, skin)| {
                let mut out = *v;
                for &(j, w) in skin {
                    out += ((tr[j].rotation - Mat3::identity()) * v + tr[j].offset) * w;
                }
                out + params.translation
            })
            .collect();

        // landmark term
        let inv_c = 1.0 / self.rig.len() as f64;
        let mut e_ldmks = 0.0;
        let mut behind = 0usize;
        let mut d_vertex = if want_grad { vec![Vec3::zeros(); posed.len()] } else { Vec::new() };
        for (cam, obs) in self.rig.cameras.iter().zip(&self.observations.cameras) {
            let mut cam_sum = 0.0;
            for (l, o) in obs.iter().enumerate() {
                if !(o.p >= self.visibility_threshold) || o.p == 0.0 {
                    continue;
                }
                let Some(pj) = cam.project_with_jacobian(&posed[l]) else {
                    behind += 1;
                    continue;
                };
                let r = o.mu - pj.pixel;
                let whitened = r.norm() / o.sigma;
                cam_sum += o.p * self.estimator.rho(whitened);
                if want_grad {
                    let coeff = -o.p * inv_c * self.estimator.weight(whitened) / (o.sigma * o.sigma);
                    d_vertex[l] += (pj.du * r.x + pj.dv * r.y) * coeff;
                }
            }
            e_ldmks += cam_sum;
        }
        e_ldmks *= inv_c;

        // priors
        let w = &self.weights;
        let e_shape = w.lambda_shape * params.betas.iter().map(|b| b * b).sum::<f64>();
        let e_pose = w.lambda_pose
            * params.pose.iter().skip(1).map(|t| t.norm_squared()).sum::<f64>();
        let mut e_temp = 0.0;
        let mut d_local = vec![Mat3::zeros(); if want_grad { k } else { 0 }];
        if let Some(prev) = &self.previous {
            if w.lambda_temp != 0.0 {
                for j in 0..k {
                    let (val, g) = squared_angle_with_gradient(&(prev[j].transpose() * local[j]));
                    e_temp += val;
                    if want_grad {
                        d_local[j] += prev[j] * g * w.lambda_temp;
                    }
                }
                e_temp *= w.lambda_temp;
            }
        }

        let energy = EnergyBreakdown {
            e_ldmks,
            e_shape,
            e_pose,
            e_temp,
            total: 0.0,
        }
        .finish();

        if let Some(grad) = grad {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut d_t = Vec3::zeros();
            let mut d_shaped = vec![Vec3::zeros(); shaped.len()];
            let mut d_rot = vec![Mat3::zeros(); k];
            let mut d_off = vec![Vec3::zeros(); k];
            for (l, g) in d_vertex.iter().enumerate() {
                if *g == Vec3::zeros() {
                    continue;
                }
                d_t += g;
                let v = shaped[l];
                let mut dv = *g;
                for &(j, wt) in &body.skin[l] {
                    dv += (tr[j].rotation - Mat3::identity()).transpose() * g * wt;
                    d_rot[j] += g * v.transpose() * wt;
                    d_off[j] += g * wt;
                }
                d_shaped[l] = dv;
            }

            let mut d_joints = vec![Vec3::zeros(); k];
            let mut d_theta = vec![Vec3::zeros(); k];
            for j in (0..k).rev() {
                let pivot = joints[j] - local[j] * joints[j];
                let d_pivot = match body.parents[j] {
                    Some(p) => {
                        let parent_rot = tr[p].rotation;
                        let dr = d_rot[j];
                        let doff = d_off[j];
                        d_rot[p] += dr * local[j].transpose() + doff * pivot.transpose();
                        d_local[j] += parent_rot.transpose() * dr;
                        d_off[p] += doff;
                        parent_rot.transpose() * doff
                    }
                    None => {
                        d_local[j] += d_rot[j];
                        d_off[j]
                    }
                };
                d_joints[j] += d_pivot - local[j].transpose() * d_pivot;
                d_local[j] -= d_pivot * joints[j].transpose();
                d_theta[j] = rodrigues_backprop(&local_jac[j], &d_local[j]);
            }

            // priors on θ and β
            for (j, theta) in params.pose.iter().enumerate().skip(1) {
                d_theta[j] += theta * (2.0 * w.lambda_pose);
            }

            grad[..3].copy_from_slice(d_t.as_slice());
            for (j, d) in d_theta.iter().enumerate() {
                grad[3 + 3 * j..6 + 3 * j].copy_from_slice(d.as_slice());
            }
            let beta_base = 3 + 3 * k;
            for b in 0..nb {
                let mut acc = 2.0 * w.lambda_shape * params.betas[b];
                for (d, s) in d_shaped.iter().zip(&body.shape_dirs[b]) {
                    acc += d.dot(s);
                }
                for (d, s) in d_joints.iter().zip(&body.joint_shape_dirs[b]) {
                    acc += d.dot(s);
                }
                grad[beta_base + b] = acc;
            }
        }
        Ok(Evaluation {
            energy,
            behind_camera: behind,
        })
    }
}

/// Landmark reprojection energy of one person in one frame.
pub fn energy_landmarks(
    body: &LandmarkBody,
    params: &BodyParams,
    rig: &Rig,
    observations: &PersonObservations,
    estimator: RobustEstimator,
    visibility_threshold: f64,
) -> Result<f64> {
    FrameEnergy::new(body, rig, observations, estimator, visibility_threshold)?
        .energy(params)
        .map(|e| e.e_ldmks)
}

/// Full energy with priors and the temporal term (zero without `previous`).
#[allow(clippy::too_many_arguments)]
pub fn energy_total(
    body: &LandmarkBody,
    params: &BodyParams,
    previous: Option<&BodyParams>,
    rig: &Rig,
    observations: &PersonObservations,
    weights: RegularizerWeights,
    estimator: RobustEstimator,
    visibility_threshold: f64,
) -> Result<EnergyBreakdown> {
    FrameEnergy::new(body, rig, observations, estimator, visibility_threshold)?
        .with_regularizers(weights)
        .with_previous(previous)?
        .energy(params)
}
