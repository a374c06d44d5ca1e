//! Three-stage per-sequence fitting.
//!
//! 1. Rigid: root orientation and translation only, squared loss, no priors.
//!    The articulated joints stay at the initial "L" pose.
//! 2. Geman-McClure; pose, shape and translation free; priors and the
//!    temporal term against the previous solved frame.
//! 3. Huber; shape frozen to the per-person median of stage 2; pose and
//!    translation re-optimized with the temporal term.
//!
//! Frames are solved in order within each stage so every frame warm-starts
//! from its predecessor. Persons are independent.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;

use crate::body::{BodyModel, BodyParams};
use crate::camera::{triangulate_midpoint, Rig};
use crate::energy::{EnergyBreakdown, FrameEnergy, LandmarkBody, RegularizerWeights};
use crate::error::{Error, Result};
use crate::geom::{axis_angle, rodrigues, Vec2, Vec3};
use crate::landmarks::LandmarkSet;
use crate::lbfgs::{lbfgs_minimize, LbfgsOptions, Termination};
use crate::observe::{FrameObservations, PersonObservations};
use crate::robust::RobustEstimator;

/// A contiguous group of packed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Block {
    Translation,
    RootOrientation,
    /// Every non-root joint.
    Pose,
    Shape,
}

impl Block {
    fn range(self, num_joints: usize, num_betas: usize) -> core::ops::Range<usize> {
        let pose_end = 3 + 3 * num_joints;
        match self {
            Block::Translation => 0..3,
            Block::RootOrientation => 3..6,
            Block::Pose => 6..pose_end,
            Block::Shape => pose_end..pose_end + num_betas,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageConfig {
    pub blocks: Vec<Block>,
    pub estimator: RobustEstimator,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

/// Initial axis-angle of one named joint.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointAngle {
    pub joint: String,
    pub axis_angle: [f64; 3],
}

impl JointAngle {
    fn new(joint: &str, axis_angle: [f64; 3]) -> Self {
        Self {
            joint: joint.into(),
            axis_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FitConfig {
    pub lambda_shape: f64,
    pub lambda_pose: f64,
    pub lambda_temp: f64,
    pub stages: Vec<StageConfig>,
    /// L-BFGS history length.
    pub history: usize,
    /// `p_min`: landmarks below it are ignored.
    pub visibility_threshold: f64,
    /// Joints not listed start at zero; the root is always zero.
    pub init_pose: Vec<JointAngle>,
}

impl Default for FitConfig {
    fn default() -> Self {
        use core::f64::consts::FRAC_PI_2;
        Self {
            lambda_shape: 1e-3,
            lambda_pose: 1e-4,
            lambda_temp: 1e-2,
            stages: vec![
                StageConfig {
                    blocks: vec![Block::Translation, Block::RootOrientation],
                    estimator: RobustEstimator::None,
                    max_iterations: 100,
                    gradient_tolerance: 1e-6,
                },
                StageConfig {
                    blocks: vec![Block::Translation, Block::RootOrientation, Block::Pose, Block::Shape],
                    estimator: RobustEstimator::GemanMcClure { c: 50.0 },
                    max_iterations: 400,
                    gradient_tolerance: 1e-6,
                },
                StageConfig {
                    blocks: vec![Block::Translation, Block::RootOrientation, Block::Pose],
                    estimator: RobustEstimator::Huber { delta: 1.0 },
                    max_iterations: 200,
                    gradient_tolerance: 1e-6,
                },
            ],
            history: 10,
            visibility_threshold: 0.5,
            init_pose: vec![
                JointAngle::new("left_shoulder", [0.0, -FRAC_PI_2, 0.0]),
                JointAngle::new("left_elbow", [0.0, FRAC_PI_2, 0.0]),
                JointAngle::new("right_shoulder", [0.0, FRAC_PI_2, 0.0]),
                JointAngle::new("right_elbow", [0.0, -FRAC_PI_2, 0.0]),
            ],
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("lambda_shape", self.lambda_shape),
            ("lambda_pose", self.lambda_pose),
            ("lambda_temp", self.lambda_temp),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite value ≥ 0, got {v}"));
            }
        }
        if self.stages.len() != 3 {
            return bad(format!("stages: expected 3, got {}", self.stages.len()));
        }
        for (i, s) in self.stages.iter().enumerate() {
            if !(s.gradient_tolerance > 0.0) {
                return bad(format!("stages[{i}].gradient_tolerance must be > 0"));
            }
            if !s.estimator.is_valid() {
                return bad(format!("stages[{i}].estimator: {:?}", s.estimator));
            }
            if s.blocks.is_empty() {
                return bad(format!("stages[{i}].blocks is empty"));
            }
        }
        if self.stages[2].blocks.contains(&Block::Shape) {
            return bad("stages[2].blocks: shape is frozen in the refinement stage".into());
        }
        if self.history == 0 {
            return bad("history must be ≥ 1".into());
        }
        if !(0.0..1.0).contains(&self.visibility_threshold) {
            return bad(format!(
                "visibility_threshold must lie in [0, 1), got {}",
                self.visibility_threshold
            ));
        }
        if self.init_pose.iter().any(|j| j.axis_angle.iter().any(|v| !v.is_finite())) {
            return bad("init_pose: non-finite angle".into());
        }
        Ok(())
    }

    fn regularizers(&self) -> RegularizerWeights {
        RegularizerWeights {
            lambda_shape: self.lambda_shape,
            lambda_pose: self.lambda_pose,
            lambda_temp: self.lambda_temp,
        }
    }
}

/// Initial pose block: zero everywhere except the configured joints. Joint
/// angles configured for the root are ignored.
pub fn init_pose(model: &BodyModel, config: &FitConfig) -> Result<Vec<Vec3>> {
    let mut pose = vec![Vec3::zeros(); model.num_joints()];
    for ja in &config.init_pose {
        let j = model.joint_index(&ja.joint).ok_or_else(|| {
            Error::InvalidConfig(format!("init_pose: model has no joint named {:?}", ja.joint))
        })?;
        if model.parents()[j].is_some() {
            pose[j] = Vec3::from(ja.axis_angle);
        }
    }
    Ok(pose)
}

/// Midpoint of the rays through each camera's visibility-weighted centroid
/// of the person's observed landmarks.
pub fn init_translation(obs: &PersonObservations, rig: &Rig, visibility_threshold: f64) -> Result<Vec3> {
    let mut rays = Vec::new();
    for (cam, landmarks) in rig.cameras.iter().zip(&obs.cameras) {
        let mut sum = Vec2::zeros();
        let mut weight = 0.0;
        for o in landmarks {
            if o.p >= visibility_threshold && o.p > 0.0 {
                sum += o.mu * o.p;
                weight += o.p;
            }
        }
        if weight > 0.0 {
            rays.push(cam.backproject(&(sum / weight)));
        }
    }
    let point = triangulate_midpoint(&rays)?;
    let centers: Vec<Vec3> = rig.cameras.iter().map(|c| c.center()).collect();
    let mid = centers.iter().sum::<Vec3>() / centers.len() as f64;
    let reach = centers.iter().map(|c| (c - mid).norm()).fold(0.0, f64::max);
    if (point - mid).norm() > reach {
        log::warn!("person {}: initial position lies outside the camera rig", obs.person_id);
    }
    Ok(point)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1, 2 or 3.
    pub stage: u8,
    pub frame: usize,
    pub person_id: u32,
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSummary {
    pub stage: u8,
    pub frame: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub objective: f64,
    pub gradient_norm: f64,
    /// Behind-camera landmarks dropped at the solution.
    pub behind_camera: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonFit {
    pub person_id: u32,
    /// Final parameters per frame.
    pub frames: Vec<BodyParams>,
    /// Final-stage energy per frame.
    pub energies: Vec<EnergyBreakdown>,
    /// Initialization (stage-1 start) per frame.
    pub initial: Vec<BodyParams>,
    /// Results after each stage, `[stage][frame]`.
    pub stage_results: [Vec<BodyParams>; 3],
    pub summaries: Vec<StageSummary>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub persons: Vec<PersonFit>,
}

impl FitResult {
    pub fn person(&self, id: u32) -> Option<&PersonFit> {
        self.persons.iter().find(|p| p.person_id == id)
    }
}

const CURVATURE_STEP: f64 = 1e-5;
const CURVATURE_FLOOR: f64 = 1e-8;

struct Stage<'a> {
    index: u8,
    body: &'a LandmarkBody,
    rig: &'a Rig,
    config: &'a FitConfig,
    stage: &'a StageConfig,
    person_id: u32,
}

impl Stage<'_> {
    fn free_indices(&self) -> Vec<usize> {
        let (k, b) = (self.body.num_joints(), self.body.num_betas());
        let mut idx: Vec<usize> = self.stage.blocks.iter().flat_map(|bl| bl.range(k, b)).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Square roots of the Gauss-Newton curvature along each free
    /// coordinate at `x`; the solver works in coordinates multiplied by these.
    fn diagonal_scale(&self, energy: &FrameEnergy, free: &[usize], x: &[f64]) -> Result<Vec<f64>> {
        let curvature = energy.gauss_newton_diagonal(x, free, CURVATURE_STEP)?;
        let largest = curvature.iter().copied().fold(0.0, f64::max);
        if !(largest.is_finite() && largest > 0.0) {
            return Ok(vec![1.0; free.len()]);
        }
        let floor = largest * CURVATURE_FLOOR;
        Ok(curvature.iter().map(|c| c.max(floor).sqrt()).collect())
    }

    fn solve(
        &self,
        frame: usize,
        obs: &PersonObservations,
        start: &BodyParams,
        previous: Option<&BodyParams>,
        trace: &mut Vec<TraceRecord>,
    ) -> Result<(BodyParams, EnergyBreakdown, StageSummary)> {
        let mut energy = FrameEnergy::new(
            self.body,
            self.rig,
            obs,
            self.stage.estimator,
            self.config.visibility_threshold,
        )?;
        if self.index > 1 {
            energy = energy.with_regularizers(self.config.regularizers()).with_previous(previous)?;
        }
        let free = self.free_indices();
        let mut full = start.pack();
        let scale = self.diagonal_scale(&energy, &free, &full)?;
        let x0: Vec<f64> = free.iter().zip(&scale).map(|(&i, d)| full[i] * d).collect();
        let mut grad = vec![0.0; full.len()];
        let mut scratch = full.clone();
        let objective = |y: &[f64], g: &mut [f64]| -> f64 {
            for ((&i, v), d) in free.iter().zip(y).zip(&scale) {
                scratch[i] = *v / d;
            }
            match energy.evaluate(&scratch, Some(&mut grad)) {
                Ok(e) => {
                    for ((&i, gv), d) in free.iter().zip(g.iter_mut()).zip(&scale) {
                        *gv = grad[i] / d;
                    }
                    e.energy.total
                }
                Err(_) => f64::NAN,
            }
        };
        let opts = LbfgsOptions {
            history: self.config.history,
            max_iterations: self.stage.max_iterations,
            gradient_tolerance: self.stage.gradient_tolerance,
        };
        let result = lbfgs_minimize(objective, &x0, &opts).map_err(|e| match e {
            Error::NonFinite { iterate } => {
                log::error!("person {} frame {frame} stage {}: non-finite energy", self.person_id, self.index);
                let mut at = full.clone();
                for ((&i, v), d) in free.iter().zip(&iterate).zip(&scale) {
                    at[i] = *v / d;
                }
                Error::NonFinite { iterate: at }
            }
            other => other,
        })?;
        trace.extend(result.trace.iter().map(|r| TraceRecord {
            stage: self.index,
            frame,
            person_id: self.person_id,
            iteration: r.iteration,
            objective: r.objective,
            gradient_norm: r.gradient_norm,
            step: r.step,
        }));
        for ((&i, v), d) in free.iter().zip(&result.x).zip(&scale) {
            full[i] = *v / d;
        }
        let params = BodyParams::unpack(&full, self.body.num_joints(), self.body.num_betas())?;
        let eval = energy.evaluate(&full, None)?;
        if eval.behind_camera > 0 {
            log::debug!(
                "person {} frame {frame} stage {}: {} landmarks behind a camera",
                self.person_id,
                self.index,
                eval.behind_camera
            );
        }
        let summary = StageSummary {
            stage: self.index,
            frame,
            iterations: result.iterations,
            termination: result.termination,
            objective: result.objective,
            gradient_norm: result.gradient.iter().zip(&scale).map(|(g, d)| (g * d) * (g * d)).sum::<f64>().sqrt(),
            behind_camera: eval.behind_camera,
        };
        Ok((params, eval.energy, summary))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fit one person across a sequence; `observations[f]` is that person's
/// observation set in frame `f`.
pub fn fit_person(
    model: &BodyModel,
    body: &LandmarkBody,
    rig: &Rig,
    observations: &[&PersonObservations],
    config: &FitConfig,
) -> Result<PersonFit> {
    config.validate()?;
    let Some(first) = observations.first() else {
        return Err(Error::Initialization("empty observation sequence".into()));
    };
    let person_id = first.person_id;
    let stage = |index: u8| Stage {
        index,
        body,
        rig,
        config,
        stage: &config.stages[index as usize - 1],
        person_id,
    };
    let frames = observations.len();
    let mut trace = Vec::new();
    let mut summaries = Vec::new();

    // initialization: L pose, zero root, translation from ray midpoint
    let pose0 = init_pose(model, config)?;
    let center = init_translation(first, rig, config.visibility_threshold)
        .map_err(|e| Error::Initialization(format!("person {person_id}, frame 0: {e}")))?;
    let mut rest = BodyParams::zeros(body.num_joints(), body.num_betas());
    rest.pose = pose0.clone();
    let verts = body.vertices(&rest);
    let centroid = verts.iter().sum::<Vec3>() / verts.len().max(1) as f64;
    let mut init = rest;
    init.translation = center - centroid;

    // stage 1
    let s1 = stage(1);
    let mut initial = Vec::with_capacity(frames);
    let mut stage1: Vec<BodyParams> = Vec::with_capacity(frames);
    for (f, obs) in observations.iter().enumerate() {
        let start = match stage1.last() {
            None => init.clone(),
            Some(prev) => prev.clone(),
        };
        let (p, _, s) = s1.solve(f, obs, &start, None, &mut trace)?;
        initial.push(start);
        summaries.push(s);
        stage1.push(p);
    }

    // stage 2
    let s2 = stage(2);
    let mut stage2: Vec<BodyParams> = Vec::with_capacity(frames);
    for (f, obs) in observations.iter().enumerate() {
        let start = match stage2.last() {
            None => stage1[0].clone(),
            Some(prev) => {
                // carry the frame-to-frame rigid change seen by stage 1
                let (a, b) = (&stage1[f - 1], &stage1[f]);
                let delta = rodrigues(&b.pose[0]) * rodrigues(&a.pose[0]).transpose();
                let mut s = prev.clone();
                s.translation += b.translation - a.translation;
                s.pose[0] = axis_angle(&(delta * rodrigues(&prev.pose[0])));
                s
            }
        };
        let (p, _, s) = s2.solve(f, obs, &start, stage2.last(), &mut trace)?;
        summaries.push(s);
        stage2.push(p);
    }

    // stage 3
    let betas: Vec<f64> = (0..body.num_betas())
        .map(|b| median(&mut stage2.iter().map(|p| p.betas[b]).collect::<Vec<_>>()))
        .collect();
    let s3 = stage(3);
    let mut stage3: Vec<BodyParams> = Vec::with_capacity(frames);
    let mut energies = Vec::with_capacity(frames);
    for (f, obs) in observations.iter().enumerate() {
        let mut start = stage2[f].clone();
        start.betas = betas.clone();
        let (p, e, s) = s3.solve(f, obs, &start, stage3.last(), &mut trace)?;
        summaries.push(s);
        energies.push(e);
        stage3.push(p);
    }

    Ok(PersonFit {
        person_id,
        frames: stage3.clone(),
        energies,
        initial,
        stage_results: [stage1, stage2, stage3],
        summaries,
        trace,
    })
}

/// Person ids present in the first frame, in order.
pub fn person_ids(observations: &[FrameObservations]) -> Vec<u32> {
    observations
        .first()
        .map(|f| f.persons.iter().map(|p| p.person_id).collect())
        .unwrap_or_default()
}

/// One person's observations across the sequence.
pub fn person_track(observations: &[FrameObservations], person_id: u32) -> Result<Vec<&PersonObservations>> {
    observations
        .iter()
        .map(|f| {
            f.person(person_id).ok_or_else(|| {
                Error::InvalidParams(format!("frame {}: no observations for person {person_id}", f.frame))
            })
        })
        .collect()
}

/// Fit every person of a sequence, one after another.
pub fn fit_sequence(
    model: &BodyModel,
    rig: &Rig,
    landmarks: &LandmarkSet,
    observations: &[FrameObservations],
    config: &FitConfig,
) -> Result<FitResult> {
    if observations.is_empty() {
        return Err(Error::Initialization("empty observation sequence".into()));
    }
    config.validate()?;
    rig.validate()?;
    let body = LandmarkBody::new(model, landmarks)?;
    let persons = person_ids(observations)
        .into_iter()
        .map(|id| {
            let track = person_track(observations, id)?;
            fit_person(model, &body, rig, &track, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FitResult { persons })
}
