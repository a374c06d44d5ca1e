//! Landmark observations: the synthetic generator that stands in for a
//! detector, and the per-landmark location and visibility scores.
//!
//! Random draws come from one ChaCha8 generator seeded with
//! `NoiseSpec::rng_seed`, on stream number `frame`. Within a frame the draws
//! run persons → cameras → landmarks; each landmark consumes exactly four
//! values (x noise, y noise, σ jitter, visibility flip) whether or not they are
//! used, so streams never shift.

use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::body::{BodyModel, BodyParams, PosedBody};
use crate::camera::{in_image, Rig};
use crate::error::{check_len, Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::landmarks::LandmarkSet;
use crate::render::{vertex_visibility, Rasterizer, DEFAULT_VISIBILITY_EPS};

/// σ reported for a landmark whose person is behind the camera.
pub const BEHIND_CAMERA_SIGMA: f64 = 1e6;

/// Probability clamp used by the visibility score.
pub const PROBABILITY_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkObservation {
    pub mu: Vec2,
    pub sigma: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonObservations {
    pub person_id: u32,
    /// `[camera][landmark]`
    pub cameras: Vec<Vec<LandmarkObservation>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservations {
    pub frame: usize,
    pub timestamp: f64,
    pub persons: Vec<PersonObservations>,
}

impl FrameObservations {
    pub fn person(&self, id: u32) -> Option<&PersonObservations> {
        self.persons.iter().find(|p| p.person_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NoiseSpec {
    /// Std of the Gaussian added to each pixel coordinate.
    pub pixel_noise_std: f64,
    /// Std of the log-normal factor applied to the reported σ.
    pub sigma_report_jitter: f64,
    pub visibility_flip_rate: f64,
    pub rng_seed: u64,
    /// Lower bound on the reported σ before jitter, pixels.
    pub sigma_floor: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            pixel_noise_std: 0.0,
            sigma_report_jitter: 0.0,
            visibility_flip_rate: 0.0,
            rng_seed: 0,
            sigma_floor: 1.0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.pixel_noise_std >= 0.0
            && self.sigma_report_jitter >= 0.0
            && (0.0..=0.5).contains(&self.visibility_flip_rate)
            && self.sigma_floor > 0.0
            && self.pixel_noise_std.is_finite()
            && self.sigma_report_jitter.is_finite()
            && self.sigma_floor.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid noise spec {self:?}")))
        }
    }

    pub fn base_sigma(&self) -> f64 {
        self.pixel_noise_std.max(self.sigma_floor)
    }
}

/// How ground-truth visibility is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VisibilityMode {
    /// Z-buffer test against every person's mesh, self-occlusion included.
    #[default]
    ZBuffer,
    /// Every landmark in front of the camera and inside the image is visible.
    AllVisible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub noise: NoiseSpec,
    pub visibility: VisibilityMode,
    pub visibility_eps: f64,
    pub fps: f64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            noise: NoiseSpec::default(),
            visibility: VisibilityMode::ZBuffer,
            visibility_eps: DEFAULT_VISIBILITY_EPS,
            fps: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonMotion {
    pub person_id: u32,
    pub frames: Vec<BodyParams>,
}

/// Noise-free record of one generated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    /// Per person.
    pub meshes: Vec<PosedBody>,
    /// `[person][camera][landmark]`, `None` behind the camera.
    pub projections: Vec<Vec<Vec<Option<Vec2>>>>,
    /// `[person][camera][landmark]`
    pub visibility: Vec<Vec<Vec<bool>>>,
    /// (person, camera) pairs skipped because the person was behind the camera.
    pub behind_camera: Vec<(u32, usize)>,
}

fn check_motions(model: &BodyModel, motions: &[PersonMotion]) -> Result<usize> {
    let frames = motions.first().map_or(0, |m| m.frames.len());
    for m in motions {
        check_len("motion frames", frames, m.frames.len())?;
        for p in &m.frames {
            p.validate(model)?;
        }
    }
    Ok(frames)
}

/// Generate observations for one frame of a scene.
pub fn generate_frame(
    model: &BodyModel,
    motions: &[PersonMotion],
    rig: &Rig,
    landmarks: &LandmarkSet,
    opts: &GenerateOptions,
    frame: usize,
) -> Result<(FrameObservations, FrameTruth)> {
    opts.noise.validate()?;
    rig.validate()?;
    landmarks.validate(model.num_vertices())?;
    let meshes = motions
        .iter()
        .map(|m| {
            let params = m.frames.get(frame).ok_or(Error::DimensionMismatch {
                what: "motion frames",
                expected: frame + 1,
                got: m.frames.len(),
            })?;
            model.lbs_forward(params)
        })
        .collect::<Result<Vec<_>>>()?;

    // ground truth per camera, all persons drawn jointly
    let mut projections = vec![Vec::with_capacity(rig.len()); meshes.len()];
    let mut visibility = vec![Vec::with_capacity(rig.len()); meshes.len()];
    for cam in &rig.cameras {
        let depth = match opts.visibility {
            VisibilityMode::ZBuffer => {
                let mut r = Rasterizer::new(cam, cam.width, cam.height)?;
                for mesh in &meshes {
                    r.draw(&mesh.vertices, model.faces());
                }
                Some(r.finish().0)
            }
            VisibilityMode::AllVisible => None,
        };
        for (pi, mesh) in meshes.iter().enumerate() {
            let pts: Vec<Vec3> = landmarks.indices.iter().map(|&i| mesh.vertices[i]).collect();
            let proj: Vec<Option<Vec2>> =
                pts.iter().map(|p| cam.project(p).ok().map(|(px, _)| px)).collect();
            let vis = match &depth {
                Some(d) => vertex_visibility(&pts, cam, d, opts.visibility_eps),
                None => proj.iter().map(|p| p.is_some_and(|px| in_image(cam, &px))).collect(),
            };
            projections[pi].push(proj);
            visibility[pi].push(vis);
        }
    }

    let noise = &opts.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    rng.set_stream(frame as u64);
    let base_sigma = noise.base_sigma();
    let mut persons = Vec::with_capacity(meshes.len());
    let mut behind_camera = Vec::new();
    for (pi, motion) in motions.iter().enumerate() {
        let mut cameras = Vec::with_capacity(rig.len());
        for ci in 0..rig.len() {
            let proj = &projections[pi][ci];
            let behind = proj.iter().any(|p| p.is_none());
            if behind {
                log::warn!(
                    "frame {frame}: person {} is behind camera {}",
                    motion.person_id,
                    rig.names[ci]
                );
                behind_camera.push((motion.person_id, ci));
            }
            let obs = proj
                .iter()
                .zip(&visibility[pi][ci])
                .map(|(px, vis)| {
                    let nx: f64 = rng.sample(StandardNormal);
                    let ny: f64 = rng.sample(StandardNormal);
                    let nj: f64 = rng.sample(StandardNormal);
                    let flip: f64 = rng.random();
                    match px {
                        Some(px) if !behind => {
                            let mu = px + Vec2::new(nx, ny) * noise.pixel_noise_std;
                            let sigma = base_sigma * (noise.sigma_report_jitter * nj).exp();
                            let mut p = if *vis { 1.0 } else { 0.0 };
                            if flip < noise.visibility_flip_rate {
                                p = 1.0 - p;
                            }
                            LandmarkObservation { mu, sigma, p }
                        }
                        _ => LandmarkObservation {
                            mu: Vec2::zeros(),
                            sigma: BEHIND_CAMERA_SIGMA,
                            p: 0.0,
                        },
                    }
                })
                .collect();
            cameras.push(obs);
        }
        persons.push(PersonObservations {
            person_id: motion.person_id,
            cameras,
        });
    }
    Ok((
        FrameObservations {
            frame,
            timestamp: frame as f64 / opts.fps,
            persons,
        },
        FrameTruth {
            meshes,
            projections,
            visibility,
            behind_camera,
        },
    ))
}

/// Generate every frame of a scene, in order.
pub fn generate_observations(
    model: &BodyModel,
    motions: &[PersonMotion],
    rig: &Rig,
    landmarks: &LandmarkSet,
    opts: &GenerateOptions,
) -> Result<Vec<(FrameObservations, FrameTruth)>> {
    let frames = check_motions(model, motions)?;
    (0..frames)
        .map(|f| generate_frame(model, motions, rig, landmarks, opts, f))
        .collect()
}

/// Per-landmark weights of the location and visibility scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWeights {
    pub lambda_mu: Vec<f64>,
    pub lambda_p: Vec<f64>,
}

impl ScoreWeights {
    pub fn uniform(n: usize) -> Self {
        Self {
            lambda_mu: vec![1.0; n],
            lambda_p: vec![1.0; n],
        }
    }
}

/// Gaussian negative log likelihood of predicted locations:
/// `Σ λ_i (log σ_i² + ‖μ_i − μ'_i‖² / (2σ_i²))`.
pub fn gnll_score(pred: &[LandmarkObservation], gt: &[Vec2], w: &ScoreWeights) -> Result<f64> {
    check_len("ground-truth locations", pred.len(), gt.len())?;
    check_len("lambda_mu", pred.len(), w.lambda_mu.len())?;
    let mut total = 0.0;
    for ((o, g), l) in pred.iter().zip(gt).zip(&w.lambda_mu) {
        if !(o.sigma > 0.0) {
            return Err(Error::NonPositiveSigma(o.sigma));
        }
        let s2 = o.sigma * o.sigma;
        total += l * (s2.ln() + (o.mu - g).norm_squared() / (2.0 * s2));
    }
    Ok(total)
}

/// Binary cross entropy of visibility probabilities against binary labels,
/// with predictions clamped to `[1e-7, 1 − 1e-7]`. A prediction equal to its
/// label contributes exactly zero.
pub fn bce_visibility_score(pred_p: &[f64], gt_p: &[bool], w: &ScoreWeights) -> Result<f64> {
    check_len("visibility labels", pred_p.len(), gt_p.len())?;
    check_len("lambda_p", pred_p.len(), w.lambda_p.len())?;
    let mut total = 0.0;
    for ((p, g), l) in pred_p.iter().zip(gt_p).zip(&w.lambda_p) {
        if *p == if *g { 1.0 } else { 0.0 } {
            continue;
        }
        let p = p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP);
        total += l * if *g { -p.ln() } else { -(1.0 - p).ln() };
    }
    Ok(total)
}
