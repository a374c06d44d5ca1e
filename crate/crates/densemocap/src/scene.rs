//! Synthetic scene description read by `synth`.

use std::path::Path;

use densemocap_core::camera::{ring_rig_with, Intrinsics, Rig};
use densemocap_core::landmarks::{PartWeights, DEFAULT_LANDMARK_COUNT};
use densemocap_core::motion::ProceduralMotion;
use densemocap_core::observe::{NoiseSpec, VisibilityMode};
use densemocap_core::render::DEFAULT_VISIBILITY_EPS;
use densemocap_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::calibration::read_calibration;
use crate::formats::model::BUILTIN_TOY;
use crate::io::{check_version, read_json, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "version")]
    pub format_version: u32,
    /// `builtin:toy` or a model file.
    #[serde(default = "toy")]
    pub model: String,
    pub frames: usize,
    #[serde(default = "default_fps")]
    pub fps: f64,
    pub persons: Vec<PersonSource>,
    pub rig: RigSource,
    #[serde(default)]
    pub landmarks: LandmarkSource,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub visibility: VisibilityMode,
    #[serde(default = "default_eps")]
    pub visibility_eps: f64,
    /// Write a silhouette PGM per frame and camera.
    #[serde(default)]
    pub dump_masks: bool,
    /// Write a depth map per frame and camera.
    #[serde(default)]
    pub dump_depth: bool,
}

fn version() -> u32 {
    FORMAT_VERSION
}

fn toy() -> String {
    BUILTIN_TOY.to_string()
}

fn default_fps() -> f64 {
    30.0
}

fn default_eps() -> f64 {
    DEFAULT_VISIBILITY_EPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonSource {
    pub id: u32,
    pub motion: MotionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionSource {
    Procedural(ProceduralMotion),
    /// The person with the same id in a motion file; its first `frames`
    /// frames are used.
    File { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RigSource {
    Ring(RingSpec),
    File { path: String },
}

/// Cameras evenly spaced on a horizontal circle, all aimed at `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub n: usize,
    pub radius: f64,
    /// Camera height above the floor, meters.
    pub height: f64,
    #[serde(default = "default_target")]
    pub target: [f64; 3],
    #[serde(default = "default_width")]
    pub image_width: u32,
    #[serde(default = "default_height")]
    pub image_height: u32,
    /// Horizontal field of view, degrees.
    #[serde(default = "default_fov")]
    pub fov_deg: f64,
}

fn default_target() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_width() -> u32 {
    Intrinsics::default().width
}

fn default_height() -> u32 {
    Intrinsics::default().height
}

fn default_fov() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkSource {
    Fps(FpsSpec),
    File { path: String },
}

impl Default for LandmarkSource {
    fn default() -> Self {
        LandmarkSource::Fps(FpsSpec::default())
    }
}

/// Weighted farthest point sampling on the template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FpsSpec {
    pub n: usize,
    pub weights: PartWeights,
    pub seed_index: usize,
}

impl Default for FpsSpec {
    fn default() -> Self {
        Self { n: DEFAULT_LANDMARK_COUNT, weights: PartWeights::default(), seed_index: 0 }
    }
}

impl SceneConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let s: SceneConfig = read_json(path)?;
        check_version(path, s.format_version)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::config("frames", "must be at least 1"));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::config("fps", format!("must be positive, got {}", self.fps)));
        }
        if self.persons.is_empty() {
            return Err(Error::config("persons", "at least one person is required"));
        }
        for (i, p) in self.persons.iter().enumerate() {
            if self.persons[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::config("persons", format!("duplicate person id {}", p.id)));
            }
            if let MotionSource::Procedural(m) = &p.motion {
                m.validate().map_err(|e| Error::config(&format!("persons[{i}].motion"), e))?;
            }
        }
        if let RigSource::Ring(r) = &self.rig {
            if r.n == 0 {
                return Err(Error::config("rig.ring.n", "must be at least 1"));
            }
            if !(r.radius > 0.0) {
                return Err(Error::config("rig.ring.radius", "must be positive"));
            }
            if r.image_width == 0 || r.image_height == 0 {
                return Err(Error::config("rig.ring.image_width", "image size must be nonzero"));
            }
            if !(r.fov_deg > 0.0 && r.fov_deg < 180.0) {
                return Err(Error::config("rig.ring.fov_deg", "must lie in (0, 180)"));
            }
        }
        if let LandmarkSource::Fps(f) = &self.landmarks {
            if f.n == 0 {
                return Err(Error::config("landmarks.fps.n", "must be at least 1"));
            }
        }
        self.noise.validate().map_err(|e| Error::config("noise", e))?;
        if !(self.visibility_eps >= 0.0) {
            return Err(Error::config("visibility_eps", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn build_rig(&self, base: &Path) -> Result<Rig> {
        match &self.rig {
            RigSource::Ring(r) => {
                let intr = Intrinsics::from_fov(r.image_width, r.image_height, r.fov_deg.to_radians());
                ring_rig_with(r.n, r.radius, r.height, Vec3::from(r.target), &intr)
                    .map_err(|e| Error::config("rig.ring", e))
            }
            RigSource::File { path } => read_calibration(&base.join(path)),
        }
    }
}
