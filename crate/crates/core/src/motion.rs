//! Seeded procedural ground-truth motion: every articulated joint follows a
//! sinusoidal axis-angle curve, the root turns slowly about the vertical and
//! the body sways in place.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::body::{BodyModel, BodyParams};
use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ProceduralMotion {
    /// Base frequency, Hz. Each joint axis draws its own from `[0.5, 1.5]×`.
    pub frequency: f64,
    /// Peak joint angle, radians. Each joint axis draws its own from `[0.5, 1]×`.
    pub amplitude: f64,
    pub seed: u64,
    /// Standard deviation of the drawn shape coefficients.
    pub shape_std: f64,
    /// Where the body stands (added to the translation).
    pub position: [f64; 3],
    /// Mean yaw about +z, radians.
    pub heading: f64,
    /// Peak horizontal sway, meters.
    pub sway: f64,
}

impl Default for ProceduralMotion {
    fn default() -> Self {
        Self {
            frequency: 0.5,
            amplitude: 0.3,
            seed: 0,
            shape_std: 0.5,
            position: [0.0; 3],
            heading: 0.0,
            sway: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Wave {
    amplitude: f64,
    omega: f64,
    phase: f64,
}

impl Wave {
    fn draw(rng: &mut ChaCha8Rng, amplitude: f64, frequency: f64) -> Wave {
        Wave {
            amplitude: amplitude * rng.random_range(0.5..=1.0),
            omega: TAU * frequency * rng.random_range(0.5..=1.5),
            phase: rng.random_range(0.0..TAU),
        }
    }

    fn at(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).sin()
    }
}

impl ProceduralMotion {
    pub fn validate(&self) -> Result<()> {
        let ok = self.frequency >= 0.0
            && self.amplitude >= 0.0
            && self.shape_std >= 0.0
            && self.sway >= 0.0
            && self.heading.is_finite()
            && self.position.iter().all(|v| v.is_finite())
            && self.frequency.is_finite()
            && self.amplitude.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!("bad procedural motion {self:?}")))
        }
    }

    /// `frames` poses sampled at `fps`.
    pub fn generate(&self, model: &BodyModel, frames: usize, fps: f64) -> Result<Vec<BodyParams>> {
        self.validate()?;
        if !(fps > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("fps must be positive, got {fps}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let betas: Vec<f64> = (0..model.num_betas())
            .map(|_| self.shape_std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let joint_waves: Vec<[Wave; 3]> = (1..model.num_joints())
            .map(|_| core::array::from_fn(|_| Wave::draw(&mut rng, self.amplitude, self.frequency)))
            .collect();
        let yaw = Wave::draw(&mut rng, 0.5 * self.amplitude, 0.5 * self.frequency);
        let tilt = [
            Wave::draw(&mut rng, 0.1 * self.amplitude, self.frequency),
            Wave::draw(&mut rng, 0.1 * self.amplitude, self.frequency),
        ];
        let sway = [
            Wave::draw(&mut rng, self.sway, 0.5 * self.frequency),
            Wave::draw(&mut rng, self.sway, 0.5 * self.frequency),
        ];
        let base = Vec3::from(self.position);

        Ok((0..frames)
            .map(|f| {
                let t = f as f64 / fps;
                let mut pose = Vec::with_capacity(model.num_joints());
                pose.push(Vec3::new(tilt[0].at(t), tilt[1].at(t), self.heading + yaw.at(t)));
                pose.extend(
                    joint_waves
                        .iter()
                        .map(|w| Vec3::new(w[0].at(t), w[1].at(t), w[2].at(t))),
                );
                BodyParams {
                    betas: betas.clone(),
                    pose,
                    translation: base + Vec3::new(sway[0].at(t), sway[1].at(t), 0.0),
                }
            })
            .collect())
    }
}
