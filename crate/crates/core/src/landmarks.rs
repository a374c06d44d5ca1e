//! Dense landmark selection by weighted farthest-point sampling.

use alloc::vec;
use alloc::vec::Vec;

use crate::body::{BodyModel, Part};
use crate::error::{check_len, Error, Result};
use crate::geom::Vec3;

/// Landmark count used for full-size bodies.
pub const DEFAULT_LANDMARK_COUNT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub indices: Vec<usize>,
    /// Per-vertex weights the set was sampled with, if known.
    pub sampling_weights: Vec<f64>,
}

impl LandmarkSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn validate(&self, num_vertices: usize) -> Result<()> {
        let mut seen = vec![false; num_vertices];
        for &i in &self.indices {
            if i >= num_vertices {
                return Err(Error::InvalidModel(alloc::format!(
                    "landmark index {i} out of range for {num_vertices} vertices"
                )));
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidModel(alloc::format!(
                    "landmark index {i} repeated"
                )));
            }
        }
        Ok(())
    }
}

/// Emphasis per body part used when sampling landmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PartWeights {
    pub body: f64,
    pub hands: f64,
    pub feet: f64,
    pub head: f64,
}

impl Default for PartWeights {
    fn default() -> Self {
        Self {
            body: 1.0,
            hands: 4.0,
            feet: 2.0,
            head: 2.0,
        }
    }
}

impl PartWeights {
    pub fn weight(&self, part: Part) -> f64 {
        match part {
            Part::Body => self.body,
            Part::LeftHand | Part::RightHand => self.hands,
            Part::LeftFoot | Part::RightFoot => self.feet,
            Part::Head => self.head,
        }
    }

    /// Per-vertex weights for a model; unlabeled models get `body` everywhere.
    pub fn vertex_weights(&self, model: &BodyModel) -> Vec<f64> {
        match model.part_labels() {
            Some(labels) => labels.iter().map(|p| self.weight(*p)).collect(),
            None => vec![self.body; model.num_vertices()],
        }
    }
}

/// Greedy weighted farthest-point sampling.
///
/// Starts from `seed_index`; each further pick maximizes
/// `weight_i · min_s ‖p_i − p_s‖` over the unselected points, ties going to
/// the lowest index.
pub fn fps_sample(
    points: &[Vec3],
    weights: &[f64],
    n: usize,
    seed_index: usize,
) -> Result<LandmarkSet> {
    check_len("sampling weights", points.len(), weights.len())?;
    if n > points.len() {
        return Err(Error::TooManySamples {
            requested: n,
            available: points.len(),
        });
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(Error::ZeroWeights);
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParams(alloc::string::String::from(
            "sampling weights must be nonnegative",
        )));
    }
    if seed_index >= points.len() {
        return Err(Error::InvalidParams(alloc::format!(
            "seed index {seed_index} out of range"
        )));
    }
    let mut indices = Vec::with_capacity(n);
    if n == 0 {
        return Ok(LandmarkSet {
            indices,
            sampling_weights: weights.to_vec(),
        });
    }
    let mut selected = vec![false; points.len()];
    let mut min_dist = vec![f64::INFINITY; points.len()];
    let mut current = seed_index;
    loop {
        indices.push(current);
        selected[current] = true;
        if indices.len() == n {
            break;
        }
        let anchor = points[current];
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if selected[i] {
                continue;
            }
            let d = (p - anchor).norm();
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            let score = weights[i] * min_dist[i];
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((i, score)),
            }
        }
        current = best.expect("unselected points remain").0;
    }
    Ok(LandmarkSet {
        indices,
        sampling_weights: weights.to_vec(),
    })
}

/// Sample landmarks on the rest template of a model.
pub fn sample_model_landmarks(
    model: &BodyModel,
    weights: &PartWeights,
    n: usize,
    seed_index: usize,
) -> Result<LandmarkSet> {
    let w = weights.vertex_weights(model);
    fps_sample(model.template(), &w, n, seed_index)
}

/// Landmark count per part label.
pub fn count_by_part(model: &BodyModel, set: &LandmarkSet) -> Vec<(Part, usize)> {
    let mut counts = [0usize; 6];
    for &i in &set.indices {
        let part = model.part_labels().map_or(Part::Body, |l| l[i]);
        let slot = Part::ALL.iter().position(|p| *p == part).unwrap_or(0);
        counts[slot] += 1;
    }
    Part::ALL
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(p, c)| (*p, c))
        .collect()
}
