//! Observation file: a header line, then one record per (frame, person,
//! camera) in that order.

use std::path::Path;

use densemocap_core::observe::{FrameObservations, LandmarkObservation, PersonObservations};
use densemocap_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{from_hex, to_hex};
use crate::io::{check_version, parse_line, read_lines, LinesWriter, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    rig: String,
    num_cameras: usize,
    num_landmarks: usize,
    landmark_hash: String,
    topology_hash: String,
    persons: Vec<u32>,
    num_frames: usize,
    fps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    frame: usize,
    timestamp: f64,
    person: u32,
    camera: usize,
    mu: Vec<[f64; 2]>,
    sigma: Vec<f64>,
    p: Vec<f64>,
}

/// Header fields that tie an observation file to its rig, model and
/// landmark set.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationInfo {
    pub rig: String,
    pub num_cameras: usize,
    pub num_landmarks: usize,
    pub landmark_hash: u64,
    pub topology_hash: u64,
    pub persons: Vec<u32>,
    pub fps: f64,
}

pub fn write_observations(path: &Path, info: &ObservationInfo, frames: &[FrameObservations]) -> Result<()> {
    let mut w = LinesWriter::create(path)?;
    w.line(&Header {
        format_version: FORMAT_VERSION,
        rig: info.rig.clone(),
        num_cameras: info.num_cameras,
        num_landmarks: info.num_landmarks,
        landmark_hash: to_hex(info.landmark_hash),
        topology_hash: to_hex(info.topology_hash),
        persons: info.persons.clone(),
        num_frames: frames.len(),
        fps: info.fps,
    })?;
    for f in frames {
        for person in &f.persons {
            for (camera, obs) in person.cameras.iter().enumerate() {
                w.line(&Record {
                    frame: f.frame,
                    timestamp: f.timestamp,
                    person: person.person_id,
                    camera,
                    mu: obs.iter().map(|o| [o.mu.x, o.mu.y]).collect(),
                    sigma: obs.iter().map(|o| o.sigma).collect(),
                    p: obs.iter().map(|o| o.p).collect(),
                })?;
            }
        }
    }
    w.finish()
}

pub fn read_observations(path: &Path) -> Result<(ObservationInfo, Vec<FrameObservations>)> {
    let lines = read_lines(path)?;
    let Some((n0, first)) = lines.first() else {
        return Err(Error::parse(path, "empty file"));
    };
    let h: Header = parse_line(path, *n0, first)?;
    check_version(path, h.format_version)?;
    let hash = |s: &str, what: &str| from_hex(s).ok_or_else(|| Error::parse(path, format!("malformed {what}")));
    let info = ObservationInfo {
        rig: h.rig.clone(),
        num_cameras: h.num_cameras,
        num_landmarks: h.num_landmarks,
        landmark_hash: hash(&h.landmark_hash, "landmark_hash")?,
        topology_hash: hash(&h.topology_hash, "topology_hash")?,
        persons: h.persons.clone(),
        fps: h.fps,
    };
    let expected = h.num_frames * h.persons.len() * h.num_cameras;
    if lines.len() - 1 != expected {
        return Err(Error::parse(path, format!("expected {expected} records, found {}", lines.len() - 1)));
    }
    let mut records = lines[1..].iter();
    let mut frames = Vec::with_capacity(h.num_frames);
    for frame in 0..h.num_frames {
        let mut persons = Vec::with_capacity(h.persons.len());
        let mut timestamp = 0.0;
        for &person in &h.persons {
            let mut cameras = Vec::with_capacity(h.num_cameras);
            for camera in 0..h.num_cameras {
                let (n, line) = records.next().expect("record count checked");
                let r: Record = parse_line(path, *n, line)?;
                if (r.frame, r.person, r.camera) != (frame, person, camera) {
                    return Err(Error::parse(
                        path,
                        format!(
                            "line {n}: expected frame {frame}, person {person}, camera {camera}; found {}, {}, {}",
                            r.frame, r.person, r.camera
                        ),
                    ));
                }
                let len = h.num_landmarks;
                if r.mu.len() != len || r.sigma.len() != len || r.p.len() != len {
                    return Err(Error::parse(path, format!("line {n}: expected {len} landmarks")));
                }
                timestamp = r.timestamp;
                cameras.push(
                    r.mu.iter()
                        .zip(&r.sigma)
                        .zip(&r.p)
                        .map(|((mu, &sigma), &p)| LandmarkObservation { mu: Vec2::new(mu[0], mu[1]), sigma, p })
                        .collect(),
                );
            }
            persons.push(PersonObservations { person_id: person, cameras });
        }
        frames.push(FrameObservations { frame, timestamp, persons });
    }
    Ok((info, frames))
}
