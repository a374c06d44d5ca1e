//! Motion file: body parameters per frame and person, ground truth or fitted.

use std::path::Path;

use densemocap_core::body::{BodyModel, BodyParams};
use densemocap_core::observe::PersonMotion;
use densemocap_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{from_hex, to_hex, topology_hash};
use crate::io::{check_version, parse_line, read_lines, LinesWriter, FORMAT_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    model: String,
    topology_hash: String,
    num_betas: usize,
    num_joints: usize,
    fps: f64,
    persons: Vec<u32>,
    num_frames: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    frame: usize,
    person: u32,
    betas: Vec<f64>,
    pose: Vec<[f64; 3]>,
    translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub model: String,
    pub topology_hash: u64,
    pub fps: f64,
    /// Every person has the same number of frames.
    pub persons: Vec<PersonMotion>,
}

impl Motion {
    pub fn new(model: &BodyModel, fps: f64, persons: Vec<PersonMotion>) -> Self {
        Self { model: model.name().to_string(), topology_hash: topology_hash(model), fps, persons }
    }

    pub fn num_frames(&self) -> usize {
        self.persons.first().map_or(0, |p| p.frames.len())
    }

    /// Fails unless the motion was made for `model`'s topology and sizes.
    pub fn check_model(&self, model: &BodyModel, what: &str) -> Result<()> {
        if self.topology_hash != topology_hash(model) {
            return Err(Error::Mismatch(format!("{what} was written for a different topology than model {:?}", model.name())));
        }
        for p in &self.persons {
            for f in &p.frames {
                f.validate(model).map_err(|e| Error::Mismatch(format!("{what}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Vec<Vec<BodyParams>> {
        self.persons.iter().map(|p| p.frames.clone()).collect()
    }
}

pub fn write_motion(path: &Path, motion: &Motion) -> Result<()> {
    let first = motion.persons.first().and_then(|p| p.frames.first());
    let mut w = LinesWriter::create(path)?;
    w.line(&Header {
        format_version: FORMAT_VERSION,
        model: motion.model.clone(),
        topology_hash: to_hex(motion.topology_hash),
        num_betas: first.map_or(0, |p| p.betas.len()),
        num_joints: first.map_or(0, |p| p.pose.len()),
        fps: motion.fps,
        persons: motion.persons.iter().map(|p| p.person_id).collect(),
        num_frames: motion.num_frames(),
    })?;
    for frame in 0..motion.num_frames() {
        for person in &motion.persons {
            let p = &person.frames[frame];
            w.line(&Record {
                frame,
                person: person.person_id,
                betas: p.betas.clone(),
                pose: p.pose.iter().map(|t| [t.x, t.y, t.z]).collect(),
                translation: [p.translation.x, p.translation.y, p.translation.z],
            })?;
        }
    }
    w.finish()
}

pub fn read_motion(path: &Path) -> Result<Motion> {
    let lines = read_lines(path)?;
    let Some((n0, first)) = lines.first() else {
        return Err(Error::parse(path, "empty file"));
    };
    let h: Header = parse_line(path, *n0, first)?;
    check_version(path, h.format_version)?;
    let topology = from_hex(&h.topology_hash).ok_or_else(|| Error::parse(path, "malformed topology_hash"))?;
    let expected = h.num_frames * h.persons.len();
    if lines.len() - 1 != expected {
        return Err(Error::parse(path, format!("expected {expected} records, found {}", lines.len() - 1)));
    }
    let mut persons: Vec<PersonMotion> = h
        .persons
        .iter()
        .map(|&id| PersonMotion { person_id: id, frames: Vec::with_capacity(h.num_frames) })
        .collect();
    let mut records = lines[1..].iter();
    for frame in 0..h.num_frames {
        for person in persons.iter_mut() {
            let (n, line) = records.next().expect("record count checked");
            let r: Record = parse_line(path, *n, line)?;
            if (r.frame, r.person) != (frame, person.person_id) {
                return Err(Error::parse(
                    path,
                    format!("line {n}: expected frame {frame}, person {}; found {}, {}", person.person_id, r.frame, r.person),
                ));
            }
            if r.betas.len() != h.num_betas || r.pose.len() != h.num_joints {
                return Err(Error::parse(path, format!("line {n}: wrong number of betas or joints")));
            }
            person.frames.push(BodyParams {
                betas: r.betas,
                pose: r.pose.iter().map(|t| Vec3::from(*t)).collect(),
                translation: Vec3::from(r.translation),
            });
        }
    }
    Ok(Motion { model: h.model, topology_hash: topology, fps: h.fps, persons })
}
