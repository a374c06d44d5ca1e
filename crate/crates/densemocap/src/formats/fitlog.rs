//! Convergence trace, per-stage summaries and per-frame energies of a fit.

use std::path::Path;

use densemocap_core::energy::EnergyBreakdown;
use densemocap_core::fit::{FitResult, StageSummary, TraceRecord};
use densemocap_core::lbfgs::Termination;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{parse_line, read_lines, LinesWriter};

/// One L-BFGS iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLine {
    pub person: u32,
    pub stage: u8,
    pub frame: usize,
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

impl From<&TraceRecord> for TraceLine {
    fn from(t: &TraceRecord) -> Self {
        Self {
            person: t.person_id,
            stage: t.stage,
            frame: t.frame,
            iteration: t.iteration,
            objective: t.objective,
            gradient_norm: t.gradient_norm,
            step: t.step,
        }
    }
}

/// How one stage ended on one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryLine {
    pub person: u32,
    pub stage: u8,
    pub frame: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub objective: f64,
    pub gradient_norm: f64,
    pub behind_camera: usize,
}

impl SummaryLine {
    fn new(person: u32, s: &StageSummary) -> Self {
        Self {
            person,
            stage: s.stage,
            frame: s.frame,
            iterations: s.iterations,
            termination: s.termination,
            objective: s.objective,
            gradient_norm: s.gradient_norm,
            behind_camera: s.behind_camera,
        }
    }
}

/// Final-stage energy terms of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyLine {
    pub person: u32,
    pub frame: usize,
    pub e_ldmks: f64,
    pub e_shape: f64,
    pub e_pose: f64,
    pub e_temp: f64,
    pub total: f64,
}

impl EnergyLine {
    fn new(person: u32, frame: usize, e: &EnergyBreakdown) -> Self {
        Self {
            person,
            frame,
            e_ldmks: e.e_ldmks,
            e_shape: e.e_shape,
            e_pose: e.e_pose,
            e_temp: e.e_temp,
            total: e.total,
        }
    }
}

fn write_all<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = LinesWriter::create(path)?;
    for item in items {
        w.line(&item)?;
    }
    w.finish()
}

fn read_all<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_lines(path)?.iter().map(|(n, l)| parse_line(path, *n, l)).collect()
}

pub fn write_trace(path: &Path, fit: &FitResult) -> Result<()> {
    write_all(path, fit.persons.iter().flat_map(|p| p.trace.iter().map(TraceLine::from)))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>> {
    read_all(path)
}

pub fn write_summaries(path: &Path, fit: &FitResult) -> Result<()> {
    write_all(
        path,
        fit.persons.iter().flat_map(|p| p.summaries.iter().map(|s| SummaryLine::new(p.person_id, s))),
    )
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryLine>> {
    read_all(path)
}

pub fn write_energies(path: &Path, fit: &FitResult) -> Result<()> {
    write_all(
        path,
        fit.persons
            .iter()
            .flat_map(|p| p.energies.iter().enumerate().map(|(f, e)| EnergyLine::new(p.person_id, f, e))),
    )
}

pub fn read_energies(path: &Path) -> Result<Vec<EnergyLine>> {
    read_all(path)
}
