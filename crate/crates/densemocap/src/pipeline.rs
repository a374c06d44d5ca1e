//! The `synth`, `fit` and `eval` pipelines, shared by the command line and
//! the tests. Synthesis runs frames in parallel, fitting runs persons in
//! parallel; both produce the same bytes for any thread count.

use std::path::{Path, PathBuf};

use densemocap_core::body::BodyModel;
use densemocap_core::camera::Rig;
use densemocap_core::energy::LandmarkBody;
use densemocap_core::fit::{fit_person, person_ids, person_track, FitConfig, FitResult};
use densemocap_core::landmarks::{sample_model_landmarks, LandmarkSet};
use densemocap_core::marker::MarkerSpec;
use densemocap_core::metrics::{evaluate, EvalOptions, MetricsReport};
use densemocap_core::observe::{generate_frame, FrameObservations, FrameTruth, GenerateOptions, PersonMotion};
use densemocap_core::render::Rasterizer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::calibration::write_calibration;
use crate::formats::fitlog::{write_energies, write_summaries, write_trace};
use crate::formats::image::{write_depth, write_pgm};
use crate::formats::landmarks::{read_landmarks, write_landmarks};
use crate::formats::metrics::{frame_lines, write_frame_metrics, write_metrics, MetricsFile};
use crate::formats::model::{load_model, write_model};
use crate::formats::motion::{read_motion, write_motion, Motion};
use crate::formats::observations::{write_observations, ObservationInfo};
use crate::hash::{landmark_hash, topology_hash};
use crate::scene::{LandmarkSource, MotionSource, SceneConfig};

pub const MODEL_FILE: &str = "model.json";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const LANDMARKS_FILE: &str = "landmarks.json";
pub const GT_MOTION_FILE: &str = "motion_gt.jsonl";
pub const OBSERVATIONS_FILE: &str = "observations.jsonl";
pub const FIT_MOTION_FILE: &str = "motion_fit.jsonl";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const SUMMARY_FILE: &str = "convergence.jsonl";
pub const ENERGY_FILE: &str = "energy.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const FRAME_METRICS_FILE: &str = "metrics_frames.jsonl";

/// Run `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::config("threads", e))?;
    Ok(pool.install(f))
}

pub struct Synthesis {
    pub model: BodyModel,
    pub rig: Rig,
    pub landmarks: LandmarkSet,
    pub truth: Motion,
    pub info: ObservationInfo,
    pub observations: Vec<FrameObservations>,
    pub frames: Vec<FrameTruth>,
}

fn scene_landmarks(scene: &SceneConfig, model: &BodyModel, base: &Path) -> Result<LandmarkSet> {
    match &scene.landmarks {
        LandmarkSource::Fps(f) => sample_model_landmarks(model, &f.weights, f.n, f.seed_index)
            .map_err(|e| Error::config("landmarks.fps", e)),
        LandmarkSource::File { path } => read_landmarks(&base.join(path), model),
    }
}

fn scene_motion(scene: &SceneConfig, model: &BodyModel, base: &Path, index: usize) -> Result<PersonMotion> {
    let person = &scene.persons[index];
    let frames = match &person.motion {
        MotionSource::Procedural(m) => m
            .generate(model, scene.frames, scene.fps)
            .map_err(|e| Error::config(&format!("persons[{index}].motion"), e))?,
        MotionSource::File { path } => {
            let path = base.join(path);
            let motion = read_motion(&path)?;
            motion.check_model(model, &path.display().to_string())?;
            let found = motion.persons.into_iter().find(|p| p.person_id == person.id).ok_or_else(|| {
                Error::config(&format!("persons[{index}].motion"), format!("{} has no person {}", path.display(), person.id))
            })?;
            if found.frames.len() < scene.frames {
                return Err(Error::config(
                    &format!("persons[{index}].motion"),
                    format!("{} has {} frames, scene needs {}", path.display(), found.frames.len(), scene.frames),
                ));
            }
            found.frames.into_iter().take(scene.frames).collect()
        }
    };
    Ok(PersonMotion { person_id: person.id, frames })
}

/// Build the scene and generate observations. Relative paths in `scene`
/// resolve against `base`.
pub fn synthesize(scene: &SceneConfig, base: &Path) -> Result<Synthesis> {
    scene.validate()?;
    let model = load_model(&scene.model, base)?;
    let rig = scene.build_rig(base)?;
    let landmarks = scene_landmarks(scene, &model, base)?;
    let motions = (0..scene.persons.len())
        .map(|i| scene_motion(scene, &model, base, i))
        .collect::<Result<Vec<_>>>()?;
    let opts = GenerateOptions {
        noise: scene.noise,
        visibility: scene.visibility,
        visibility_eps: scene.visibility_eps,
        fps: scene.fps,
    };
    let (observations, frames): (Vec<_>, Vec<_>) = (0..scene.frames)
        .into_par_iter()
        .map(|f| generate_frame(&model, &motions, &rig, &landmarks, &opts, f))
        .collect::<densemocap_core::Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let info = ObservationInfo {
        rig: rig.name.clone(),
        num_cameras: rig.len(),
        num_landmarks: landmarks.len(),
        landmark_hash: landmark_hash(&landmarks),
        topology_hash: topology_hash(&model),
        persons: motions.iter().map(|m| m.person_id).collect(),
        fps: scene.fps,
    };
    let truth = Motion::new(&model, scene.fps, motions);
    Ok(Synthesis { model, rig, landmarks, truth, info, observations, frames })
}

pub fn mask_path(out: &Path, frame: usize, camera: usize) -> PathBuf {
    out.join("masks").join(format!("f{frame:05}_c{camera:02}.pgm"))
}

pub fn depth_path(out: &Path, frame: usize, camera: usize) -> PathBuf {
    out.join("depth").join(format!("f{frame:05}_c{camera:02}.dpth"))
}

/// Write every synthesis product into `out`; masks and depth maps only when
/// asked for.
pub fn write_synthesis(out: &Path, s: &Synthesis, masks: bool, depth: bool) -> Result<()> {
    write_model(&out.join(MODEL_FILE), &s.model)?;
    write_calibration(&out.join(CALIBRATION_FILE), &s.rig)?;
    write_landmarks(&out.join(LANDMARKS_FILE), &s.model, &s.landmarks)?;
    write_motion(&out.join(GT_MOTION_FILE), &s.truth)?;
    write_observations(&out.join(OBSERVATIONS_FILE), &s.info, &s.observations)?;
    if masks || depth {
        s.frames.par_iter().enumerate().try_for_each(|(f, truth)| -> Result<()> {
            for (c, cam) in s.rig.cameras.iter().enumerate() {
                let mut r = Rasterizer::new(cam, cam.width, cam.height)?;
                for mesh in &truth.meshes {
                    r.draw(&mesh.vertices, s.model.faces());
                }
                let (d, m) = r.finish();
                if masks {
                    write_pgm(&mask_path(out, f, c), &m)?;
                }
                if depth {
                    write_depth(&depth_path(out, f, c), &d)?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Fails unless the observations were made with this model, landmark set and
/// rig.
pub fn check_fit_inputs(model: &BodyModel, rig: &Rig, landmarks: &LandmarkSet, info: &ObservationInfo) -> Result<()> {
    if info.topology_hash != topology_hash(model) {
        return Err(Error::Mismatch(format!("observations were made for a different topology than model {:?}", model.name())));
    }
    if info.landmark_hash != landmark_hash(landmarks) || info.num_landmarks != landmarks.len() {
        return Err(Error::Mismatch("observations were made with a different landmark set".into()));
    }
    if info.num_cameras != rig.len() {
        return Err(Error::Mismatch(format!(
            "observations have {} cameras, calibration has {}",
            info.num_cameras,
            rig.len()
        )));
    }
    if info.rig != rig.name {
        return Err(Error::Mismatch(format!("observations name rig {:?}, calibration is {:?}", info.rig, rig.name)));
    }
    Ok(())
}

/// Fit every person, persons in parallel.
pub fn fit_observations(
    model: &BodyModel,
    rig: &Rig,
    landmarks: &LandmarkSet,
    observations: &[FrameObservations],
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    rig.validate()?;
    if observations.is_empty() {
        return Err(Error::config("observations", "no frames"));
    }
    let body = LandmarkBody::new(model, landmarks)?;
    let persons = person_ids(observations)
        .into_par_iter()
        .map(|id| {
            let track = person_track(observations, id)?;
            let fit = fit_person(model, &body, rig, &track, config);
            if let Err(e) = &fit {
                log::error!("person {id}: {e}");
            }
            fit
        })
        .collect::<densemocap_core::Result<Vec<_>>>()?;
    Ok(FitResult { persons })
}

pub fn fitted_motion(model: &BodyModel, fps: f64, fit: &FitResult) -> Motion {
    Motion::new(
        model,
        fps,
        fit.persons
            .iter()
            .map(|p| PersonMotion { person_id: p.person_id, frames: p.frames.clone() })
            .collect(),
    )
}

pub fn write_fit(out: &Path, model: &BodyModel, fps: f64, fit: &FitResult) -> Result<()> {
    write_motion(&out.join(FIT_MOTION_FILE), &fitted_motion(model, fps, fit))?;
    write_trace(&out.join(TRACE_FILE), fit)?;
    write_summaries(&out.join(SUMMARY_FILE), fit)?;
    write_energies(&out.join(ENERGY_FILE), fit)
}

/// Compare a fitted motion against ground truth; persons are matched by id.
pub fn evaluate_motions(
    model: &BodyModel,
    gt: &Motion,
    pred: &Motion,
    markers: Option<&[MarkerSpec]>,
    miou: Option<(&Rig, u32, u32)>,
) -> Result<MetricsReport> {
    gt.check_model(model, "ground-truth motion")?;
    pred.check_model(model, "fitted motion")?;
    if gt.num_frames() != pred.num_frames() {
        return Err(Error::Mismatch(format!(
            "ground truth has {} frames, fitted motion {}",
            gt.num_frames(),
            pred.num_frames()
        )));
    }
    let mut pred_params = Vec::with_capacity(gt.persons.len());
    for p in &gt.persons {
        let q = pred
            .persons
            .iter()
            .find(|q| q.person_id == p.person_id)
            .ok_or_else(|| Error::Mismatch(format!("fitted motion has no person {}", p.person_id)))?;
        pred_params.push(q.frames.clone());
    }
    Ok(evaluate(model, &gt.params(), &pred_params, &EvalOptions { markers, miou })?)
}

pub fn write_eval(out: &Path, report: &MetricsReport) -> Result<()> {
    write_metrics(&out.join(METRICS_FILE), &MetricsFile::new(report))?;
    write_frame_metrics(&out.join(FRAME_METRICS_FILE), &frame_lines(report))
}
