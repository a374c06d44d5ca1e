//! Evaluation metrics. Distances are in meters; nothing is aligned before
//! comparison, so global translation errors count.
//!
//! Sequences are indexed `[person][frame]`. Means run uniformly over every
//! (person, frame, element) triple.

use alloc::vec;
use alloc::vec::Vec;

use crate::body::{BodyModel, BodyParams, Part, PosedBody};
use crate::camera::Rig;
use crate::error::{check_len, Error, Result};
use crate::geom::Vec3;
use crate::marker::{regress_marker, MarkerSpec};
use crate::render::{silhouette_iou, Rasterizer};

fn check_shape<T>(what: &'static str, a: &[Vec<T>], b: &[Vec<T>]) -> Result<()> {
    check_len(what, a.len(), b.len())?;
    for (x, y) in a.iter().zip(b) {
        check_len(what, x.len(), y.len())?;
    }
    Ok(())
}

/// Mean distance between matching points, frame by frame. `gt[f][i]`.
fn per_frame_mean(gt: &[Vec<Vec3>], pred: &[Vec<Vec3>], keep: Option<&[bool]>) -> Result<Vec<(f64, usize)>> {
    check_shape("points", gt, pred)?;
    Ok(gt
        .iter()
        .zip(pred)
        .map(|(g, p)| {
            let mut sum = 0.0;
            let mut n = 0;
            for (i, (a, b)) in g.iter().zip(p).enumerate() {
                if keep.is_none_or(|k| k[i]) {
                    sum += (a - b).norm();
                    n += 1;
                }
            }
            (sum, n)
        })
        .collect())
}

fn mean_of(per_frame: &[(f64, usize)]) -> f64 {
    let (s, n) = per_frame
        .iter()
        .fold((0.0, 0usize), |(s, n), (fs, fn_)| (s + fs, n + fn_));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Mean per-joint position error over frames, `gt[frame][joint]`.
pub fn mpjpe(gt: &[Vec<Vec3>], pred: &[Vec<Vec3>]) -> Result<f64> {
    per_frame_mean(gt, pred, None).map(|f| mean_of(&f))
}

/// Mean per-vertex error over frames, `gt[frame][vertex]`.
pub fn pve(gt: &[Vec<Vec3>], pred: &[Vec<Vec3>]) -> Result<f64> {
    per_frame_mean(gt, pred, None).map(|f| mean_of(&f))
}

/// Mean marker distance, every marker regressed on both meshes of each frame.
pub fn heldout_marker_error(
    faces: &[[usize; 3]],
    gt: &[Vec<Vec3>],
    pred: &[Vec<Vec3>],
    specs: &[MarkerSpec],
) -> Result<f64> {
    heldout_marker_per_frame(faces, gt, pred, specs).map(|f| mean_of(&f))
}

fn heldout_marker_per_frame(
    faces: &[[usize; 3]],
    gt: &[Vec<Vec3>],
    pred: &[Vec<Vec3>],
    specs: &[MarkerSpec],
) -> Result<Vec<(f64, usize)>> {
    check_shape("vertices", gt, pred)?;
    gt.iter()
        .zip(pred)
        .map(|(g, p)| {
            let mut sum = 0.0;
            for s in specs {
                sum += (regress_marker(g, faces, s)? - regress_marker(p, faces, s)?).norm();
            }
            Ok((sum, specs.len()))
        })
        .collect()
}

/// Mean silhouette IoU over frames and cameras. `a[frame]` holds the vertex
/// sets of every person present in that frame; all persons are drawn into
/// one mask.
pub fn sequence_miou(
    faces: &[[usize; 3]],
    a: &[Vec<Vec<Vec3>>],
    b: &[Vec<Vec<Vec3>>],
    rig: &Rig,
    width: u32,
    height: u32,
) -> Result<f64> {
    sequence_miou_per_frame(faces, a, b, rig, width, height).map(|f| {
        if f.is_empty() {
            1.0
        } else {
            f.iter().sum::<f64>() / f.len() as f64
        }
    })
}

/// Per-frame mean IoU over cameras.
pub fn sequence_miou_per_frame(
    faces: &[[usize; 3]],
    a: &[Vec<Vec<Vec3>>],
    b: &[Vec<Vec<Vec3>>],
    rig: &Rig,
    width: u32,
    height: u32,
) -> Result<Vec<f64>> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroResolution);
    }
    check_len("frames", a.len(), b.len())?;
    let mask = |cam, meshes: &[Vec<Vec3>]| -> Result<_> {
        let mut r = Rasterizer::new(cam, width, height)?;
        for m in meshes {
            r.draw(m, faces);
        }
        Ok(r.finish().1)
    };
    a.iter()
        .zip(b)
        .map(|(fa, fb)| {
            let mut sum = 0.0;
            for cam in &rig.cameras {
                sum += silhouette_iou(&mask(cam, fa)?, &mask(cam, fb)?)?;
            }
            Ok(sum / rig.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartError {
    pub part: Part,
    pub mpjpe: f64,
    pub pve: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub frame: usize,
    pub mpjpe: f64,
    pub pve: f64,
    pub heldout_marker: Option<f64>,
    pub miou: Option<f64>,
}

/// All metrics, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mpjpe: f64,
    pub pve: f64,
    /// Parts present on the model, in `Part::ALL` order. A part with no
    /// joints reports 0 MPJPE.
    pub per_part: Vec<PartError>,
    pub heldout_marker: Option<f64>,
    pub miou: Option<f64>,
    pub per_frame: Vec<FrameMetrics>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions<'a> {
    pub markers: Option<&'a [MarkerSpec]>,
    /// Rig and mask resolution for mIoU.
    pub miou: Option<(&'a Rig, u32, u32)>,
}

/// Posed meshes `[person][frame]`.
pub fn pose_sequences(model: &BodyModel, params: &[Vec<BodyParams>]) -> Result<Vec<Vec<PosedBody>>> {
    params
        .iter()
        .map(|seq| seq.iter().map(|p| model.lbs_forward(p)).collect())
        .collect()
}

/// Compare two `[person][frame]` parameter sequences.
pub fn evaluate(
    model: &BodyModel,
    gt: &[Vec<BodyParams>],
    pred: &[Vec<BodyParams>],
    opts: &EvalOptions,
) -> Result<MetricsReport> {
    check_shape("frames", gt, pred)?;
    let frames = gt.first().map_or(0, |s| s.len());
    for s in gt {
        check_len("frames", frames, s.len())?;
    }
    let gt = pose_sequences(model, gt)?;
    let pred = pose_sequences(model, pred)?;
    let joints = |s: &[PosedBody]| s.iter().map(|b| b.joints.clone()).collect::<Vec<_>>();
    let verts = |s: &[PosedBody]| s.iter().map(|b| b.vertices.clone()).collect::<Vec<_>>();
    let gt_j: Vec<_> = gt.iter().map(|s| joints(s)).collect();
    let pr_j: Vec<_> = pred.iter().map(|s| joints(s)).collect();
    let gt_v: Vec<_> = gt.iter().map(|s| verts(s)).collect();
    let pr_v: Vec<_> = pred.iter().map(|s| verts(s)).collect();

    // [person] → [frame] → (sum, n); merged per frame across persons
    let merge = |per_person: Vec<Vec<(f64, usize)>>| -> Vec<(f64, usize)> {
        let mut out = vec![(0.0, 0usize); frames];
        for seq in per_person {
            for (o, (s, n)) in out.iter_mut().zip(seq) {
                o.0 += s;
                o.1 += n;
            }
        }
        out
    };
    let collect = |a: &[Vec<Vec<Vec3>>], b: &[Vec<Vec<Vec3>>], keep: Option<&[bool]>| -> Result<Vec<(f64, usize)>> {
        let per = a
            .iter()
            .zip(b)
            .map(|(x, y)| per_frame_mean(x, y, keep))
            .collect::<Result<Vec<_>>>()?;
        Ok(merge(per))
    };

    let j_frames = collect(&gt_j, &pr_j, None)?;
    let v_frames = collect(&gt_v, &pr_v, None)?;

    let joint_parts = model.joint_parts();
    let vertex_parts: Vec<Part> = model
        .part_labels()
        .map_or_else(|| vec![Part::Body; model.num_vertices()], |l| l.to_vec());
    let mut per_part = Vec::new();
    for part in Part::ALL {
        let jk: Vec<bool> = joint_parts.iter().map(|p| *p == part).collect();
        let vk: Vec<bool> = vertex_parts.iter().map(|p| *p == part).collect();
        if !vk.contains(&true) && !jk.contains(&true) {
            continue;
        }
        per_part.push(PartError {
            part,
            mpjpe: mean_of(&collect(&gt_j, &pr_j, Some(&jk))?),
            pve: mean_of(&collect(&gt_v, &pr_v, Some(&vk))?),
        });
    }

    let marker_frames = match opts.markers {
        Some(specs) => {
            let per = gt_v
                .iter()
                .zip(&pr_v)
                .map(|(a, b)| heldout_marker_per_frame(model.faces(), a, b, specs))
                .collect::<Result<Vec<_>>>()?;
            Some(merge(per))
        }
        None => None,
    };
    let miou_frames = match opts.miou {
        Some((rig, w, h)) => {
            let by_frame = |v: &[Vec<Vec<Vec3>>]| -> Vec<Vec<Vec<Vec3>>> {
                (0..frames).map(|f| v.iter().map(|s| s[f].clone()).collect()).collect()
            };
            Some(sequence_miou_per_frame(model.faces(), &by_frame(&gt_v), &by_frame(&pr_v), rig, w, h)?)
        }
        None => None,
    };

    let per_frame = (0..frames)
        .map(|f| FrameMetrics {
            frame: f,
            mpjpe: mean_of(&j_frames[f..=f]),
            pve: mean_of(&v_frames[f..=f]),
            heldout_marker: marker_frames.as_ref().map(|m| mean_of(&m[f..=f])),
            miou: miou_frames.as_ref().map(|m| m[f]),
        })
        .collect();
    Ok(MetricsReport {
        mpjpe: mean_of(&j_frames),
        pve: mean_of(&v_frames),
        per_part,
        heldout_marker: marker_frames.as_ref().map(|m| mean_of(m)),
        miou: miou_frames.map(|m| {
            if m.is_empty() {
                1.0
            } else {
                m.iter().sum::<f64>() / m.len() as f64
            }
        }),
        per_frame,
    })
}
