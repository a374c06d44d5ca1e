//! Built-in procedural "stick body": ten joints, a closed tube per bone and
//! four shape directions. Lets everything run without external assets.
//!
//! World frame is z-up; the body stands at the origin with its arms hanging
//! along its sides.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;

use crate::body::{BodyModel, BodyModelParts, Part};
use crate::geom::Vec3;

pub const JOINT_NAMES: [&str; 10] = [
    "pelvis",
    "spine",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
];

const PARENTS: [Option<usize>; 10] = [
    None,
    Some(0),
    Some(1),
    Some(2),
    Some(1),
    Some(4),
    Some(5),
    Some(1),
    Some(7),
    Some(8),
];

const RING_SIZE: usize = 10;
const RING_SPACING: f64 = 0.04;
const BLEND_LENGTH: f64 = 0.05;
const SHOULDER_X: f64 = 0.21;

struct Segment {
    joint: usize,
    start: [f64; 3],
    end: [f64; 3],
    radius: f64,
    part: Part,
}

fn segments() -> [Segment; 10] {
    let arm = |joint: usize, sign: f64, z0: f64, z1: f64, radius: f64, part: Part| Segment {
        joint,
        start: [sign * SHOULDER_X, 0.0, z0],
        end: [sign * SHOULDER_X, 0.0, z1],
        radius,
        part,
    };
    let axial = |joint: usize, z0: f64, z1: f64, radius: f64, part: Part| Segment {
        joint,
        start: [0.0, 0.0, z0],
        end: [0.0, 0.0, z1],
        radius,
        part,
    };
    [
        axial(0, 0.85, 1.25, 0.13, Part::Body),
        axial(1, 1.25, 1.48, 0.15, Part::Body),
        axial(2, 1.48, 1.58, 0.05, Part::Body),
        axial(3, 1.58, 1.82, 0.10, Part::Head),
        arm(4, 1.0, 1.44, 1.16, 0.045, Part::Body),
        arm(5, 1.0, 1.16, 0.90, 0.04, Part::Body),
        arm(6, 1.0, 0.90, 0.74, 0.035, Part::LeftHand),
        arm(7, -1.0, 1.44, 1.16, 0.045, Part::Body),
        arm(8, -1.0, 1.16, 0.90, 0.04, Part::Body),
        arm(9, -1.0, 0.90, 0.74, 0.035, Part::RightHand),
    ]
}

fn is_left_arm(joint: usize) -> bool {
    (4..=6).contains(&joint)
}

fn is_right_arm(joint: usize) -> bool {
    (7..=9).contains(&joint)
}

/// Raw arrays of the stick body, before validation.
pub fn stick_body_parts() -> BodyModelParts {
    let k = JOINT_NAMES.len();
    let mut template = Vec::new();
    let mut faces = Vec::new();
    let mut weights: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    // axis point each vertex was generated around, for the girth direction
    let mut centers = Vec::new();
    let mut owners = Vec::new();
    let mut regressor = vec![vec![0.0; 0]; k];
    let mut regressor_members: Vec<Vec<usize>> = vec![Vec::new(); k];

    for seg in segments() {
        let start = Vec3::from(seg.start);
        let end = Vec3::from(seg.end);
        let axis = (end - start).normalize();
        let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (helper - axis * helper.dot(&axis)).normalize();
        let e2 = axis.cross(&e1);
        let length = (end - start).norm();
        let rings = ((length / RING_SPACING).ceil() as usize + 1).max(3);
        let parent = PARENTS[seg.joint];
        let weight_row = |dist: f64| -> Vec<f64> {
            let mut row = vec![0.0; k];
            match parent {
                Some(p) if dist < BLEND_LENGTH => {
                    let own = 0.5 + 0.5 * dist / BLEND_LENGTH;
                    row[seg.joint] = own;
                    row[p] = 1.0 - own;
                }
                _ => row[seg.joint] = 1.0,
            }
            row
        };
        let base = template.len();
        for i in 0..rings {
            let s = i as f64 / (rings - 1) as f64;
            let center = start + (end - start) * s;
            for kk in 0..RING_SIZE {
                let phi = TAU * kk as f64 / RING_SIZE as f64;
                let (sn, cs) = phi.sin_cos();
                if i == 0 {
                    regressor_members[seg.joint].push(template.len());
                }
                template.push(center + (e1 * cs + e2 * sn) * seg.radius);
                weights.push(weight_row(s * length));
                labels.push(seg.part);
                centers.push(center);
                owners.push(seg.joint);
            }
        }
        let cap_start = template.len();
        template.push(start - axis * (0.6 * seg.radius));
        weights.push(weight_row(0.0));
        labels.push(seg.part);
        centers.push(start);
        owners.push(seg.joint);
        let cap_end = template.len();
        template.push(end + axis * (0.6 * seg.radius));
        weights.push(weight_row(length));
        labels.push(seg.part);
        centers.push(end);
        owners.push(seg.joint);

        let idx = |ring: usize, kk: usize| base + ring * RING_SIZE + kk % RING_SIZE;
        for i in 0..rings - 1 {
            for kk in 0..RING_SIZE {
                faces.push([idx(i, kk), idx(i, kk + 1), idx(i + 1, kk + 1)]);
                faces.push([idx(i, kk), idx(i + 1, kk + 1), idx(i + 1, kk)]);
            }
        }
        for kk in 0..RING_SIZE {
            faces.push([cap_start, idx(0, kk + 1), idx(0, kk)]);
            faces.push([cap_end, idx(rings - 1, kk), idx(rings - 1, kk + 1)]);
        }
    }

    let v = template.len();
    for (j, members) in regressor_members.iter().enumerate() {
        let mut row = vec![0.0; v];
        let w = 1.0 / members.len() as f64;
        for &m in members {
            row[m] = w;
        }
        regressor[j] = row;
    }

    let left_shoulder = Vec3::new(SHOULDER_X, 0.0, 1.44);
    let right_shoulder = Vec3::new(-SHOULDER_X, 0.0, 1.44);
    let stature: Vec<Vec3> = template.iter().map(|p| Vec3::new(0.0, 0.0, 0.05 * p.z)).collect();
    let girth: Vec<Vec3> = template
        .iter()
        .zip(&centers)
        .map(|(p, c)| (p - c) * 0.15)
        .collect();
    let arm_length: Vec<Vec3> = template
        .iter()
        .zip(&owners)
        .map(|(p, &j)| {
            if is_left_arm(j) {
                (p - left_shoulder) * 0.08
            } else if is_right_arm(j) {
                (p - right_shoulder) * 0.08
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    let shoulder_width: Vec<Vec3> = owners
        .iter()
        .map(|&j| {
            if is_left_arm(j) {
                Vec3::new(0.03, 0.0, 0.0)
            } else if is_right_arm(j) {
                Vec3::new(-0.03, 0.0, 0.0)
            } else {
                Vec3::zeros()
            }
        })
        .collect();

    BodyModelParts {
        name: "stick_body".to_string(),
        parents: PARENTS.to_vec(),
        joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
        template,
        faces,
        joint_regressor: regressor,
        skinning_weights: weights,
        shape_dirs: vec![stature, girth, arm_length, shoulder_width],
        part_labels: Some(labels),
    }
}

pub fn stick_body() -> BodyModel {
    BodyModel::new(stick_body_parts()).expect("built-in body is valid")
}
