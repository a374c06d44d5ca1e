//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use densemocap_core::camera::Camera;
use densemocap_core::{Mat3, Vec2, Vec3};

/// Möller–Trumbore. Returns the ray parameter of the hit, if any, with
/// `origin + t·dir` on the triangle and `t > 0`.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-15 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

/// Camera center and the world direction through an image point, scaled so
/// that the ray parameter equals camera-space depth.
pub fn pixel_ray(cam: &Camera, pixel: &Vec2) -> (Vec3, Vec3) {
    let rt = cam.rotation.transpose();
    let origin = -(rt * cam.translation);
    let d_cam = Vec3::new((pixel.x - cam.cx) / cam.fx, (pixel.y - cam.cy) / cam.fy, 1.0);
    (origin, rt * d_cam)
}

/// Nearest hit depth along a pixel ray, skipping the listed faces.
pub fn raycast_depth(
    cam: &Camera,
    pixel: &Vec2,
    verts: &[Vec3],
    faces: &[[usize; 3]],
    skip: impl Fn(usize) -> bool,
) -> f64 {
    let (o, d) = pixel_ray(cam, pixel);
    let mut best = f64::INFINITY;
    for (fi, f) in faces.iter().enumerate() {
        if skip(fi) {
            continue;
        }
        if let Some(t) = ray_triangle(&o, &d, &verts[f[0]], &verts[f[1]], &verts[f[2]]) {
            best = best.min(t);
        }
    }
    best
}

/// Projection through an explicit 3×4 matrix `K [R | t]`.
pub fn project_via_matrix(cam: &Camera, x: &Vec3) -> Vec2 {
    let k = Mat3::new(cam.fx, 0.0, cam.cx, 0.0, cam.fy, cam.cy, 0.0, 0.0, 1.0);
    let mut rt = nalgebra::Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&cam.rotation);
    rt.set_column(3, &cam.translation);
    let p = k * rt;
    let h = p * nalgebra::Vector4::new(x.x, x.y, x.z, 1.0);
    Vec2::new(h.x / h.z, h.y / h.z)
}

/// Squared distance from a point to a line through `o` with direction `d`.
pub fn line_dist2(x: &Vec3, o: &Vec3, d: &Vec3) -> f64 {
    let u = d.normalize();
    let r = x - o;
    (r - u * r.dot(&u)).norm_squared()
}
