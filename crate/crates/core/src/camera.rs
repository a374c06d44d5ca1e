//! Pinhole cameras without distortion.
//!
//! Extrinsics are world-to-camera (`x_cam = R x_world + t`), the camera looks
//! down its +z axis and the image origin is the top-left corner with y
//! pointing down.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::cmp::Ordering;
use core::f64::consts::TAU;

use nalgebra::SymmetricEigen;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec2, Vec3};

/// Points closer to the camera plane than this cannot be projected.
pub const MIN_DEPTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub width: u32,
    pub height: u32,
}

/// Intrinsics and image size shared by generated rigs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    /// Square pixels, principal point at the image center, horizontal field of
    /// view in radians.
    pub fn from_fov(width: u32, height: u32, horizontal_fov: f64) -> Self {
        let f = 0.5 * width as f64 / (0.5 * horizontal_fov).tan();
        Self {
            fx: f,
            fy: f,
            cx: 0.5 * width as f64,
            cy: 0.5 * height as f64,
            width,
            height,
        }
    }
}

impl Default for Intrinsics {
    /// 2056×1504 with a 60° horizontal field of view.
    fn default() -> Self {
        Self::from_fov(2056, 1504, 60f64.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, s: f64) -> Vec3 {
        self.origin + self.direction * s
    }

    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let d = p - self.origin;
        (d - self.direction * d.dot(&self.direction)).norm()
    }
}

/// Projection of a point with its Jacobian.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProjectionJacobian {
    pub pixel: Vec2,
    /// ∂pixel/∂world_point, rows u and v.
    pub du: Vec3,
    pub dv: Vec3,
}

impl Camera {
    pub fn new(intrinsics: &Intrinsics, rotation: Mat3, translation: Vec3) -> Result<Self> {
        let cam = Self {
            fx: intrinsics.fx,
            fy: intrinsics.fy,
            cx: intrinsics.cx,
            cy: intrinsics.cy,
            rotation,
            translation,
            width: intrinsics.width,
            height: intrinsics.height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive, got {} {}",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera(String::from("image size must be nonzero")));
        }
        let gram = self.rotation.transpose() * self.rotation;
        if (gram - Mat3::identity()).abs().max() > 1e-8
            || (self.rotation.determinant() - 1.0).abs() > 1e-8
        {
            return Err(Error::InvalidCamera(String::from(
                "rotation is not a proper orthonormal matrix",
            )));
        }
        if !self.translation.iter().all(|c| c.is_finite())
            || !self.cx.is_finite()
            || !self.cy.is_finite()
        {
            return Err(Error::InvalidCamera(String::from("non-finite parameter")));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn to_camera(&self, point: &Vec3) -> Vec3 {
        self.rotation * point + self.translation
    }

    /// Pixel and depth of a world point.
    pub fn project(&self, point: &Vec3) -> Result<(Vec2, f64)> {
        let p = self.to_camera(point);
        if !(p.z > MIN_DEPTH) {
            return Err(Error::BehindCamera { depth: p.z });
        }
        Ok((
            Vec2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy),
            p.z,
        ))
    }

    pub(crate) fn project_with_jacobian(&self, point: &Vec3) -> Option<ProjectionJacobian> {
        let p = self.to_camera(point);
        if !(p.z > MIN_DEPTH) {
            return None;
        }
        let iz = 1.0 / p.z;
        let x = p.x * iz;
        let y = p.y * iz;
        let du_cam = Vec3::new(self.fx * iz, 0.0, -self.fx * x * iz);
        let dv_cam = Vec3::new(0.0, self.fy * iz, -self.fy * y * iz);
        Some(ProjectionJacobian {
            pixel: Vec2::new(self.fx * x + self.cx, self.fy * y + self.cy),
            du: self.rotation.transpose() * du_cam,
            dv: self.rotation.transpose() * dv_cam,
        })
    }

    /// Ray from the camera center through a pixel.
    pub fn backproject(&self, pixel: &Vec2) -> Ray {
        let dir_cam = Vec3::new(
            (pixel.x - self.cx) / self.fx,
            (pixel.y - self.cy) / self.fy,
            1.0,
        );
        Ray::new(self.center(), self.rotation.transpose() * dir_cam)
    }

    /// Camera at `position` looking at `target`, world up `+z`.
    pub fn look_at(intrinsics: &Intrinsics, position: Vec3, target: Vec3) -> Result<Self> {
        let forward = (target - position)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidCamera(String::from("camera position equals target")))?;
        let right = forward
            .cross(&Vec3::z())
            .try_normalize(1e-9)
            .ok_or_else(|| Error::InvalidCamera(String::from("view direction is vertical")))?;
        let down = forward.cross(&right);
        let rotation = Mat3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Camera::new(intrinsics, rotation, -(rotation * position))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rig {
    pub name: String,
    pub cameras: Vec<Camera>,
    pub names: Vec<String>,
}

impl Rig {
    pub fn new(name: impl Into<String>, cameras: Vec<Camera>, names: Vec<String>) -> Result<Self> {
        let rig = Self {
            name: name.into(),
            cameras,
            names,
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cameras.is_empty() {
            return Err(Error::InvalidCamera(String::from("rig has no cameras")));
        }
        if self.cameras.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                what: "camera names",
                expected: self.cameras.len(),
                got: self.names.len(),
            });
        }
        for (i, n) in self.names.iter().enumerate() {
            if self.names[..i].contains(n) {
                return Err(Error::InvalidCamera(format!("duplicate camera name {n}")));
            }
        }
        for (cam, name) in self.cameras.iter().zip(&self.names) {
            cam.validate()
                .map_err(|e| Error::InvalidCamera(format!("{name}: {e}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }
}

/// `n` cameras evenly spaced on a horizontal circle of `radius` around
/// `target`, at `height` above the ground, all looking at `target`.
pub fn ring_rig(n: usize, radius: f64, height: f64, target: Vec3) -> Result<Rig> {
    ring_rig_with(n, radius, height, target, &Intrinsics::default())
}

pub fn ring_rig_with(
    n: usize,
    radius: f64,
    height: f64,
    target: Vec3,
    intrinsics: &Intrinsics,
) -> Result<Rig> {
    if n == 0 {
        return Err(Error::InvalidCamera(String::from("ring needs at least one camera")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidCamera(format!("ring radius must be positive, got {radius}")));
    }
    let mut cameras = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    for i in 0..n {
        let angle = TAU * i as f64 / n as f64;
        let (s, c) = angle.sin_cos();
        let position = Vec3::new(target.x + radius * c, target.y + radius * s, height);
        cameras.push(Camera::look_at(intrinsics, position, target)?);
        names.push(format!("cam{i:02}"));
    }
    Rig::new(format!("ring{n}"), cameras, names)
}

fn cmp_vec(a: &Vec3, b: &Vec3) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Least-squares point closest to all rays (sum of squared perpendicular
/// distances). The result does not depend on the order of `rays`.
pub fn triangulate_midpoint(rays: &[Ray]) -> Result<Vec3> {
    if rays.len() < 2 {
        return Err(Error::TooFewRays {
            needed: 2,
            got: rays.len(),
        });
    }
    let mut sorted: Vec<&Ray> = rays.iter().collect();
    sorted.sort_by(|a, b| cmp_vec(&a.origin, &b.origin).then(cmp_vec(&a.direction, &b.direction)));
    let mut a = Mat3::zeros();
    let mut b = Vec3::zeros();
    for ray in sorted {
        let proj = Mat3::identity() - ray.direction * ray.direction.transpose();
        a += proj;
        b += proj * ray.origin;
    }
    let eig = SymmetricEigen::new(a);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-10 * max) {
        return Err(Error::ParallelRays);
    }
    a.cholesky()
        .map(|c| c.solve(&b))
        .ok_or(Error::ParallelRays)
}

/// Projected pixels of all points, `None` where a point is behind the camera.
pub fn project_all(camera: &Camera, points: &[Vec3]) -> Vec<Option<(Vec2, f64)>> {
    points.iter().map(|p| camera.project(p).ok()).collect()
}

/// Whether a pixel lies inside the camera's image.
pub fn in_image(camera: &Camera, pixel: &Vec2) -> bool {
    pixel.x >= 0.0
        && pixel.y >= 0.0
        && pixel.x < camera.width as f64
        && pixel.y < camera.height as f64
}
