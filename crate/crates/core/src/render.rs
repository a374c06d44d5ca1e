//! Z-buffer rasterization of triangle meshes into depth maps and silhouette
//! masks.
//!
//! Pixel `(i, j)` is sampled at its center `(i + 0.5, j + 0.5)` in image
//! coordinates; the origin is the top-left image corner. Stored depth is
//! camera-space `z`, interpolated perspective-correctly. Faces are not culled.
//! Faces with any vertex at or behind the camera plane are skipped rather than
//! clipped.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::camera::{Camera, MIN_DEPTH};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Default depth slack for vertex visibility, meters.
pub const DEFAULT_VISIBILITY_EPS: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    /// Row-major, `+∞` where nothing was drawn.
    pub depth: Vec<f64>,
}

impl DepthMap {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            depth: vec![f64::INFINITY; width as usize * height as usize],
        }
    }

    pub fn at(&self, x: u32, y: u32) -> f64 {
        self.depth[y as usize * self.width as usize + x as usize]
    }

    pub fn mask(&self) -> SilhouetteMask {
        SilhouetteMask {
            width: self.width,
            height: self.height,
            bits: self.depth.iter().map(|d| d.is_finite()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl SilhouetteMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Accumulates any number of meshes into one depth buffer for one camera.
#[derive(Debug, Clone)]
pub struct Rasterizer<'a> {
    camera: &'a Camera,
    scale_x: f64,
    scale_y: f64,
    depth: DepthMap,
}

impl<'a> Rasterizer<'a> {
    /// `width × height` may differ from the camera's native image size; pixel
    /// coordinates are rescaled accordingly.
    pub fn new(camera: &'a Camera, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroResolution);
        }
        Ok(Self {
            camera,
            scale_x: width as f64 / camera.width as f64,
            scale_y: height as f64 / camera.height as f64,
            depth: DepthMap::empty(width, height),
        })
    }

    /// Screen position (in output pixels) and depth of a world point.
    fn to_screen(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let c = self.camera.to_camera(p);
        if !(c.z > MIN_DEPTH) {
            return None;
        }
        let u = (self.camera.fx * c.x / c.z + self.camera.cx) * self.scale_x;
        let v = (self.camera.fy * c.y / c.z + self.camera.cy) * self.scale_y;
        Some((u, v, c.z))
    }

    pub fn draw(&mut self, vertices: &[Vec3], faces: &[[usize; 3]]) {
        let screen: Vec<Option<(f64, f64, f64)>> =
            vertices.iter().map(|p| self.to_screen(p)).collect();
        for face in faces {
            let (Some(a), Some(b), Some(c)) = (screen[face[0]], screen[face[1]], screen[face[2]])
            else {
                continue;
            };
            self.draw_triangle(a, b, c);
        }
    }

    fn draw_triangle(&mut self, a: (f64, f64, f64), b: (f64, f64, f64), c: (f64, f64, f64)) {
        let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let w = self.depth.width as i64;
        let h = self.depth.height as i64;
        let min_x = a.0.min(b.0).min(c.0);
        let max_x = a.0.max(b.0).max(c.0);
        let min_y = a.1.min(b.1).min(c.1);
        let max_y = a.1.max(b.1).max(c.1);
        let x0 = ((min_x - 0.5).floor() as i64).max(0);
        let x1 = ((max_x - 0.5).ceil() as i64).min(w - 1);
        let y0 = ((min_y - 0.5).floor() as i64).max(0);
        let y1 = ((max_y - 0.5).ceil() as i64).min(h - 1);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let inv_area = 1.0 / area;
        let (iza, izb, izc) = (1.0 / a.2, 1.0 / b.2, 1.0 / c.2);
        for y in y0..=y1 {
            let py = y as f64 + 0.5;
            for x in x0..=x1 {
                let px = x as f64 + 0.5;
                // barycentric weights of a, b, c
                let la = ((b.0 - px) * (c.1 - py) - (b.1 - py) * (c.0 - px)) * inv_area;
                let lb = ((c.0 - px) * (a.1 - py) - (c.1 - py) * (a.0 - px)) * inv_area;
                let lc = ((a.0 - px) * (b.1 - py) - (a.1 - py) * (b.0 - px)) * inv_area;
                if la < 0.0 || lb < 0.0 || lc < 0.0 {
                    continue;
                }
                let z = 1.0 / (la * iza + lb * izb + lc * izc);
                let slot = &mut self.depth.depth[(y * w + x) as usize];
                if z < *slot {
                    *slot = z;
                }
            }
        }
    }

    pub fn finish(self) -> (DepthMap, SilhouetteMask) {
        let mask = self.depth.mask();
        (self.depth, mask)
    }
}

pub fn rasterize(
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    camera: &Camera,
    width: u32,
    height: u32,
) -> Result<(DepthMap, SilhouetteMask)> {
    let mut r = Rasterizer::new(camera, width, height)?;
    r.draw(vertices, faces);
    Ok(r.finish())
}

/// A vertex is visible when it projects inside the image and its depth is at
/// most the depth map value at its pixel plus `eps`.
pub fn vertex_visibility(
    vertices: &[Vec3],
    camera: &Camera,
    depth: &DepthMap,
    eps: f64,
) -> Vec<bool> {
    let sx = depth.width as f64 / camera.width as f64;
    let sy = depth.height as f64 / camera.height as f64;
    vertices
        .iter()
        .map(|p| {
            let Ok((px, z)) = camera.project(p) else {
                return false;
            };
            let u = (px.x * sx).floor();
            let v = (px.y * sy).floor();
            if !(u >= 0.0 && v >= 0.0 && u < depth.width as f64 && v < depth.height as f64) {
                return false;
            }
            z <= depth.at(u as u32, v as u32) + eps
        })
        .collect()
}

/// `|a ∧ b| / |a ∨ b|`, 1 when both are empty.
pub fn silhouette_iou(a: &SilhouetteMask, b: &SilhouetteMask) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            what: "mask pixels",
            expected: a.bits.len(),
            got: b.bits.len(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += (*x && *y) as usize;
        union += (*x || *y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
