//! Multi-view dense-landmark body fitting.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece of
//! the pipeline: an articulated linear-blend-skinned body, pinhole cameras,
//! a z-buffer rasterizer, a synthetic landmark observation generator, the
//! robust fitting energy with its analytic gradient, an L-BFGS minimizer, the
//! three-stage per-sequence fitter and the evaluation metrics.
//!
//! File formats, hashing, the parallel drivers and the command line live in
//! the `densemocap` crate.
#![no_std]

extern crate alloc;

pub mod body;
pub mod camera;
pub mod energy;
mod error;
pub mod fit;
pub mod geom;
pub mod landmarks;
pub mod lbfgs;
pub mod marker;
pub mod metrics;
pub mod motion;
pub mod observe;
pub mod render;
pub mod robust;
pub mod toy;

pub use error::{Error, Result};
pub use geom::{Mat3, Vec2, Vec3};
