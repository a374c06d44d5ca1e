//! Rotation helpers: the axis-angle exponential map, its derivative, and the
//! geodesic angle between rotations.

use nalgebra::{Matrix3, Vector2, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this angle the trigonometric coefficients switch to their Taylor
/// series.
const SMALL_ANGLE: f64 = 1e-2;

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Coefficients of `R = I + a K + b K^2` (K = skew(v)) and of their
/// derivatives `c = a'(θ)/θ`, `d = b'(θ)/θ`.
#[derive(Debug, Clone, Copy)]
struct ExpCoeffs {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl ExpCoeffs {
    fn new(theta_sq: f64) -> Self {
        if theta_sq < SMALL_ANGLE * SMALL_ANGLE {
            let t2 = theta_sq;
            let t4 = t2 * t2;
            Self {
                a: 1.0 - t2 / 6.0 + t4 / 120.0,
                b: 0.5 - t2 / 24.0 + t4 / 720.0,
                c: -1.0 / 3.0 + t2 / 30.0 - t4 / 840.0,
                d: -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0,
            }
        } else {
            let theta = theta_sq.sqrt();
            let (s, co) = theta.sin_cos();
            let a = s / theta;
            let b = (1.0 - co) / theta_sq;
            Self {
                a,
                b,
                c: (theta * co - s) / (theta_sq * theta),
                d: (theta * s - 2.0 * (1.0 - co)) / (theta_sq * theta_sq),
            }
        }
    }
}

/// Rotation matrix of an axis-angle vector (Rodrigues' formula).
///
/// The zero vector maps to the identity exactly.
pub fn rodrigues(v: &Vec3) -> Mat3 {
    let k = skew(v);
    let e = ExpCoeffs::new(v.norm_squared());
    Mat3::identity() + k * e.a + k * k * e.b
}

/// Rotation and its three partial derivatives with respect to the components
/// of the axis-angle vector.
pub fn rodrigues_with_jacobian(v: &Vec3) -> (Mat3, [Mat3; 3]) {
    let k = skew(v);
    let k2 = k * k;
    let e = ExpCoeffs::new(v.norm_squared());
    let r = Mat3::identity() + k * e.a + k2 * e.b;
    let mut dr = [Mat3::zeros(); 3];
    for (i, d) in dr.iter_mut().enumerate() {
        let gen = skew(&Vec3::ith(i, 1.0));
        *d = gen * e.a + (gen * k + k * gen) * e.b + k * (e.c * v[i]) + k2 * (e.d * v[i]);
    }
    (r, dr)
}

/// Contract a matrix-valued adjoint against the rotation Jacobian:
/// returns `∂L/∂v` given `∂L/∂R`.
pub fn rodrigues_backprop(jac: &[Mat3; 3], d_rot: &Mat3) -> Vec3 {
    Vec3::new(
        jac[0].component_mul(d_rot).sum(),
        jac[1].component_mul(d_rot).sum(),
        jac[2].component_mul(d_rot).sum(),
    )
}

fn vee_antisymmetric(r: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (r[(2, 1)] - r[(1, 2)]),
        0.5 * (r[(0, 2)] - r[(2, 0)]),
        0.5 * (r[(1, 0)] - r[(0, 1)]),
    )
}

/// Geodesic angle of a rotation matrix, in `[0, π]`.
pub fn rotation_angle(r: &Mat3) -> f64 {
    let s = vee_antisymmetric(r).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c)
}

/// Axis-angle vector of a rotation matrix, with angle in `[0, π]`.
pub fn axis_angle(r: &Mat3) -> Vec3 {
    nalgebra::Rotation3::from_matrix_unchecked(*r).scaled_axis()
}

/// Geodesic distance between two rotations.
pub fn geodesic_distance(a: &Mat3, b: &Mat3) -> f64 {
    rotation_angle(&(a.transpose() * b))
}

/// Squared geodesic angle of `r` and its gradient with respect to the entries
/// of `r`.
pub fn squared_angle_with_gradient(r: &Mat3) -> (f64, Mat3) {
    let s_vec = vee_antisymmetric(r);
    let s = s_vec.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let phi = s.atan2(c);
    // φ / sin φ, finite at φ = 0
    let ratio = if s > 1e-12 {
        phi / s
    } else if c > 0.0 {
        1.0 + phi * phi / 6.0
    } else {
        // antipodal: the gradient direction is undefined, the value is not
        0.0
    };
    let k = 2.0 * ratio * c;
    let m = -2.0 * phi * s;
    let mut g = Mat3::identity() * (0.5 * m);
    let h = 0.5 * k;
    g[(2, 1)] += h * s_vec.x;
    g[(1, 2)] -= h * s_vec.x;
    g[(0, 2)] += h * s_vec.y;
    g[(2, 0)] -= h * s_vec.y;
    g[(1, 0)] += h * s_vec.z;
    g[(0, 1)] -= h * s_vec.z;
    (phi * phi, g)
}
