//! Surface markers stored as a vertex plus an offset in a local triangle
//! frame, so they can be regressed from any posed or reshaped mesh.

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerSpec {
    pub vertex: usize,
    /// Offset along the local frame axes, meters.
    pub displacement: Vec3,
}

/// Local frame at a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec3,
    /// Columns are the frame axes.
    pub axes: Mat3,
}

/// Frame built from the lowest-index face containing `vertex`.
///
/// With the face's vertices rotated so `vertex` comes first (`v, a, b`):
/// `a1 = (a − v)/‖·‖`, `a3 = a1 × (b − v)` normalized, `a2 = a3 × a1`.
pub fn incident_frame(vertices: &[Vec3], faces: &[[usize; 3]], vertex: usize) -> Result<LocalFrame> {
    let (face_index, face) = faces
        .iter()
        .enumerate()
        .find(|(_, f)| f.contains(&vertex))
        .ok_or(Error::IsolatedVertex(vertex))?;
    let slot = face.iter().position(|&i| i == vertex).expect("face contains vertex");
    let origin = vertices[vertex];
    let e1 = vertices[face[(slot + 1) % 3]] - origin;
    let e2 = vertices[face[(slot + 2) % 3]] - origin;
    let degenerate = Error::DegenerateTriangle {
        vertex,
        face: face_index,
    };
    let a1 = e1.try_normalize(1e-12).ok_or_else(|| degenerate.clone())?;
    let a3 = a1.cross(&e2).try_normalize(1e-12).ok_or(degenerate)?;
    let a2 = a3.cross(&a1);
    Ok(LocalFrame {
        origin,
        axes: Mat3::from_columns(&[a1, a2, a3]),
    })
}

pub fn regress_marker(vertices: &[Vec3], faces: &[[usize; 3]], spec: &MarkerSpec) -> Result<Vec3> {
    if spec.vertex >= vertices.len() {
        return Err(Error::InvalidParams(alloc::format!(
            "marker vertex {} out of range",
            spec.vertex
        )));
    }
    let frame = incident_frame(vertices, faces, spec.vertex)?;
    Ok(frame.origin + frame.axes * spec.displacement)
}

/// Express a world point as a marker attached to `vertex`.
pub fn marker_from_point(
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    vertex: usize,
    point: &Vec3,
) -> Result<MarkerSpec> {
    let frame = incident_frame(vertices, faces, vertex)?;
    Ok(MarkerSpec {
        vertex,
        displacement: frame.axes.transpose() * (point - frame.origin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rodrigues;

    #[test]
    fn axis_aligned_triangle() {
        let v = [Vec3::zeros(), Vec3::x(), Vec3::y()];
        let f = incident_frame(&v, &[[0, 1, 2]], 0).unwrap();
        assert_eq!(f.origin, Vec3::zeros());
        assert!((f.axes - Mat3::identity()).norm() < 1e-15);
    }

    #[test]
    fn frame_rotates_with_mesh() {
        let v = [Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 0.1, -0.2), Vec3::new(0.3, 0.9, 0.5)];
        let r = rodrigues(&Vec3::new(0.3, -1.1, 0.4));
        let rv: [Vec3; 3] = core::array::from_fn(|i| r * v[i]);
        let a = incident_frame(&v, &[[0, 1, 2]], 1).unwrap();
        let b = incident_frame(&rv, &[[0, 1, 2]], 1).unwrap();
        assert!((r * a.axes - b.axes).norm() < 1e-12);
        assert!((r * a.origin - b.origin).norm() < 1e-12);
        let gram = b.axes.transpose() * b.axes;
        assert!((gram - Mat3::identity()).norm() < 1e-12);
        assert!(b.axes.determinant() > 0.0);
    }

    #[test]
    fn zero_displacement_is_vertex() {
        let v = [Vec3::new(0.1, 0.2, 0.3), Vec3::x(), Vec3::y()];
        let spec = MarkerSpec { vertex: 0, displacement: Vec3::zeros() };
        assert_eq!(regress_marker(&v, &[[0, 1, 2]], &spec).unwrap(), v[0]);
    }

    #[test]
    fn errors() {
        let v = [Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0, Vec3::y()];
        assert_eq!(
            incident_frame(&v, &[[0, 1, 2]], 3),
            Err(Error::IsolatedVertex(3))
        );
        assert!(matches!(
            incident_frame(&v, &[[0, 1, 2]], 0),
            Err(Error::DegenerateTriangle { .. })
        ));
    }
}
