//! 64-bit FNV-1a fingerprints that tie files to a mesh topology and a
//! landmark set.

use std::hash::Hasher;

use densemocap_core::body::BodyModel;
use densemocap_core::landmarks::LandmarkSet;
use fnv::FnvHasher;

fn put(h: &mut FnvHasher, x: u64) {
    h.write(&x.to_le_bytes());
}

/// Vertex count, joint hierarchy and faces.
pub fn topology_hash(model: &BodyModel) -> u64 {
    let mut h = FnvHasher::default();
    put(&mut h, model.num_vertices() as u64);
    put(&mut h, model.num_joints() as u64);
    for p in model.parents() {
        put(&mut h, p.map_or(u64::MAX, |p| p as u64));
    }
    put(&mut h, model.faces().len() as u64);
    for f in model.faces() {
        for &i in f {
            put(&mut h, i as u64);
        }
    }
    h.finish()
}

/// Landmark vertex indices, in order.
pub fn landmark_hash(set: &LandmarkSet) -> u64 {
    let mut h = FnvHasher::default();
    put(&mut h, set.indices.len() as u64);
    for &i in &set.indices {
        put(&mut h, i as u64);
    }
    h.finish()
}

pub fn to_hex(hash: u64) -> String {
    format!("{hash:016x}")
}

pub fn from_hex(s: &str) -> Option<u64> {
    if s.len() != 16 {
        return None;
    }
    u64::from_str_radix(s, 16).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use densemocap_core::toy::stick_body;

    #[test]
    fn fnv1a_reference_values() {
        let mut h = FnvHasher::default();
        assert_eq!(h.finish(), 0xcbf29ce484222325);
        h.write(b"a");
        assert_eq!(h.finish(), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn hex_round_trip() {
        for x in [0, 1, u64::MAX, 0xdeadbeef] {
            assert_eq!(from_hex(&to_hex(x)), Some(x));
        }
        assert_eq!(from_hex("123"), None);
    }

    #[test]
    fn landmark_order_matters() {
        let a = LandmarkSet { indices: vec![1, 2, 3], sampling_weights: vec![] };
        let b = LandmarkSet { indices: vec![1, 3, 2], sampling_weights: vec![] };
        assert_ne!(landmark_hash(&a), landmark_hash(&b));
        let m = stick_body();
        assert_eq!(topology_hash(&m), topology_hash(&stick_body()));
    }
}
