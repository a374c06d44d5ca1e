//! Silhouette masks as binary PGM and depth maps as raw little-endian f32.
//!
//! Depth layout: `"DPTH"`, u32 width, u32 height, u32 reserved (0), then
//! width × height f32 values row by row; `+∞` where nothing was drawn.

use std::io::Write;
use std::path::Path;

use densemocap_core::render::{DepthMap, SilhouetteMask};

use crate::error::{Error, Result};
use crate::io::{create, read_bytes};

const DEPTH_MAGIC: &[u8; 4] = b"DPTH";

pub fn encode_pgm(mask: &SilhouetteMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.bits.iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<SilhouetteMask, String> {
    // header: magic, width, height, maxval, each followed by whitespace
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(format!("not a binary PGM (magic {:?})", fields[0]));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|e| format!("bad header field {s:?}: {e}"));
    let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(format!("expected maxval 255, got {maxval}"));
    }
    let n = width as usize * height as usize;
    let data = bytes.get(pos..pos + n).ok_or("truncated pixel data")?;
    if bytes.len() != pos + n {
        return Err("trailing bytes after pixel data".into());
    }
    Ok(SilhouetteMask { width, height, bits: data.iter().map(|&b| b >= 128).collect() })
}

pub fn encode_depth(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * depth.depth.len());
    out.extend_from_slice(DEPTH_MAGIC);
    out.extend_from_slice(&depth.width.to_le_bytes());
    out.extend_from_slice(&depth.height.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for d in &depth.depth {
        out.extend_from_slice(&(*d as f32).to_le_bytes());
    }
    out
}

pub fn decode_depth(bytes: &[u8]) -> std::result::Result<DepthMap, String> {
    if bytes.len() < 16 || &bytes[..4] != DEPTH_MAGIC {
        return Err("missing DPTH header".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let (width, height) = (word(4), word(8));
    let n = width as usize * height as usize;
    if bytes.len() != 16 + 4 * n {
        return Err(format!("expected {} bytes of depth data, found {}", 4 * n, bytes.len() - 16));
    }
    let depth = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Ok(DepthMap { width, height, depth })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_pgm(path: &Path, mask: &SilhouetteMask) -> Result<()> {
    write_bytes(path, &encode_pgm(mask))
}

pub fn read_pgm(path: &Path) -> Result<SilhouetteMask> {
    decode_pgm(&read_bytes(path)?).map_err(|e| Error::parse(path, e))
}

pub fn write_depth(path: &Path, depth: &DepthMap) -> Result<()> {
    write_bytes(path, &encode_depth(depth))
}

pub fn read_depth(path: &Path) -> Result<DepthMap> {
    decode_depth(&read_bytes(path)?).map_err(|e| Error::parse(path, e))
}
