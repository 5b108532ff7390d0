//! FEAT binary container.
//!
//! Layout (little-endian): `b"FEAT"`, `u8` version (1), `u8` kind code,
//! `u32` rows, `u32` cols, `rows*cols` `f32` row-major values, `u32` metadata
//! length, UTF-8 JSON metadata.

use std::fs;
use std::path::Path;

use super::{FeatureKind, FeatureMatrix, Meta};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FEAT";
const VERSION: u8 = 1;

pub fn write_feat(m: &FeatureMatrix) -> Vec<u8> {
    let meta = serde_json::to_vec(&m.meta).expect("metadata is plain JSON");
    let mut out = Vec::with_capacity(14 + m.data().len() * 4 + 4 + meta.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(m.kind().code());
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for &v in m.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| Error::TruncatedFile("FEAT".into()))?;
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

fn u32_at(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().unwrap()))
}

pub fn read_feat(bytes: &[u8]) -> Result<FeatureMatrix> {
    let mut pos = 0;
    if take(bytes, &mut pos, 4)? != MAGIC {
        return Err(Error::Format("missing FEAT magic".into()));
    }
    let hdr = take(bytes, &mut pos, 2)?;
    if hdr[0] != VERSION {
        return Err(Error::Format(format!("unsupported FEAT version {}", hdr[0])));
    }
    let kind = FeatureKind::from_code(hdr[1]).ok_or_else(|| Error::Format(format!("unknown kind code {}", hdr[1])))?;
    let rows = u32_at(bytes, &mut pos)? as usize;
    let cols = u32_at(bytes, &mut pos)? as usize;
    let raw = take(bytes, &mut pos, rows * cols * 4)?;
    let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    let meta_len = u32_at(bytes, &mut pos)? as usize;
    let meta: Meta = serde_json::from_slice(take(bytes, &mut pos, meta_len)?)?;
    FeatureMatrix::new(kind, rows, cols, data, meta)
}

pub fn write_feat_file(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<()> {
    fs::write(path, write_feat(m))?;
    Ok(())
}

pub fn read_feat_file(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    read_feat(&fs::read(path)?)
}
