//! Field snapshots: raw little-endian grids and 8-bit grayscale images.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{PhysicalField, TorusGrid};

const MAGIC: &[u8; 4] = b"ADSF";
const VERSION: u32 = 1;

/// Writes `"ADSF"`, version (u32 LE), `n` (u64 LE), then `n²` f64 LE values, rows of
/// constant `y` first.
pub fn write_binary<W: Write>(field: &PhysicalField, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(field.grid().n() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<PhysicalField> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let grid = TorusGrid::new(n)?;
    let mut raw = vec![0u8; grid.len() * 8];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    PhysicalField::new(grid, values)
}

/// Linear `[min, max] → [0, 255]` gray levels, top image row at the largest `y`.
/// A constant field maps to mid-gray.
pub fn grayscale(field: &PhysicalField) -> Vec<u8> {
    let n = field.grid().n();
    let (lo, hi) = field.min_max();
    let span = hi - lo;
    let mut pixels = Vec::with_capacity(n * n);
    for iy in (0..n).rev() {
        for ix in 0..n {
            let v = field.at(ix, iy);
            let g = if span > 0.0 {
                ((v - lo) / span * 255.0).round()
            } else {
                127.0
            };
            pixels.push(g.clamp(0.0, 255.0) as u8);
        }
    }
    pixels
}

/// Binary PGM (P5).
pub fn write_pgm<W: Write>(field: &PhysicalField, mut out: W) -> Result<()> {
    let n = field.grid().n();
    write!(out, "P5\n{n} {n}\n255\n")?;
    out.write_all(&grayscale(field))?;
    Ok(())
}
