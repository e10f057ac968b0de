//! The native voxel grid file format.
//!
//! Layout, all little-endian:
//!
//! | bytes | field                          |
//! |-------|--------------------------------|
//! | 4     | magic `VXGD`                   |
//! | 2     | version (u16, currently 1)     |
//! | 2     | channels (u16: 1 density, 3 RGB) |
//! | 12    | dims (3 x u32)                 |
//! | 24    | spacing (3 x f64, mm)          |
//! | 24    | origin (3 x f64, mm)           |
//! | rest  | nx*ny*nz*channels f32 values, x-fastest, channels interleaved |
//!
//! The payload length must match the header arithmetic exactly; reads fail
//! with distinct errors for wrong magic, unknown version, unexpected channel
//! count and payload size mismatch.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{ColorGrid, DensityGrid, Geometry};

const MAGIC: [u8; 4] = *b"VXGD";
const VERSION: u16 = 1;
const HEADER_LEN: u64 = 68;

fn write_header(w: &mut impl Write, geom: &Geometry, channels: u16) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&channels.to_le_bytes())?;
    for &d in &geom.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for &s in &geom.spacing {
        w.write_all(&s.to_le_bytes())?;
    }
    for &o in &geom.origin {
        w.write_all(&o.to_le_bytes())?;
    }
    Ok(())
}

struct Header {
    geometry: Geometry,
    channels: u16,
}

fn read_header(r: &mut impl Read, path: &Path) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: magic,
        });
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.to_path_buf(),
            found: version,
            expected: VERSION,
        });
    }
    r.read_exact(&mut u16buf)?;
    let channels = u16::from_le_bytes(u16buf);

    let mut u32buf = [0u8; 4];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut u32buf)?;
        *d = u32::from_le_bytes(u32buf) as usize;
    }
    let mut f64buf = [0u8; 8];
    let mut spacing = [0f64; 3];
    for s in &mut spacing {
        r.read_exact(&mut f64buf)?;
        *s = f64::from_le_bytes(f64buf);
    }
    let mut origin = [0f64; 3];
    for o in &mut origin {
        r.read_exact(&mut f64buf)?;
        *o = f64::from_le_bytes(f64buf);
    }
    Ok(Header {
        geometry: Geometry::new(dims, spacing, origin)?,
        channels,
    })
}

/// Read the full payload, insisting on an exact byte count.
fn read_payload(r: &mut impl Read, path: &Path, expected_values: usize) -> Result<Vec<f32>> {
    let expected_bytes = expected_values as u64 * 4;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() as u64 != expected_bytes {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected_bytes: HEADER_LEN + expected_bytes,
            found_bytes: HEADER_LEN + bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Write a density grid (channel count 1). The f64 values are stored as f32.
pub fn write_grid(grid: &DensityGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    write_header(&mut w, grid.geometry(), 1)?;
    for &v in grid.values() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a density grid written by [`write_grid`].
pub fn read_grid(path: impl AsRef<Path>) -> Result<DensityGrid> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r, path)?;
    if header.channels != 1 {
        return Err(Error::ChannelMismatch {
            path: path.to_path_buf(),
            found: header.channels,
            expected: 1,
        });
    }
    let raw = read_payload(&mut r, path, header.geometry.len())?;
    DensityGrid::new(header.geometry, raw.into_iter().map(f64::from).collect())
}

/// Write an RGB color grid (channel count 3, interleaved r g b per voxel).
pub fn write_color_grid(grid: &ColorGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    write_header(&mut w, grid.geometry(), 3)?;
    for rgb in grid.values() {
        for &c in rgb {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a color grid written by [`write_color_grid`].
pub fn read_color_grid(path: impl AsRef<Path>) -> Result<ColorGrid> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r, path)?;
    if header.channels != 3 {
        return Err(Error::ChannelMismatch {
            path: path.to_path_buf(),
            found: header.channels,
            expected: 3,
        });
    }
    let raw = read_payload(&mut r, path, header.geometry.len() * 3)?;
    let values = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    ColorGrid::new(header.geometry, values)
}

/// Sidecar description of a raw f32 volume exported by external tooling.
#[derive(Debug, Deserialize)]
struct RawSidecar {
    /// Path to the raw f32 payload, relative to the sidecar unless absolute.
    raw: String,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

/// Import a density grid described by a sidecar JSON next to a raw f32 file.
///
/// The sidecar names the payload file and carries the geometry:
///
/// ```json
/// { "raw": "field.f32", "dims": [64, 64, 64],
///   "spacing": [0.5, 0.5, 0.5], "origin": [0.0, 0.0, 0.0] }
/// ```
///
/// The payload is little-endian f32 in x-fastest order and must match
/// `nx*ny*nz` values exactly.
pub fn read_raw_sidecar(sidecar_path: impl AsRef<Path>) -> Result<DensityGrid> {
    let sidecar_path = sidecar_path.as_ref();
    let text = std::fs::read_to_string(sidecar_path)?;
    let sidecar: RawSidecar = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: sidecar_path.to_path_buf(),
        source,
    })?;
    let geometry = Geometry::new(sidecar.dims, sidecar.spacing, sidecar.origin)?;

    let raw_path = {
        let p = Path::new(&sidecar.raw);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            sidecar_path.parent().unwrap_or(Path::new(".")).join(p)
        }
    };
    let bytes = std::fs::read(&raw_path)?;
    let expected_bytes = geometry.len() as u64 * 4;
    if bytes.len() as u64 != expected_bytes {
        return Err(Error::TruncatedPayload {
            path: raw_path,
            expected_bytes,
            found_bytes: bytes.len() as u64,
        });
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    DensityGrid::new(geometry, values)
}
