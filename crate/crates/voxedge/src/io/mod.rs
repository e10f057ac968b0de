//! Serialization: the native grid format, PLY point clouds, JSON reports.

mod grid_file;
mod ply;

pub use grid_file::{read_color_grid, read_grid, read_raw_sidecar, write_color_grid, write_grid};
pub use ply::{read_ply, write_ply, PlyFormat};

use std::path::Path;

use crate::error::{Error, Result};

/// Serialize any report-like value as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.as_ref().to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path.as_ref(), text)?;
    Ok(())
}

/// Deserialize a JSON document.
pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.as_ref().to_path_buf(),
        source,
    })
}
