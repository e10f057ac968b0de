//! Regular voxel grid data model: dimensions, world-space placement and
//! index/world coordinate transforms.
//!
//! Conventions fixed here and relied on everywhere else:
//! - storage order is x-fastest: `index = i + nx*(j + ny*k)`,
//! - a voxel index maps to its cell *center*; `origin` is the world-space
//!   center of voxel `(0, 0, 0)`,
//! - spacing components are millimeters per voxel step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid placement: voxel counts, voxel pitch (mm) and the world position of
/// the center of voxel `(0,0,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Geometry {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "grid dims must be >= 1 per axis, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !s.is_finite() || s <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be finite and > 0 per axis, got {spacing:?}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid origin must be finite, got {origin:?}"
            )));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
        })
    }

    /// Total voxel count `nx * ny * nz`.
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: [usize; 3]) -> bool {
        index[0] < self.dims[0] && index[1] < self.dims[1] && index[2] < self.dims[2]
    }

    /// Flat offset of an in-bounds index (x-fastest order).
    #[inline]
    pub fn linear(&self, index: [usize; 3]) -> usize {
        debug_assert!(self.contains(index));
        index[0] + self.dims[0] * (index[1] + self.dims[1] * index[2])
    }

    /// Inverse of [`Geometry::linear`].
    #[inline]
    pub fn unravel(&self, linear: usize) -> [usize; 3] {
        let i = linear % self.dims[0];
        let rest = linear / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    /// World position (mm) of the center of the voxel at `index`.
    pub fn index_to_world(&self, index: [usize; 3]) -> Result<[f64; 3]> {
        if !self.contains(index) {
            return Err(Error::OutOfBounds(
                index[0],
                index[1],
                index[2],
                self.dims[0],
                self.dims[1],
                self.dims[2],
            ));
        }
        Ok(self.index_to_world_unchecked(index))
    }

    #[inline]
    pub(crate) fn index_to_world_unchecked(&self, index: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + index[0] as f64 * self.spacing[0],
            self.origin[1] + index[1] as f64 * self.spacing[1],
            self.origin[2] + index[2] as f64 * self.spacing[2],
        ]
    }

    /// World position of the lattice midpoint `(dims - 1) / 2 * spacing`,
    /// i.e. the center of the block of voxel centers.
    pub fn world_center(&self) -> [f64; 3] {
        [
            self.origin[0] + 0.5 * (self.dims[0] - 1) as f64 * self.spacing[0],
            self.origin[1] + 0.5 * (self.dims[1] - 1) as f64 * self.spacing[1],
            self.origin[2] + 0.5 * (self.dims[2] - 1) as f64 * self.spacing[2],
        ]
    }
}

/// A regular 3D scalar field with world-space placement; the voxelized
/// density output of a radiance field, or any other volumetric scalar.
///
/// Immutable after construction: filters produce new grids.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    geometry: Geometry,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Build a grid, validating the length and finiteness invariants.
    pub fn new(geometry: Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match dims {:?} (expected {})",
                values.len(),
                geometry.dims,
                geometry.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid values must all be finite".into(),
            ));
        }
        Ok(Self { geometry, values })
    }

    /// Grid filled with a constant value.
    pub fn constant(geometry: Geometry, value: f64) -> Result<Self> {
        Self::new(geometry, vec![value; geometry.len()])
    }

    /// Grid built by evaluating `f` at every voxel index, x-fastest.
    pub fn from_fn(geometry: Geometry, mut f: impl FnMut([usize; 3]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(geometry.len());
        for k in 0..geometry.dims[2] {
            for j in 0..geometry.dims[1] {
                for i in 0..geometry.dims[0] {
                    values.push(f([i, j, k]));
                }
            }
        }
        Self::new(geometry, values)
    }

    /// Wrap filter output without revalidating. Length must match; values are
    /// finite whenever the inputs were (checked in debug builds).
    pub(crate) fn from_raw(geometry: Geometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { geometry, values }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geometry.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.geometry.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Stored density at a lattice site.
    pub fn sample(&self, index: [usize; 3]) -> Result<f64> {
        if !self.geometry.contains(index) {
            return Err(Error::OutOfBounds(
                index[0],
                index[1],
                index[2],
                self.geometry.dims[0],
                self.geometry.dims[1],
                self.geometry.dims[2],
            ));
        }
        Ok(self.values[self.geometry.linear(index)])
    }

    /// World position (mm) of the center of the voxel at `index`.
    pub fn index_to_world(&self, index: [usize; 3]) -> Result<[f64; 3]> {
        self.geometry.index_to_world(index)
    }

    #[inline]
    pub(crate) fn get(&self, index: [usize; 3]) -> f64 {
        self.values[self.geometry.linear(index)]
    }

    /// Read with clamp-to-edge semantics for possibly out-of-range signed indices.
    #[inline]
    pub(crate) fn get_clamped(&self, i: isize, j: isize, k: isize) -> f64 {
        let d = self.geometry.dims;
        let ci = i.clamp(0, d[0] as isize - 1) as usize;
        let cj = j.clamp(0, d[1] as isize - 1) as usize;
        let ck = k.clamp(0, d[2] as isize - 1) as usize;
        self.values[self.geometry.linear([ci, cj, ck])]
    }
}

/// Per-voxel RGB values in `[0, 1]`, aligned with a density grid of the same
/// geometry. Carries the radiance field's color output when available.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorGrid {
    geometry: Geometry,
    values: Vec<[f32; 3]>,
}

impl ColorGrid {
    pub fn new(geometry: Geometry, values: Vec<[f32; 3]>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidParameter(format!(
                "color count {} does not match dims {:?} (expected {})",
                values.len(),
                geometry.dims,
                geometry.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "color values must all be finite".into(),
            ));
        }
        Ok(Self { geometry, values })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn values(&self) -> &[[f32; 3]] {
        &self.values
    }

    /// Color at a lattice site as 8-bit RGB.
    pub fn rgb8(&self, index: [usize; 3]) -> Result<[u8; 3]> {
        if !self.geometry.contains(index) {
            return Err(Error::OutOfBounds(
                index[0],
                index[1],
                index[2],
                self.geometry.dims[0],
                self.geometry.dims[1],
                self.geometry.dims[2],
            ));
        }
        let c = self.values[self.geometry.linear(index)];
        Ok([quantize(c[0]), quantize(c[1]), quantize(c[2])])
    }
}

fn quantize(channel: f32) -> u8 {
    (channel.clamp(0.0, 1.0) * 255.0).round() as u8
}
