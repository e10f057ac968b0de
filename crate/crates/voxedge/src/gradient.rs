//! Sobel gradient fields over density grids.

use rayon::prelude::*;

use crate::convolve::{convolve, Border};
use crate::error::{Error, Result};
use crate::grid::{DensityGrid, Geometry};
use crate::kernel::sobel_kernels;

/// Per-voxel gradient components and magnitude.
///
/// Components are raw filter responses in density units per voxel step (times
/// the kernel's fixed gain of 32 on a unit ramp); they are not divided by the
/// voxel spacing. Magnitude is `sqrt(gx^2 + gy^2 + gz^2)` voxel by voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    geometry: Geometry,
    gx: Vec<f64>,
    gy: Vec<f64>,
    gz: Vec<f64>,
    magnitude: Vec<f64>,
}

impl GradientField {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    pub fn gz(&self) -> &[f64] {
        &self.gz
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    /// Gradient vector at a flat voxel offset.
    #[inline]
    pub fn vector(&self, linear: usize) -> [f64; 3] {
        [self.gx[linear], self.gy[linear], self.gz[linear]]
    }

    /// Largest magnitude in the field; 0 for an all-zero field.
    pub fn max_magnitude(&self) -> f64 {
        self.magnitude.iter().cloned().fold(0.0, f64::max)
    }

    /// Rescale responses to physical units (density per mm): each component
    /// is divided by 32 times its axis spacing, correcting both the kernel
    /// gain and the voxel pitch. Diagnostic view; detection thresholds are
    /// relative, so they act on the raw field.
    pub fn to_physical_units(&self) -> GradientField {
        let s = self.geometry.spacing;
        let scale = [
            1.0 / (32.0 * s[0]),
            1.0 / (32.0 * s[1]),
            1.0 / (32.0 * s[2]),
        ];
        let gx: Vec<f64> = self.gx.iter().map(|v| v * scale[0]).collect();
        let gy: Vec<f64> = self.gy.iter().map(|v| v * scale[1]).collect();
        let gz: Vec<f64> = self.gz.iter().map(|v| v * scale[2]).collect();
        let magnitude = magnitude_of(&gx, &gy, &gz);
        GradientField {
            geometry: self.geometry,
            gx,
            gy,
            gz,
            magnitude,
        }
    }
}

fn magnitude_of(gx: &[f64], gy: &[f64], gz: &[f64]) -> Vec<f64> {
    gx.par_iter()
        .zip(gy.par_iter())
        .zip(gz.par_iter())
        .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
        .collect()
}

/// Filter `grid` with the three Sobel kernels and assemble the gradient.
///
/// Needs at least 3 voxels per axis. Replicate border, so boundary responses
/// see flattened ramps rather than phantom zeros.
pub fn sobel_gradient(grid: &DensityGrid) -> Result<GradientField> {
    let dims = grid.dims();
    if dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidConfig(format!(
            "Sobel gradient needs at least 3 voxels per axis, got {dims:?}"
        )));
    }
    let (kx, ky, kz) = sobel_kernels();
    let gx = convolve(grid, &kx, Border::Replicate)?.into_values();
    let gy = convolve(grid, &ky, Border::Replicate)?.into_values();
    let gz = convolve(grid, &kz, Border::Replicate)?.into_values();
    let magnitude = magnitude_of(&gx, &gy, &gz);
    Ok(GradientField {
        geometry: *grid.geometry(),
        gx,
        gy,
        gz,
        magnitude,
    })
}
