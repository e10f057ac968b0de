//! 3D Canny edge detection: Gaussian smoothing, Sobel gradient, optional
//! non-maximum suppression, relative double thresholding and hysteresis.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolve::{convolve, Border};
use crate::error::{Error, Result};
use crate::gradient::{sobel_gradient, GradientField};
use crate::grid::DensityGrid;
use crate::kernel::{default_gaussian_radius, gaussian_kernel_1d, Kernel3D};
use crate::mask::EdgeMask;

/// Canny stage parameters.
///
/// Thresholds are fractions of the maximum gradient magnitude of the smoothed
/// field, so detection is invariant to uniform rescaling of the densities.
/// Non-maximum suppression is off by default: on voxelized fields the
/// interpolated comparison can erase faint but real ridge voxels, and the
/// double threshold already bounds the sheet thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    /// Smoothing sigma in voxel units.
    pub gaussian_sigma: f64,
    /// Weak-edge threshold as a fraction of the max magnitude, in (0, 1].
    pub low_rel: f64,
    /// Strong-edge threshold as a fraction of the max magnitude, in (0, 1].
    pub high_rel: f64,
    /// Enable non-maximum suppression along the gradient direction.
    pub nms_enabled: bool,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 0.1,
            low_rel: 0.0005,
            high_rel: 0.002,
            nms_enabled: false,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gaussian_sigma.is_finite() || self.gaussian_sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian_sigma must be finite and > 0, got {}",
                self.gaussian_sigma
            )));
        }
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.low_rel) || !in_unit(self.high_rel) {
            return Err(Error::InvalidParameter(format!(
                "relative thresholds must lie in (0, 1], got low {} high {}",
                self.low_rel, self.high_rel
            )));
        }
        if self.low_rel > self.high_rel {
            return Err(Error::InvalidParameter(format!(
                "low_rel {} must not exceed high_rel {}",
                self.low_rel, self.high_rel
            )));
        }
        Ok(())
    }

    fn provenance(&self) -> String {
        format!(
            "canny(sigma={}, low={}, high={}, nms={})",
            self.gaussian_sigma, self.low_rel, self.high_rel, self.nms_enabled
        )
    }
}

/// Run the full Canny pipeline on a density grid.
///
/// An all-flat field (max magnitude 0) yields an empty mask rather than a
/// division by zero.
pub fn canny_edges(grid: &DensityGrid, params: &CannyParams) -> Result<EdgeMask> {
    params.validate()?;
    let grad = canny_gradient(grid, params)?;
    canny_edges_from_gradient(&grad, params)
}

/// Smoothing plus Sobel, exposed so callers can reuse the gradient.
///
/// The smoothing kernel uses the default truncation radius
/// `max(1, ceil(3 sigma))`, clamped per axis so it always fits the grid.
pub fn canny_gradient(grid: &DensityGrid, params: &CannyParams) -> Result<GradientField> {
    params.validate()?;
    let base = default_gaussian_radius(params.gaussian_sigma);
    let [fx, fy, fz] = grid
        .dims()
        .map(|n| gaussian_kernel_1d(params.gaussian_sigma, base.min((n - 1) / 2)));
    let kernel = Kernel3D::from_factors(fx?, fy?, fz?)?;
    let smoothed = convolve(grid, &kernel, Border::Replicate)?;
    sobel_gradient(&smoothed)
}

/// Threshold/suppress/link stages applied to a precomputed gradient.
pub fn canny_edges_from_gradient(grad: &GradientField, params: &CannyParams) -> Result<EdgeMask> {
    params.validate()?;
    let geom = *grad.geometry();
    let max_mag = grad.max_magnitude();
    if max_mag <= 0.0 {
        return Ok(EdgeMask::from_parts(
            geom,
            vec![false; geom.len()],
            params.provenance(),
        ));
    }

    // Thresholds reference the pre-suppression maximum so that toggling NMS
    // moves no threshold.
    let low = params.low_rel * max_mag;
    let high = params.high_rel * max_mag;

    let thinned: Vec<f64> = if params.nms_enabled {
        suppress_non_maxima(grad)
    } else {
        grad.magnitude().to_vec()
    };

    // 0 = background, 1 = weak, 2 = strong.
    let mut label = vec![0u8; geom.len()];
    let mut queue = VecDeque::new();
    for (lin, &m) in thinned.iter().enumerate() {
        if m >= high {
            label[lin] = 2;
            queue.push_back(lin);
        } else if m >= low {
            label[lin] = 1;
        }
    }

    // Hysteresis: flood from strong voxels through 26-connected weak ones.
    let mut keep: Vec<bool> = label.iter().map(|&l| l == 2).collect();
    let [nx, ny, nz] = geom.dims;
    while let Some(lin) = queue.pop_front() {
        let [i, j, k] = geom.unravel(lin);
        for dk in -1isize..=1 {
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let (ni, nj, nk) = (i as isize + di, j as isize + dj, k as isize + dk);
                    if ni < 0
                        || nj < 0
                        || nk < 0
                        || ni >= nx as isize
                        || nj >= ny as isize
                        || nk >= nz as isize
                    {
                        continue;
                    }
                    let nlin = geom.linear([ni as usize, nj as usize, nk as usize]);
                    if label[nlin] == 1 && !keep[nlin] {
                        keep[nlin] = true;
                        queue.push_back(nlin);
                    }
                }
            }
        }
    }

    Ok(EdgeMask::from_parts(geom, keep, params.provenance()))
}

/// Non-maximum suppression: keep a voxel's magnitude only when it is at least
/// as large as the magnitudes interpolated one voxel step along +/- its unit
/// gradient direction (index space). Zero-magnitude voxels are suppressed.
fn suppress_non_maxima(grad: &GradientField) -> Vec<f64> {
    let geom = *grad.geometry();
    let [nx, ny, _] = geom.dims;
    let mag = grad.magnitude();

    let mut out = vec![0.0f64; geom.len()];
    out.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let lin = geom.linear([i, j, k]);
                    let m = mag[lin];
                    if m <= 0.0 {
                        continue;
                    }
                    let g = grad.vector(lin);
                    let u = [g[0] / m, g[1] / m, g[2] / m];
                    let p = [i as f64, j as f64, k as f64];
                    let ahead = trilinear(mag, &geom, [p[0] + u[0], p[1] + u[1], p[2] + u[2]]);
                    let behind = trilinear(mag, &geom, [p[0] - u[0], p[1] - u[1], p[2] - u[2]]);
                    if m >= ahead && m >= behind {
                        slab[i + nx * j] = m;
                    }
                }
            }
        });
    out
}

/// Trilinear interpolation of a scalar field at a fractional index position,
/// clamped to the lattice hull.
fn trilinear(field: &[f64], geom: &crate::grid::Geometry, p: [f64; 3]) -> f64 {
    let [nx, ny, nz] = geom.dims;
    let clamp = |v: f64, n: usize| v.clamp(0.0, (n - 1) as f64);
    let x = clamp(p[0], nx);
    let y = clamp(p[1], ny);
    let z = clamp(p[2], nz);

    let cell = |v: f64, n: usize| -> (usize, f64) {
        let i0 = (v.floor() as usize).min(n.saturating_sub(2));
        (i0, v - i0 as f64)
    };
    // Degenerate axes (n == 1) collapse to weight 0 on a repeated corner.
    let (i0, fx) = if nx > 1 { cell(x, nx) } else { (0, 0.0) };
    let (j0, fy) = if ny > 1 { cell(y, ny) } else { (0, 0.0) };
    let (k0, fz) = if nz > 1 { cell(z, nz) } else { (0, 0.0) };
    let i1 = (i0 + 1).min(nx - 1);
    let j1 = (j0 + 1).min(ny - 1);
    let k1 = (k0 + 1).min(nz - 1);

    let at = |i: usize, j: usize, k: usize| field[geom.linear([i, j, k])];
    let c00 = at(i0, j0, k0) * (1.0 - fx) + at(i1, j0, k0) * fx;
    let c10 = at(i0, j1, k0) * (1.0 - fx) + at(i1, j1, k0) * fx;
    let c01 = at(i0, j0, k1) * (1.0 - fx) + at(i1, j0, k1) * fx;
    let c11 = at(i0, j1, k1) * (1.0 - fx) + at(i1, j1, k1) * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}
