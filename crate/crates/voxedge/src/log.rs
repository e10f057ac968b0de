//! Laplacian-of-Gaussian response fields and zero-crossing extraction.

use serde::{Deserialize, Serialize};

use crate::convolve::{convolve, convolve_symmetric_zero_sum, Border};
use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::kernel::{gaussian_kernel_3d, log_kernel};
use crate::mask::EdgeMask;

/// How the second-derivative response is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogMode {
    /// Single filtering pass with a sampled analytic LoG kernel.
    Analytic,
    /// Difference of Gaussians: `G(sigma) - G(k sigma)`, two separable blurs.
    Dog { k: f64 },
}

/// Laplacian-of-Gaussian stage parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    /// Cubic kernel side length (odd, >= 3).
    pub mask_size: usize,
    /// Scale in voxel units.
    pub sigma: f64,
    pub mode: LogMode,
    /// Minimum response jump `|r[v] - r[n]|` across a sign change for the
    /// crossing to count; 0 accepts every sign change.
    pub contrast_min: f64,
}

impl Default for LogParams {
    fn default() -> Self {
        Self {
            mask_size: 7,
            sigma: 7.0,
            mode: LogMode::Analytic,
            contrast_min: 0.0,
        }
    }
}

impl LogParams {
    pub fn validate(&self) -> Result<()> {
        if self.mask_size < 3 || self.mask_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "mask_size must be odd and >= 3, got {}",
                self.mask_size
            )));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        if !self.contrast_min.is_finite() || self.contrast_min < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "contrast_min must be finite and >= 0, got {}",
                self.contrast_min
            )));
        }
        if let LogMode::Dog { k } = self.mode {
            if !k.is_finite() || k <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "DoG sigma ratio must be finite and > 1, got {k}"
                )));
            }
        }
        Ok(())
    }

    fn provenance(&self) -> String {
        match self.mode {
            LogMode::Analytic => format!(
                "log(mask={}, sigma={}, contrast_min={})",
                self.mask_size, self.sigma, self.contrast_min
            ),
            LogMode::Dog { k } => format!(
                "dog(mask={}, sigma={}, k={}, contrast_min={})",
                self.mask_size, self.sigma, k, self.contrast_min
            ),
        }
    }
}

/// Second-derivative response of the density field.
///
/// Analytic mode filters with the zero-sum LoG kernel in its symmetric
/// difference form, which maps constant and affine fields to exact zeros.
/// DoG mode blurs twice with (mask_size - 1) / 2 taps per side and subtracts.
/// Replicate border throughout. The grid must fit the mask on every axis.
pub fn log_response(grid: &DensityGrid, params: &LogParams) -> Result<DensityGrid> {
    params.validate()?;
    match params.mode {
        LogMode::Analytic => {
            let kernel = log_kernel(params.mask_size, params.sigma)?;
            convolve_symmetric_zero_sum(grid, &kernel)
        }
        LogMode::Dog { k } => {
            let radius = (params.mask_size - 1) / 2;
            let narrow = gaussian_kernel_3d(params.sigma, radius)?;
            let wide = gaussian_kernel_3d(k * params.sigma, radius)?;
            let a = convolve(grid, &narrow, Border::Replicate)?;
            let b = convolve(grid, &wide, Border::Replicate)?;
            let values = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x - y)
                .collect();
            Ok(DensityGrid::new(*grid.geometry(), values)?)
        }
    }
}

/// Mark zero crossings of a response field.
///
/// A voxel is marked when some 6-connected neighbor has a strictly opposite
/// response sign, the voxel's own response is the smaller in magnitude of the
/// pair (ties mark both sides), and the jump across the pair reaches
/// `contrast_min`. Exact zeros have no sign and never participate.
pub fn zero_crossings(response: &DensityGrid, contrast_min: f64, provenance: String) -> EdgeMask {
    let geom = *response.geometry();
    let [nx, ny, nz] = geom.dims;
    let r = response.values();
    let mut bits = vec![false; geom.len()];

    let opposite = |a: f64, b: f64| (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0);

    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let lin = geom.linear([i, j, k]);
                let v = r[lin];
                let mut neighbors = [usize::MAX; 6];
                let mut n_count = 0;
                if i > 0 {
                    neighbors[n_count] = lin - 1;
                    n_count += 1;
                }
                if i + 1 < nx {
                    neighbors[n_count] = lin + 1;
                    n_count += 1;
                }
                if j > 0 {
                    neighbors[n_count] = lin - nx;
                    n_count += 1;
                }
                if j + 1 < ny {
                    neighbors[n_count] = lin + nx;
                    n_count += 1;
                }
                if k > 0 {
                    neighbors[n_count] = lin - nx * ny;
                    n_count += 1;
                }
                if k + 1 < nz {
                    neighbors[n_count] = lin + nx * ny;
                    n_count += 1;
                }
                for &nlin in &neighbors[..n_count] {
                    let w = r[nlin];
                    if opposite(v, w) && v.abs() <= w.abs() && (v - w).abs() >= contrast_min {
                        bits[lin] = true;
                        break;
                    }
                }
            }
        }
    }

    EdgeMask::from_parts(geom, bits, provenance)
}

/// Full LoG stage: response then zero crossings.
///
/// Marks require full kernel support: the border shell of
/// `(mask_size - 1) / 2` voxels is never marked, since replicate clamping
/// bends even affine fields there and the resulting sign flips are border
/// artifacts rather than surface crossings.
pub fn log_edges(grid: &DensityGrid, params: &LogParams) -> Result<EdgeMask> {
    let response = log_response(grid, params)?;
    let mut mask = zero_crossings(&response, params.contrast_min, params.provenance());
    mask.clear_shell((params.mask_size - 1) / 2);
    Ok(mask)
}
