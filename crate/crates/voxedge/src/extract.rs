//! Point-cloud extraction from grids, gradient fields and edge masks.
//!
//! Every extractor emits voxel centers in world millimeters, in ascending
//! linear-index order, with no sub-voxel interpolation.

use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::grid::{ColorGrid, DensityGrid, Geometry};
use crate::mask::EdgeMask;

/// 3D points in world units (mm) with optional per-point RGB color.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>, colors: Option<Vec<[u8; 3]>>) -> Result<Self> {
        if let Some(colors) = &colors {
            if colors.len() != points.len() {
                return Err(Error::InvalidParameter(format!(
                    "color count {} does not match point count {}",
                    colors.len(),
                    points.len()
                )));
            }
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "point coordinates must be finite".into(),
            ));
        }
        Ok(Self { points, colors })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }
}

/// Baseline reconstruction: every voxel whose density reaches `delta_t`.
///
/// Keeps interior voxels by design; dense objects produce filled clouds, not
/// shells.
pub fn extract_by_threshold(grid: &DensityGrid, delta_t: f64) -> PointCloud {
    let geom = grid.geometry();
    let mut points = Vec::new();
    for (lin, &v) in grid.values().iter().enumerate() {
        if v >= delta_t {
            points.push(geom.index_to_world_unchecked(geom.unravel(lin)));
        }
    }
    PointCloud {
        points,
        colors: None,
    }
}

/// Gradient-magnitude reconstruction: voxels with magnitude at or above
/// `rel_threshold` times the field maximum.
///
/// The relative threshold makes the output invariant under positive scaling
/// of the source densities. An all-zero field yields an empty cloud.
pub fn extract_by_gradient(field: &GradientField, rel_threshold: f64) -> Result<PointCloud> {
    if !(rel_threshold > 0.0 && rel_threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_threshold must lie in (0, 1], got {rel_threshold}"
        )));
    }
    let geom = field.geometry();
    let max = field.max_magnitude();
    let mut points = Vec::new();
    if max > 0.0 {
        let cut = rel_threshold * max;
        for (lin, &m) in field.magnitude().iter().enumerate() {
            if m >= cut {
                points.push(geom.index_to_world_unchecked(geom.unravel(lin)));
            }
        }
    }
    Ok(PointCloud {
        points,
        colors: None,
    })
}

/// One point per marked voxel of an edge mask.
pub fn extract_by_mask(mask: &EdgeMask) -> PointCloud {
    let geom = mask.geometry();
    let points = mask
        .true_indices()
        .map(|lin| geom.index_to_world_unchecked(geom.unravel(lin)))
        .collect();
    PointCloud {
        points,
        colors: None,
    }
}

/// Attach per-voxel colors to an extracted cloud.
///
/// Each point must coincide with a voxel center of the color grid (extracted
/// clouds do by construction when the color grid shares the density grid's
/// geometry). Without a color grid the cloud passes through unchanged.
pub fn colorize(cloud: &PointCloud, color_grid: Option<&ColorGrid>) -> Result<PointCloud> {
    let Some(colors) = color_grid else {
        return Ok(cloud.clone());
    };
    let geom = colors.geometry();
    let mut rgb = Vec::with_capacity(cloud.len());
    for p in cloud.points() {
        let index = world_to_index(geom, *p)?;
        rgb.push(colors.rgb8(index)?);
    }
    Ok(PointCloud {
        points: cloud.points.clone(),
        colors: Some(rgb),
    })
}

/// Invert `index_to_world` for a point expected to sit on the lattice.
///
/// Tolerates 1e-3 of a voxel step of drift so clouds that round-tripped
/// through f32 coordinates still map back; anything farther off the lattice
/// is a geometry mismatch.
fn world_to_index(geom: &Geometry, p: [f64; 3]) -> Result<[usize; 3]> {
    let mut index = [0usize; 3];
    for a in 0..3 {
        let t = (p[a] - geom.origin[a]) / geom.spacing[a];
        let i = t.round();
        if (t - i).abs() > 1e-3 || i < 0.0 || i >= geom.dims[a] as f64 {
            return Err(Error::GeometryMismatch(format!(
                "point {:?} does not lie on the color grid lattice (dims {:?}, spacing {:?}, origin {:?})",
                p, geom.dims, geom.spacing, geom.origin
            )));
        }
        index[a] = i as usize;
    }
    Ok(index)
}
