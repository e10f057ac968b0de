//! Boolean voxel masks produced by edge detectors.

use crate::grid::Geometry;

/// Per-voxel edge flags plus a provenance tag recording which detector and
/// parameters produced the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    geometry: Geometry,
    bits: Vec<bool>,
    provenance: String,
}

impl EdgeMask {
    pub(crate) fn from_parts(geometry: Geometry, bits: Vec<bool>, provenance: String) -> Self {
        debug_assert_eq!(bits.len(), geometry.len());
        Self {
            geometry,
            bits,
            provenance,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    #[inline]
    pub fn is_set(&self, index: [usize; 3]) -> bool {
        self.bits[self.geometry.linear(index)]
    }

    /// Number of marked voxels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Clear every mark lying within `margin` voxels of any grid face.
    pub(crate) fn clear_shell(&mut self, margin: usize) {
        if margin == 0 {
            return;
        }
        let [nx, ny, nz] = self.geometry.dims;
        let clamp = |n: usize| (margin.min(n), n.saturating_sub(margin));
        let (x0, x1) = clamp(nx);
        let (y0, y1) = clamp(ny);
        let (z0, z1) = clamp(nz);
        for k in 0..nz {
            for j in 0..ny {
                let interior_jk = (y0..y1).contains(&j) && (z0..z1).contains(&k);
                for i in 0..nx {
                    if !(interior_jk && (x0..x1).contains(&i)) {
                        self.bits[self.geometry.linear([i, j, k])] = false;
                    }
                }
            }
        }
    }

    /// Flat offsets of marked voxels in ascending order.
    pub fn true_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}
