//! Shared oracles and fixtures for the integration suites.
//!
//! The oracles deliberately reimplement the library's math in the most direct
//! form available (triple loops, quadratic scans) so the optimized paths are
//! checked against independent code rather than against themselves.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voxedge::{Border, DensityGrid, Geometry, Kernel3D, PointCloud};

/// Direct triple-loop correlation over the kernel's signed offsets:
/// `out[v] = sum over o of kernel[o] * grid[v + o]`.
pub fn oracle_convolve(grid: &DensityGrid, kernel: &Kernel3D, border: Border) -> Vec<f64> {
    let [nx, ny, nz] = grid.dims();
    let [rx, ry, rz] = kernel.radius();
    let (rx, ry, rz) = (rx as isize, ry as isize, rz as isize);
    let mut out = vec![0.0; grid.values().len()];

    let fetch = |i: isize, j: isize, k: isize| -> f64 {
        let in_bounds = |v: isize, n: usize| (0..n as isize).contains(&v);
        match border {
            Border::Replicate => {
                let c = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
                grid.values()[c(i, nx) + nx * (c(j, ny) + ny * c(k, nz))]
            }
            Border::Zero => {
                if in_bounds(i, nx) && in_bounds(j, ny) && in_bounds(k, nz) {
                    grid.values()[i as usize + nx * (j as usize + ny * k as usize)]
                } else {
                    0.0
                }
            }
        }
    };

    for k in 0..nz as isize {
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                let mut acc = 0.0;
                for oz in -rz..=rz {
                    for oy in -ry..=ry {
                        for ox in -rx..=rx {
                            acc += kernel.weight_at([ox, oy, oz]) * fetch(i + ox, j + oy, k + oz);
                        }
                    }
                }
                out[i as usize + nx * (j as usize + ny * k as usize)] = acc;
            }
        }
    }
    out
}

/// Quadratic-scan nearest-neighbor distances from every `from` point into `to`.
pub fn oracle_nn_distances(from: &[[f64; 3]], to: &[[f64; 3]]) -> Vec<f64> {
    assert!(!to.is_empty());
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| {
                    let dx = p[0] - q[0];
                    let dy = p[1] - q[1];
                    let dz = p[2] - q[2];
                    dx * dx + dy * dy + dz * dz
                })
                .min_by(f64::total_cmp)
                .unwrap()
                .sqrt()
        })
        .collect()
}

/// Reference points whose nearest data point lies within each threshold.
pub fn oracle_completeness_counts(
    data: &[[f64; 3]],
    reference: &[[f64; 3]],
    thresholds: &[f64],
) -> Vec<usize> {
    let dists = if data.is_empty() {
        vec![f64::INFINITY; reference.len()]
    } else {
        oracle_nn_distances(reference, data)
    };
    thresholds
        .iter()
        .map(|&t| dists.iter().filter(|&&d| d <= t).count())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_geometry(dims: [usize; 3]) -> Geometry {
    Geometry::new(dims, [1.0; 3], [0.0; 3]).unwrap()
}

/// Grid of uniform random densities in [0, hi).
pub fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], hi: f64) -> DensityGrid {
    DensityGrid::from_fn(unit_geometry(dims), |_| rng.gen_range(0.0..hi)).unwrap()
}

/// Dense kernel with uniform random weights in [-1, 1].
pub fn random_dense_kernel(rng: &mut ChaCha8Rng, size: [usize; 3]) -> Kernel3D {
    let n = size[0] * size[1] * size[2];
    let weights = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Kernel3D::from_dense(size, weights).unwrap()
}

/// Separable kernel with uniform random factor weights in [-1, 1].
pub fn random_separable_kernel(rng: &mut ChaCha8Rng, size: [usize; 3]) -> Kernel3D {
    let factor = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };
    let fx = factor(rng, size[0]);
    let fy = factor(rng, size[1]);
    let fz = factor(rng, size[2]);
    Kernel3D::from_factors(fx, fy, fz).unwrap()
}

/// Uncolored cloud of uniform random points in [-extent, extent]^3.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> PointCloud {
    let points = (0..n)
        .map(|_| {
            [
                rng.gen_range(-extent..extent),
                rng.gen_range(-extent..extent),
                rng.gen_range(-extent..extent),
            ]
        })
        .collect();
    PointCloud::new(points, None).unwrap()
}

/// Relative agreement: |a - b| <= tol * max(1, |a|, |b|).
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}
