//! Synthetic ground-truth density fields.
//!
//! A real radiance field ramps its density smoothly from non-object to object
//! space. The generator reproduces that profile as a logistic of the signed
//! distance to an analytic shape, which gives every test field an exactly
//! known surface: the `amplitude / 2` level set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::PointCloud;
use crate::grid::{DensityGrid, Geometry};

/// Analytic shape whose surface the density ramp wraps.
///
/// `Sphere` and `Box` are centered on the grid's world center; `TwoSpheres`
/// carries explicit world-space centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Sphere {
        radius: f64,
    },
    Box {
        half_extents: [f64; 3],
    },
    TwoSpheres {
        radii: [f64; 2],
        centers: [[f64; 3]; 2],
    },
}

/// Parameters of a synthetic density field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub shape: Shape,
    /// Interior density plateau.
    pub amplitude: f64,
    /// Logistic transition width (mm).
    pub ramp_width: f64,
    /// Standard deviation of additive Gaussian noise; 0 disables noise.
    pub noise_sigma: f64,
    /// Noise seed; ignored when `noise_sigma == 0`.
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || self.amplitude <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be finite and > 0, got {}",
                self.amplitude
            )));
        }
        if !self.ramp_width.is_finite() || self.ramp_width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ramp_width must be finite and > 0, got {}",
                self.ramp_width
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        match &self.shape {
            Shape::Sphere { radius } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidParameter("sphere radius must be > 0".into()));
                }
            }
            Shape::Box { half_extents } => {
                if half_extents.iter().any(|h| !h.is_finite() || *h <= 0.0) {
                    return Err(Error::InvalidParameter(
                        "box half-extents must be > 0".into(),
                    ));
                }
            }
            Shape::TwoSpheres { radii, .. } => {
                if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
                    return Err(Error::InvalidParameter("sphere radii must be > 0".into()));
                }
            }
        }
        Ok(())
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Signed distance to the shape surface, negative inside.
pub fn signed_distance(shape: &Shape, grid_center: [f64; 3], p: [f64; 3]) -> f64 {
    match shape {
        Shape::Sphere { radius } => norm(sub(p, grid_center)) - radius,
        Shape::Box { half_extents } => {
            let d = sub(p, grid_center);
            let q = [
                d[0].abs() - half_extents[0],
                d[1].abs() - half_extents[1],
                d[2].abs() - half_extents[2],
            ];
            let outside = norm([q[0].max(0.0), q[1].max(0.0), q[2].max(0.0)]);
            let inside = q[0].max(q[1]).max(q[2]).min(0.0);
            outside + inside
        }
        Shape::TwoSpheres { radii, centers } => {
            let d0 = norm(sub(p, centers[0])) - radii[0];
            let d1 = norm(sub(p, centers[1])) - radii[1];
            d0.min(d1)
        }
    }
}

/// Sample the density ramp plus optional noise onto a grid.
///
/// Noiseless density is `A / (1 + exp(sd(p) / s))`: `A` on the deep inside,
/// `A/2` exactly on the surface, 0 far outside. Noise is drawn voxel by voxel
/// in storage order from a seeded generator, so output is bitwise
/// reproducible; `noise_sigma == 0` skips the generator entirely.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
) -> Result<DensityGrid> {
    spec.validate()?;
    if dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidConfig(format!(
            "synthetic grids need at least 3 voxels per axis (3x3x3 filter support), got {dims:?}"
        )));
    }
    let geometry = Geometry::new(dims, spacing, origin)?;
    let center = geometry.world_center();

    let mut values = Vec::with_capacity(geometry.len());
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = geometry.index_to_world_unchecked([i, j, k]);
                let sd = signed_distance(&spec.shape, center, p);
                values.push(spec.amplitude / (1.0 + (sd / spec.ramp_width).exp()));
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for v in &mut values {
            let n: f64 = StandardNormal.sample(&mut rng);
            *v += spec.noise_sigma * n;
        }
    }

    DensityGrid::new(geometry, values)
}

/// Draw `count` points uniformly from the analytic surface of the shape.
///
/// Stands in for a scanned reference cloud when evaluating reconstructions of
/// synthetic fields. `geometry` supplies the world center for the
/// grid-centered shapes. Deterministic given `seed`.
pub fn analytic_surface_points(
    spec: &SyntheticSpec,
    geometry: &Geometry,
    count: usize,
    seed: u64,
) -> Result<PointCloud> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter(
            "surface sample count must be > 0".into(),
        ));
    }
    let center = geometry.world_center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);

    match &spec.shape {
        Shape::Sphere { radius } => {
            for _ in 0..count {
                let u = unit_vector(&mut rng);
                points.push([
                    center[0] + radius * u[0],
                    center[1] + radius * u[1],
                    center[2] + radius * u[2],
                ]);
            }
        }
        Shape::Box { half_extents } => {
            let [hx, hy, hz] = *half_extents;
            // Face areas per axis pair; each axis has two opposite faces.
            let areas = [hy * hz, hx * hz, hx * hy];
            let total: f64 = 2.0 * (areas[0] + areas[1] + areas[2]);
            for _ in 0..count {
                let mut pick = rand::Rng::gen_range(&mut rng, 0.0..total);
                let mut face = 5;
                for f in 0..6 {
                    let a = areas[f / 2];
                    if pick < a {
                        face = f;
                        break;
                    }
                    pick -= a;
                }
                let axis = face / 2;
                let side = if face % 2 == 0 { -1.0 } else { 1.0 };
                let h = [hx, hy, hz];
                let mut p = [0.0f64; 3];
                p[axis] = side * h[axis];
                let others = [(axis + 1) % 3, (axis + 2) % 3];
                for &a in &others {
                    p[a] = rand::Rng::gen_range(&mut rng, -h[a]..h[a]);
                }
                points.push([center[0] + p[0], center[1] + p[1], center[2] + p[2]]);
            }
        }
        Shape::TwoSpheres { radii, centers } => {
            let areas = [radii[0] * radii[0], radii[1] * radii[1]];
            let total = areas[0] + areas[1];
            while points.len() < count {
                let pick: f64 = rand::Rng::gen_range(&mut rng, 0.0..total);
                let s = usize::from(pick >= areas[0]);
                let o = 1 - s;
                let u = unit_vector(&mut rng);
                let p = [
                    centers[s][0] + radii[s] * u[0],
                    centers[s][1] + radii[s] * u[1],
                    centers[s][2] + radii[s] * u[2],
                ];
                // Points swallowed by the other sphere are not on the union surface.
                if norm(sub(p, centers[o])) < radii[o] {
                    continue;
                }
                points.push(p);
            }
        }
    }

    PointCloud::new(points, None)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = norm(v);
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sphere_spec(noise_sigma: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            shape: Shape::Sphere { radius: 10.0 },
            amplitude: 100.0,
            ramp_width: 0.5,
            noise_sigma,
            seed,
        }
    }

    #[test]
    fn logistic_midpoint_on_surface() {
        let spec = sphere_spec(0.0, 0);
        let center = [0.0, 0.0, 0.0];
        let sd = signed_distance(&spec.shape, center, [10.0, 0.0, 0.0]);
        let value = spec.amplitude / (1.0 + (sd / spec.ramp_width).exp());
        assert_eq!(value, 50.0);
    }

    #[test]
    fn center_value_matches_closed_form() {
        // distance 0 from center, R/s = 20: A * 1/(1 + e^-20)
        let spec = sphere_spec(0.0, 0);
        let grid = generate_synthetic(&spec, [33, 33, 33], [1.0; 3], [0.0; 3]).unwrap();
        let center_value = grid.sample([16, 16, 16]).unwrap();
        let expected = 100.0 / (1.0 + (-20.0f64).exp());
        assert_abs_diff_eq!(center_value, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(center_value, 100.0, epsilon = 1e-6);
        assert!((50.0..=100.0).contains(&center_value));
    }

    #[test]
    fn noiseless_field_in_open_unit_range() {
        let spec = sphere_spec(0.0, 0);
        let grid = generate_synthetic(&spec, [9, 9, 9], [4.0; 3], [0.0; 3]).unwrap();
        assert!(grid.values().iter().all(|&v| v > 0.0 && v < 100.0));
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let spec = sphere_spec(1.0, 42);
        let a = generate_synthetic(&spec, [8, 8, 8], [1.0; 3], [0.0; 3]).unwrap();
        let b = generate_synthetic(&spec, [8, 8, 8], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(a.values(), b.values());

        let other = SyntheticSpec { seed: 43, ..spec };
        let c = generate_synthetic(&other, [8, 8, 8], [1.0; 3], [0.0; 3]).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn zero_noise_ignores_seed() {
        let a = generate_synthetic(&sphere_spec(0.0, 1), [8, 8, 8], [1.0; 3], [0.0; 3]).unwrap();
        let b = generate_synthetic(&sphere_spec(0.0, 2), [8, 8, 8], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn rejects_degenerate_dims() {
        let r = generate_synthetic(&sphere_spec(0.0, 0), [2, 8, 8], [1.0; 3], [0.0; 3]);
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn field_monotone_along_axis_rays_from_center() {
        let spec = sphere_spec(0.0, 0);
        let grid = generate_synthetic(&spec, [33, 33, 33], [1.0; 3], [0.0; 3]).unwrap();
        let c = 16usize;
        for axis in 0..3 {
            let mut prev = grid.sample([c, c, c]).unwrap();
            for step in 1..=16 {
                let mut idx = [c, c, c];
                idx[axis] = c + step;
                let v = grid.sample(idx).unwrap();
                assert!(v <= prev, "axis {axis} step {step}: {v} > {prev}");
                prev = v;
            }
            let mut prev = grid.sample([c, c, c]).unwrap();
            for step in 1..=16 {
                let mut idx = [c, c, c];
                idx[axis] = c - step;
                let v = grid.sample(idx).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn surface_points_lie_on_sphere() {
        let spec = sphere_spec(0.0, 0);
        let geometry = Geometry::new([33, 33, 33], [1.0; 3], [0.0; 3]).unwrap();
        let cloud = analytic_surface_points(&spec, &geometry, 1000, 7).unwrap();
        assert_eq!(cloud.len(), 1000);
        let c = geometry.world_center();
        for p in cloud.points() {
            let r = norm(sub(*p, c));
            assert!((r - 10.0).abs() < 1e-9, "off-surface point at radius {r}");
        }
    }

    #[test]
    fn surface_points_deterministic_per_seed() {
        let spec = sphere_spec(0.0, 0);
        let geometry = Geometry::new([9, 9, 9], [1.0; 3], [0.0; 3]).unwrap();
        let a = analytic_surface_points(&spec, &geometry, 64, 1).unwrap();
        let b = analytic_surface_points(&spec, &geometry, 64, 1).unwrap();
        let c = analytic_surface_points(&spec, &geometry, 64, 2).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn box_surface_points_on_boundary() {
        let spec = SyntheticSpec {
            shape: Shape::Box {
                half_extents: [3.0, 2.0, 1.0],
            },
            amplitude: 1.0,
            ramp_width: 0.1,
            noise_sigma: 0.0,
            seed: 0,
        };
        let geometry = Geometry::new([9, 9, 9], [1.0; 3], [0.0; 3]).unwrap();
        let cloud = analytic_surface_points(&spec, &geometry, 500, 3).unwrap();
        let c = geometry.world_center();
        for p in cloud.points() {
            let sd = signed_distance(&spec.shape, c, *p);
            assert!(sd.abs() < 1e-9);
        }
    }

    #[test]
    fn two_spheres_union_surface_only() {
        let spec = SyntheticSpec {
            shape: Shape::TwoSpheres {
                radii: [2.0, 1.5],
                centers: [[3.0, 4.0, 4.0], [5.5, 4.0, 4.0]],
            },
            amplitude: 1.0,
            ramp_width: 0.1,
            noise_sigma: 0.0,
            seed: 0,
        };
        let geometry = Geometry::new([9, 9, 9], [1.0; 3], [0.0; 3]).unwrap();
        let cloud = analytic_surface_points(&spec, &geometry, 400, 9).unwrap();
        assert_eq!(cloud.len(), 400);
        for p in cloud.points() {
            let sd = signed_distance(&spec.shape, geometry.world_center(), *p);
            // On the union surface: zero signed distance and not inside either ball.
            assert!(sd.abs() < 1e-9);
        }
    }
}
