//! 3D convolution kernels: dense weights with an optional separable
//! factorization, plus constructors for the Sobel, Gaussian and
//! Laplacian-of-Gaussian families.

use crate::error::{Error, Result};

/// A convolution kernel on an odd-sized 3D support, stored x-fastest like the
/// grids it is applied to. When the kernel is an outer product of three 1D
/// vectors, the factors are kept alongside the dense weights so convolution
/// can run as three cheap axis passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel3D {
    size: [usize; 3],
    weights: Vec<f64>,
    factors: Option<[Vec<f64>; 3]>,
}

impl Kernel3D {
    /// Dense kernel from explicit weights (x-fastest, length = product of sizes).
    pub fn from_dense(size: [usize; 3], weights: Vec<f64>) -> Result<Self> {
        validate_size(size)?;
        if weights.len() != size[0] * size[1] * size[2] {
            return Err(Error::InvalidParameter(format!(
                "kernel weight count {} does not match size {:?}",
                weights.len(),
                size
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "kernel weights must be finite".into(),
            ));
        }
        Ok(Self {
            size,
            weights,
            factors: None,
        })
    }

    /// Separable kernel: dense weights are the outer product `fx ⊗ fy ⊗ fz`
    /// and the factors are retained.
    pub fn from_factors(fx: Vec<f64>, fy: Vec<f64>, fz: Vec<f64>) -> Result<Self> {
        let size = [fx.len(), fy.len(), fz.len()];
        validate_size(size)?;
        for f in [&fx, &fy, &fz] {
            if f.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidParameter(
                    "kernel factors must be finite".into(),
                ));
            }
        }
        let mut weights = Vec::with_capacity(size[0] * size[1] * size[2]);
        for wz in &fz {
            for wy in &fy {
                for wx in &fx {
                    weights.push(wx * wy * wz);
                }
            }
        }
        Ok(Self {
            size,
            weights,
            factors: Some([fx, fy, fz]),
        })
    }

    pub fn size(&self) -> [usize; 3] {
        self.size
    }

    /// Half-widths per axis.
    pub fn radius(&self) -> [usize; 3] {
        [self.size[0] / 2, self.size[1] / 2, self.size[2] / 2]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> Option<&[Vec<f64>; 3]> {
        self.factors.as_ref()
    }

    /// Weight at a signed offset from the kernel center.
    pub fn weight_at(&self, offset: [isize; 3]) -> f64 {
        let r = self.radius();
        let i = (offset[0] + r[0] as isize) as usize;
        let j = (offset[1] + r[1] as isize) as usize;
        let k = (offset[2] + r[2] as isize) as usize;
        self.weights[i + self.size[0] * (j + self.size[1] * k)]
    }

    /// Same dense weights with the factorization dropped, forcing the dense
    /// convolution path.
    pub fn without_factorization(&self) -> Self {
        Self {
            size: self.size,
            weights: self.weights.clone(),
            factors: None,
        }
    }

    /// Sum of all weights.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest relative deviation between the dense weights and the outer
    /// product of the factors; 0 when no factorization is present.
    pub fn factorization_error(&self) -> f64 {
        let Some([fx, fy, fz]) = &self.factors else {
            return 0.0;
        };
        let mut worst = 0.0f64;
        let mut idx = 0;
        for wz in fz {
            for wy in fy {
                for wx in fx {
                    let prod = wx * wy * wz;
                    let dense = self.weights[idx];
                    let scale = dense.abs().max(prod.abs()).max(1e-300);
                    worst = worst.max((dense - prod).abs() / scale);
                    idx += 1;
                }
            }
        }
        worst
    }

    /// True when mirrored offsets carry identical weights.
    pub fn is_symmetric(&self) -> bool {
        let r = self.radius();
        for oz in -(r[2] as isize)..=(r[2] as isize) {
            for oy in -(r[1] as isize)..=(r[1] as isize) {
                for ox in -(r[0] as isize)..=(r[0] as isize) {
                    if self.weight_at([ox, oy, oz]) != self.weight_at([-ox, -oy, -oz]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn validate_size(size: [usize; 3]) -> Result<()> {
    if size.iter().any(|&s| s == 0 || s % 2 == 0) {
        return Err(Error::InvalidParameter(format!(
            "kernel size must be odd and >= 1 per axis, got {size:?}"
        )));
    }
    Ok(())
}

/// The three 3D Sobel kernels (x, y, z).
///
/// Each is the outer product of the central-difference vector `[-1, 0, 1]`
/// along its derivative axis with the smoothing vector `[1, 2, 1]` along the
/// two others, so the x kernel's x = -1 slice is the all-negative 3x3 block
/// with center -4 and the x = +1 slice its positive mirror. Raw integer
/// weights, no normalization.
pub fn sobel_kernels() -> (Kernel3D, Kernel3D, Kernel3D) {
    let deriv = || vec![-1.0, 0.0, 1.0];
    let smooth = || vec![1.0, 2.0, 1.0];
    let x = Kernel3D::from_factors(deriv(), smooth(), smooth()).expect("static kernel");
    let y = Kernel3D::from_factors(smooth(), deriv(), smooth()).expect("static kernel");
    let z = Kernel3D::from_factors(smooth(), smooth(), deriv()).expect("static kernel");
    (x, y, z)
}

/// Default truncation radius for a sampled Gaussian: `max(1, ceil(3 sigma))`.
pub fn default_gaussian_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Sampled 1D Gaussian, normalized to unit sum.
///
/// `weights[radius + t] ∝ exp(-t^2 / (2 sigma^2))` for `t` in
/// `[-radius, radius]`.
pub fn gaussian_kernel_1d(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian sigma must be finite and > 0, got {sigma}"
        )));
    }
    let len = 2 * radius + 1;
    let mut weights = Vec::with_capacity(len);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for t in -(radius as isize)..=(radius as isize) {
        let x = t as f64;
        weights.push((-x * x * inv).exp());
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(weights)
}

/// Separable 3D Gaussian with the same sigma and radius on every axis.
pub fn gaussian_kernel_3d(sigma: f64, radius: usize) -> Result<Kernel3D> {
    let f = gaussian_kernel_1d(sigma, radius)?;
    Kernel3D::from_factors(f.clone(), f.clone(), f)
}

/// Dense Laplacian-of-Gaussian kernel on a cubic `mask_size` lattice.
///
/// Samples the closed form `∇²G(x, y, z; sigma)` then subtracts the sample
/// mean so the weights sum to zero: a truncated LoG otherwise responds to
/// constant fields, which would corrupt the zero-crossing semantics. The
/// result is symmetric by construction (a function of r² on a centered
/// lattice).
pub fn log_kernel(mask_size: usize, sigma: f64) -> Result<Kernel3D> {
    if mask_size < 3 || mask_size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "LoG mask size must be odd and >= 3, got {mask_size}"
        )));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "LoG sigma must be finite and > 0, got {sigma}"
        )));
    }
    let r = (mask_size / 2) as isize;
    let s2 = sigma * sigma;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).powf(1.5) * sigma.powi(3));
    let mut weights = Vec::with_capacity(mask_size.pow(3));
    for z in -r..=r {
        for y in -r..=r {
            for x in -r..=r {
                let r2 = (x * x + y * y + z * z) as f64;
                let g = norm * (-r2 / (2.0 * s2)).exp();
                weights.push(g * (r2 - 3.0 * s2) / (s2 * s2));
            }
        }
    }
    // Two subtraction passes push the residual sum to the ulp level.
    for _ in 0..2 {
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        for w in &mut weights {
            *w -= mean;
        }
    }
    Kernel3D::from_dense([mask_size; 3], weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sobel_x_slices_match_reference_stencil() {
        let (kx, _, _) = sobel_kernels();
        assert_eq!(kx.size(), [3, 3, 3]);
        // x = +1 slice: positive smoothing block, center 4.
        assert_eq!(kx.weight_at([1, 0, 0]), 4.0);
        assert_eq!(kx.weight_at([1, 1, 0]), 2.0);
        assert_eq!(kx.weight_at([1, 1, 1]), 1.0);
        // x = 0 slice all zeros.
        for oy in -1..=1 {
            for oz in -1..=1 {
                assert_eq!(kx.weight_at([0, oy, oz]), 0.0);
            }
        }
        // x = -1 slice is the negative mirror.
        assert_eq!(kx.weight_at([-1, 0, 0]), -4.0);
        assert_eq!(kx.weight_at([-1, -1, -1]), -1.0);
    }

    #[test]
    fn sobel_kernels_sum_to_zero() {
        let (kx, ky, kz) = sobel_kernels();
        for k in [kx, ky, kz] {
            assert_eq!(k.weight_sum(), 0.0);
            assert_eq!(k.factorization_error(), 0.0);
        }
    }

    #[test]
    fn sobel_x_equals_outer_product_expansion() {
        let (kx, _, _) = sobel_kernels();
        let d = [-1.0, 0.0, 1.0];
        let s = [1.0, 2.0, 1.0];
        for ox in -1isize..=1 {
            for oy in -1isize..=1 {
                for oz in -1isize..=1 {
                    let expect = d[(ox + 1) as usize] * s[(oy + 1) as usize] * s[(oz + 1) as usize];
                    assert_eq!(kx.weight_at([ox, oy, oz]), expect);
                }
            }
        }
    }

    #[test]
    fn gaussian_normalizes_and_symmetric() {
        for sigma in [0.1, 0.7, 1.0, 2.5, 7.0] {
            let w = gaussian_kernel_1d(sigma, default_gaussian_radius(sigma)).unwrap();
            let sum: f64 = w.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            let r = w.len() / 2;
            for t in 0..=r {
                assert_eq!(w[r + t], w[r - t]);
            }
        }
    }

    #[test]
    fn gaussian_sigma_one_radius_one_closed_form() {
        let w = gaussian_kernel_1d(1.0, 1).unwrap();
        let e = (-0.5f64).exp();
        let denom = 1.0 + 2.0 * e;
        assert_abs_diff_eq!(w[0], e / denom, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 1.0 / denom, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], e / denom, epsilon = 1e-15);
        // Frozen decimals of the closed form above.
        assert_abs_diff_eq!(w[1], 0.451863, epsilon = 5e-7);
        assert_abs_diff_eq!(w[0], 0.274069, epsilon = 5e-7);
    }

    #[test]
    fn gaussian_rejects_bad_sigma() {
        assert!(gaussian_kernel_1d(0.0, 1).is_err());
        assert!(gaussian_kernel_1d(-1.0, 1).is_err());
        assert!(gaussian_kernel_1d(f64::NAN, 1).is_err());
    }

    #[test]
    fn log_kernel_zero_sum_and_symmetric() {
        for (mask, sigma) in [(3, 0.8), (7, 1.4), (7, 7.0), (9, 2.0)] {
            let k = log_kernel(mask, sigma).unwrap();
            assert!(k.weight_sum().abs() < 1e-12, "sum {}", k.weight_sum());
            assert!(k.is_symmetric());
        }
    }

    #[test]
    fn log_kernel_rejects_even_mask() {
        assert!(log_kernel(4, 1.0).is_err());
        assert!(log_kernel(1, 1.0).is_err());
    }

    #[test]
    fn factorization_error_detects_mismatch() {
        let mut k = Kernel3D::from_factors(vec![1.0, 2.0, 1.0], vec![1.0], vec![1.0]).unwrap();
        assert_eq!(k.factorization_error(), 0.0);
        k.weights[1] += 1e-6;
        assert!(k.factorization_error() > 1e-12);
    }

    #[test]
    fn rejects_even_kernel_size() {
        assert!(Kernel3D::from_dense([2, 1, 1], vec![1.0, 1.0]).is_err());
        assert!(Kernel3D::from_factors(vec![1.0, 1.0], vec![1.0], vec![1.0]).is_err());
    }
}
