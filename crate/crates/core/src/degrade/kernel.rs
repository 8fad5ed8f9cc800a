//! Gaussian PSF surrogate and reflective-boundary convolution.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Normalized isotropic Gaussian `k × k` kernel, `k` odd.
///
/// The 2D taps are the outer product of a normalized 1D profile, which is
/// exactly the normalized `exp(-(u²+v²)/(2σ²))` grid and lets [`blur`] run
/// as two 1D passes.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel<T> {
    size: usize,
    sigma: f64,
    profile: Vec<T>,
    taps: Vec<T>,
}

impl<T: Scalar> BlurKernel<T> {
    fn build(size: usize, sigma: f64) -> Self {
        let half = (size / 2) as i64;
        let profile: Vec<f64> = if size == 1 {
            vec![1.0]
        } else {
            let w: Vec<f64> = (-half..=half)
                .map(|u| (-((u * u) as f64) / (2.0 * sigma * sigma)).exp())
                .collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        };
        let mut taps = Vec::with_capacity(size * size);
        for a in &profile {
            for b in &profile {
                taps.push(T::of(a * b));
            }
        }
        Self {
            size,
            sigma,
            profile: profile.into_iter().map(T::of).collect(),
            taps,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Standard deviation in pixels; 0 for the 1×1 identity kernel.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Row-major `k × k` taps.
    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    #[inline]
    pub fn tap(&self, row: usize, col: usize) -> T {
        self.taps[row * self.size + col]
    }

    /// Normalized 1D factor of the separable kernel.
    pub fn profile(&self) -> &[T] {
        &self.profile
    }
}

/// Kernel of odd size `k` with `σ = (k-1)/6`, so that `k = 2⌈3σ⌉ + 1`.
pub fn gaussian_kernel<T: Scalar>(k: usize) -> Result<BlurKernel<T>> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::invalid(format!("kernel size {k} must be odd and positive")));
    }
    Ok(BlurKernel::build(k, (k - 1) as f64 / 6.0))
}

/// Kernel of size `2⌈3σ⌉ + 1` with the given `σ`.
pub fn kernel_from_sigma<T: Scalar>(sigma: f64) -> Result<BlurKernel<T>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma {sigma} must be positive")));
    }
    let k = 2 * (3.0 * sigma).ceil() as usize + 1;
    Ok(BlurKernel::build(k, sigma))
}

/// Symmetric (edge-duplicating) reflection of any integer index into `0..n`.
#[inline]
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Convolves with `kernel` under mirror padding; output is clipped.
pub fn blur<T: Scalar>(img: &Image<T>, kernel: &BlurKernel<T>) -> Image<T> {
    if kernel.size == 1 {
        return img.clone();
    }
    let (h, w) = img.dims();
    let half = (kernel.size / 2) as isize;
    let g = &kernel.profile;

    let mut tmp = vec![T::zero(); h * w];
    for r in 0..h {
        let row = img.row(r);
        for c in 0..w {
            let mut acc = T::zero();
            for (j, &t) in g.iter().enumerate() {
                acc += t * row[reflect_index(c as isize + j as isize - half, w)];
            }
            tmp[r * w + c] = acc;
        }
    }

    let mut out = vec![T::zero(); h * w];
    for (i, &t) in g.iter().enumerate() {
        for r in 0..h {
            let src = reflect_index(r as isize + i as isize - half, h) * w;
            let dst = &mut out[r * w..(r + 1) * w];
            for (o, &v) in dst.iter_mut().zip(&tmp[src..src + w]) {
                *o += t * v;
            }
        }
    }
    out.iter_mut().for_each(|v| *v = v.clamp_unit());
    Image::from_raw(h, w, out)
}
