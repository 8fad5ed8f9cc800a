//! 2D DFT, Fourier-domain complex perturbation and Wiener deconvolution.

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::degrade::BlurKernel;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Row-major complex spectrum with its spatial dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    height: usize,
    width: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::invalid(format!(
                "spectrum of {} bins does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::from_vec(height, width, vec![Complex::zero(); height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.width + col]
    }

    /// Largest complex modulus over all bins, DC included.
    pub fn max_modulus(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// Unnormalized 2D transform in place, rows then columns.
fn transform_2d<T: Scalar>(data: &mut [Complex<T>], height: usize, width: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<T>::new();
    let row_fft = planner.plan_fft(width, direction);
    let col_fft = planner.plan_fft(height, direction);
    let mut scratch = vec![Complex::zero(); row_fft.get_inplace_scratch_len().max(col_fft.get_inplace_scratch_len())];

    row_fft.process_with_scratch(data, &mut scratch);

    let mut column = vec![Complex::zero(); height];
    for c in 0..width {
        for r in 0..height {
            column[r] = data[r * width + c];
        }
        col_fft.process_with_scratch(&mut column, &mut scratch);
        for r in 0..height {
            data[r * width + c] = column[r];
        }
    }
}

/// Unnormalized forward DFT; the DC bin is the pixel sum.
pub fn fft2<T: Scalar>(img: &Image<T>) -> Spectrum<T> {
    let (h, w) = img.dims();
    let mut data: Vec<Complex<T>> = img.data().iter().map(|&v| Complex::new(v, T::zero())).collect();
    transform_2d(&mut data, h, w, FftDirection::Forward);
    Spectrum {
        height: h,
        width: w,
        data,
    }
}

/// Inverse DFT scaled by `1/(H·W)` without taking the magnitude.
pub fn ifft2<T: Scalar>(spec: &Spectrum<T>) -> Vec<Complex<T>> {
    let mut data = spec.data.clone();
    transform_2d(&mut data, spec.height, spec.width, FftDirection::Inverse);
    let scale = T::one() / T::of((spec.height * spec.width) as f64);
    data.iter_mut().for_each(|z| *z *= scale);
    data
}

/// `|F⁻¹(spec)|` per pixel, clipped to `[0, 1]`.
pub fn ifft2_magnitude<T: Scalar>(spec: &Spectrum<T>) -> Image<T> {
    let data = ifft2(spec).into_iter().map(|z| z.norm().clamp_unit()).collect();
    Image::from_raw(spec.height, spec.width, data)
}

/// Per-component variance of the complex Gaussian ζ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaScale {
    /// Real and imaginary parts each N(0, 1/2): `E|ζ|² = 1`.
    #[default]
    UnitModulus,
    /// Real and imaginary parts each N(0, 1).
    UnitComponents,
}

impl ZetaScale {
    fn component_std(self) -> f64 {
        match self {
            ZetaScale::UnitModulus => std::f64::consts::FRAC_1_SQRT_2,
            ZetaScale::UnitComponents => 1.0,
        }
    }
}

/// Draws one ζ per bin in row-major order, real part then imaginary part.
pub fn draw_zeta(len: usize, scale: ZetaScale, rng: &mut RandomStream) -> Vec<Complex<f64>> {
    let s = scale.component_std();
    (0..len)
        .map(|_| {
            let re = s * rng.standard_normal();
            let im = s * rng.standard_normal();
            Complex::new(re, im)
        })
        .collect()
}

/// `(1-γ)·F + γ·‖F‖∞·ζ`.
pub fn blend_spectrum<T: Scalar>(spec: &Spectrum<T>, gamma: f64, zeta: &[Complex<f64>]) -> Result<Spectrum<T>> {
    check_gamma(gamma)?;
    if zeta.len() != spec.data.len() {
        return Err(Error::invalid(format!(
            "{} noise draws for {} bins",
            zeta.len(),
            spec.data.len()
        )));
    }
    let keep = T::of(1.0 - gamma);
    let amp = T::of(gamma) * spec.max_modulus();
    let data = spec
        .data
        .iter()
        .zip(zeta)
        .map(|(&f, z)| f * keep + Complex::new(T::of(z.re), T::of(z.im)) * amp)
        .collect();
    Ok(Spectrum {
        height: spec.height,
        width: spec.width,
        data,
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// Fourier-domain complex perturbation with the default ζ scale.
pub fn fourier_perturb<T: Scalar>(img: &Image<T>, gamma: f64, rng: &mut RandomStream) -> Result<Image<T>> {
    fourier_perturb_with(img, gamma, ZetaScale::default(), rng)
}

pub fn fourier_perturb_with<T: Scalar>(
    img: &Image<T>,
    gamma: f64,
    scale: ZetaScale,
    rng: &mut RandomStream,
) -> Result<Image<T>> {
    check_gamma(gamma)?;
    let spec = fft2(img);
    let zeta = draw_zeta(img.len(), scale, rng);
    let blended = blend_spectrum(&spec, gamma, &zeta)?;
    Ok(ifft2_magnitude(&blended))
}

/// Transfer function of `kernel` embedded in an `h × w` grid, centered at the
/// origin with wrap-around.
pub fn kernel_transfer<T: Scalar>(kernel: &BlurKernel<T>, h: usize, w: usize) -> Spectrum<T> {
    let k = kernel.size();
    let half = (k / 2) as isize;
    let mut data = vec![Complex::zero(); h * w];
    for u in 0..k {
        let r = (u as isize - half).rem_euclid(h as isize) as usize;
        for v in 0..k {
            let c = (v as isize - half).rem_euclid(w as isize) as usize;
            data[r * w + c].re += kernel.tap(u, v);
        }
    }
    transform_2d(&mut data, h, w, FftDirection::Forward);
    Spectrum {
        height: h,
        width: w,
        data,
    }
}

/// Wiener deconvolution `conj(H)·F / (|H|² + nsr)` under a circular blur model.
pub fn wiener_deblur<T: Scalar>(img: &Image<T>, kernel: &BlurKernel<T>, nsr: f64) -> Result<Image<T>> {
    if !(nsr > 0.0) || !nsr.is_finite() {
        return Err(Error::invalid(format!("noise-to-signal ratio {nsr} must be positive")));
    }
    let (h, w) = img.dims();
    let transfer = kernel_transfer(kernel, h, w);
    let mut spec = fft2(img);
    let nsr = T::of(nsr);
    for (g, hk) in spec.data.iter_mut().zip(&transfer.data) {
        *g = hk.conj() * *g / (hk.norm_sqr() + nsr);
    }
    Ok(ifft2_magnitude(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::gaussian_kernel;

    fn random_image(h: usize, w: usize, seed: u64) -> Image<f64> {
        let mut rng = RandomStream::new(seed, 0);
        Image::from_fn(h, w, |_, _| rng.uniform(0.0, 1.0)).unwrap()
    }

    /// O(N²) direct-sum DFT.
    fn dft_oracle(img: &Image<f64>) -> Vec<Complex<f64>> {
        let (h, w) = img.dims();
        let mut out = vec![Complex::zero(); h * w];
        for k in 0..h {
            for l in 0..w {
                let mut acc = Complex::zero();
                for r in 0..h {
                    for c in 0..w {
                        let phase = -2.0 * std::f64::consts::PI
                            * ((k * r) as f64 / h as f64 + (l * c) as f64 / w as f64);
                        acc += Complex::from_polar(img.get(r, c), phase);
                    }
                }
                out[k * w + l] = acc;
            }
        }
        out
    }

    #[test]
    fn constant_and_impulse_spectra() {
        let img = Image::filled(4, 6, 0.25).unwrap();
        let s = fft2(&img);
        assert!((s.get(0, 0) - Complex::new(6.0, 0.0)).norm() < 1e-9);
        assert!(s.data()[1..].iter().all(|z| z.norm() < 1e-9));

        let mut d = vec![0.0; 25];
        d[0] = 1.0;
        let s = fft2(&Image::from_vec(5, 5, d).unwrap());
        assert!(s.data().iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn matches_direct_dft() {
        let img = random_image(4, 4, 1);
        let s = fft2(&img);
        for (a, b) in s.data().iter().zip(dft_oracle(&img)) {
            assert!((a - b).norm() < 1e-9);
        }
        let img = random_image(6, 10, 2);
        let s = fft2(&img);
        for (a, b) in s.data().iter().zip(dft_oracle(&img)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_magnitude_cases() {
        let img = random_image(8, 5, 3);
        let back = ifft2_magnitude(&fft2(&img));
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-9);
        }
        let zero = ifft2_magnitude(&Spectrum::<f64>::zeros(3, 3).unwrap());
        assert!(zero.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inverse_magnitude_folds_sign() {
        // 2x2 spectrum [[0, 0.8], [0, 0]] inverts to x[r][c] = 0.8·(-1)^c / 4
        let spec = Spectrum::from_vec(
            2,
            2,
            vec![
                Complex::new(0.0f64, 0.0),
                Complex::new(0.8, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let raw = ifft2(&spec);
        assert!((raw[1].re + 0.2).abs() < 1e-15);
        let img = ifft2_magnitude(&spec);
        for v in img.data() {
            assert!((v - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gamma_is_identity() {
        let img = random_image(16, 16, 4);
        let out = fourier_perturb(&img, 0.0, &mut RandomStream::new(1, 1)).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn perturb_is_deterministic_and_bounded() {
        let img = random_image(16, 12, 5);
        let a = fourier_perturb(&img, 0.1, &mut RandomStream::new(8, 2)).unwrap();
        let b = fourier_perturb(&img, 0.1, &mut RandomStream::new(8, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(fourier_perturb(&img, 1.5, &mut RandomStream::new(8, 2)).is_err());
        assert!(fourier_perturb(&img, -0.1, &mut RandomStream::new(8, 2)).is_err());
    }

    #[test]
    fn blend_matches_direct_formula() {
        let img = random_image(4, 4, 6);
        let gamma = 0.5;
        let spec = fft2(&img);
        let zeta = draw_zeta(16, ZetaScale::UnitModulus, &mut RandomStream::new(3, 9));
        let blended = blend_spectrum(&spec, gamma, &zeta).unwrap();

        // the same draws, reproduced independently from the stream
        let mut rng = RandomStream::new(3, 9);
        let oracle_f = dft_oracle(&img);
        let peak = oracle_f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, b) in blended.data().iter().enumerate() {
            let re = rng.standard_normal() / 2f64.sqrt();
            let im = rng.standard_normal() / 2f64.sqrt();
            let want = oracle_f[i] * (1.0 - gamma) + Complex::new(re, im) * (gamma * peak);
            assert!((b - want).norm() < 1e-9, "bin {i}");
        }

        let out = fourier_perturb(&img, gamma, &mut RandomStream::new(3, 9)).unwrap();
        assert_eq!(out, ifft2_magnitude(&blended));
    }

    #[test]
    fn unit_component_scale_doubles_power() {
        let mut a = RandomStream::new(1, 0);
        let mut b = RandomStream::new(1, 0);
        let za = draw_zeta(1000, ZetaScale::UnitModulus, &mut a);
        let zb = draw_zeta(1000, ZetaScale::UnitComponents, &mut b);
        for (x, y) in za.iter().zip(&zb) {
            assert!((x.norm_sqr() * 2.0 - y.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn wiener_identity_kernel() {
        let img = random_image(12, 12, 7);
        let k = gaussian_kernel::<f64>(1).unwrap();
        let out = wiener_deblur(&img, &k, 1e-6).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn wiener_constant_dc_gain() {
        let img = Image::filled(16, 16, 0.6f64).unwrap();
        for k in [3, 7, 15] {
            let out = wiener_deblur(&img, &gaussian_kernel(k).unwrap(), 0.01).unwrap();
            let want = 0.6 / 1.01;
            assert!(out.data().iter().all(|v| (v - want).abs() < 1e-4));
        }
    }

    #[test]
    fn wiener_rejects_bad_nsr() {
        let img = Image::filled(4, 4, 0.6).unwrap();
        let k = gaussian_kernel(3).unwrap();
        assert!(wiener_deblur(&img, &k, 0.0).is_err());
        assert!(wiener_deblur(&img, &k, -1.0).is_err());
    }

    #[test]
    fn wiener_inverts_circular_blur() {
        // circular blur built from the same transfer function
        let img = random_image(16, 16, 8);
        let k = gaussian_kernel(3).unwrap();
        let transfer = kernel_transfer(&k, 16, 16);
        let mut spec = fft2(&img);
        for (g, h) in spec.data_mut().iter_mut().zip(transfer.data()) {
            *g *= h;
        }
        let blurred = ifft2_magnitude(&spec);
        let restored = wiener_deblur(&blurred, &k, 1e-8).unwrap();
        let err: f64 = restored.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 256.0;
        let before: f64 = blurred.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 256.0;
        assert!(err < before / 10.0, "{err} vs {before}");
    }

    #[test]
    fn f32_round_trip() {
        let img = random_image(8, 8, 9).cast::<f32>();
        let back = ifft2_magnitude(&fft2(&img));
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
