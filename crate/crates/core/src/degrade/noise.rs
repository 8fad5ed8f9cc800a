//! Additive Gaussian and multiplicative Gamma (speckle) noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::spectral::fourier_perturb;

/// One noise family with its strength. Only the selected family's field
/// exists, so there is nothing to misread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "noise_family", rename_all = "snake_case")]
pub enum NoiseSpec {
    AdditiveGaussian { sigma_g: f64 },
    Fourier { gamma_f: f64 },
    Speckle { enl_l: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::AdditiveGaussian { sigma_g } if !(sigma_g >= 0.0) || !sigma_g.is_finite() => {
                Err(Error::invalid(format!("sigma_g {sigma_g} must be >= 0")))
            }
            NoiseSpec::Fourier { gamma_f } if !(0.0..=1.0).contains(&gamma_f) => {
                Err(Error::invalid(format!("gamma_f {gamma_f} outside [0, 1]")))
            }
            NoiseSpec::Speckle { enl_l } if !(enl_l >= 1.0) || !enl_l.is_finite() => {
                Err(Error::invalid(format!("speckle looks {enl_l} must be >= 1")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply<T: Scalar>(&self, img: &Image<T>, rng: &mut RandomStream) -> Result<Image<T>> {
        match *self {
            NoiseSpec::AdditiveGaussian { sigma_g } => add_gaussian_noise(img, sigma_g, rng),
            NoiseSpec::Fourier { gamma_f } => fourier_perturb(img, gamma_f, rng),
            NoiseSpec::Speckle { enl_l } => speckle(img, enl_l, rng),
        }
    }
}

/// Adds i.i.d. N(0, σ²) per pixel, then clips.
pub fn add_gaussian_noise<T: Scalar>(img: &Image<T>, sigma_g: f64, rng: &mut RandomStream) -> Result<Image<T>> {
    NoiseSpec::AdditiveGaussian { sigma_g }.validate()?;
    if sigma_g == 0.0 {
        return Ok(img.clone());
    }
    Ok(img.map(|v| v + T::of(sigma_g * rng.standard_normal())))
}

/// Multiplies each pixel by an i.i.d. Gamma(L, 1/L) draw (mean 1, variance
/// 1/L), then clips.
pub fn speckle<T: Scalar>(img: &Image<T>, enl_l: f64, rng: &mut RandomStream) -> Result<Image<T>> {
    NoiseSpec::Speckle { enl_l }.validate()?;
    let mut n = vec![0.0; img.len()];
    rng.gamma_fill(enl_l, 1.0 / enl_l, &mut n)?;
    let mut it = n.into_iter();
    Ok(img.map(|v| v * T::of(it.next().expect("one draw per pixel"))))
}
