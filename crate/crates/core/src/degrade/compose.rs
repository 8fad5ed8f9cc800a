//! Stochastic composition of blur and noise for training inputs, and the
//! fixed-parameter stress path used at test time.

use serde::{Deserialize, Serialize};

use super::kernel::{blur, gaussian_kernel};
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::serde_util::u64_string;
use crate::spectral::fourier_perturb;

/// Kernel sizes drawn for the blur -> noise path.
pub const TRAINING_BLUR_SIZES: [usize; 8] = [3, 5, 7, 9, 11, 13, 15, 17];
/// Kernel size closing the light noise -> blur path.
pub const LIGHT_PATH_BLUR: usize = 3;
pub const SIGMA_G_RANGE: (f64, f64) = (0.05, 0.20);
pub const GAMMA_F_RANGE: (f64, f64) = (0.0, 0.2);

/// Firing probabilities of the two independent composition paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub p_blur_noise: f64,
    pub p_light: f64,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        Self {
            p_blur_noise: 0.55,
            p_light: 0.45,
        }
    }
}

/// Every random choice of one training degradation. Replaying it needs
/// nothing else: the noise fields are drawn from `RandomStream::new(seed, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub applied_blur_noise: bool,
    pub blur_k: usize,
    #[serde(flatten)]
    pub noise: NoiseSpec,
    pub applied_light_path: bool,
    pub light_gamma_f: f64,
    #[serde(with = "u64_string")]
    pub seed: u64,
}

impl DegradationSpec {
    /// A spec with both paths disabled.
    pub fn identity(seed: u64) -> Self {
        Self {
            applied_blur_noise: false,
            blur_k: TRAINING_BLUR_SIZES[0],
            noise: NoiseSpec::AdditiveGaussian { sigma_g: 0.0 },
            applied_light_path: false,
            light_gamma_f: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blur_k == 0 || self.blur_k.is_multiple_of(2) {
            return Err(Error::invalid(format!("blur_k {} must be odd", self.blur_k)));
        }
        self.noise.validate()?;
        if !(0.0..=1.0).contains(&self.light_gamma_f) {
            return Err(Error::invalid(format!(
                "light_gamma_f {} outside [0, 1]",
                self.light_gamma_f
            )));
        }
        Ok(())
    }
}

pub fn draw_training_degradation(rng: &mut RandomStream) -> DegradationSpec {
    draw_training_degradation_with(rng, &CompositionConfig::default())
}

/// Draws one composition. The number and order of draws is fixed regardless
/// of which paths fire, so specs line up across seeds.
pub fn draw_training_degradation_with(rng: &mut RandomStream, cfg: &CompositionConfig) -> DegradationSpec {
    let applied_blur_noise = rng.bernoulli(cfg.p_blur_noise);
    let blur_k = TRAINING_BLUR_SIZES[rng.index(TRAINING_BLUR_SIZES.len())];
    let gaussian_family = rng.bernoulli(0.5);
    let sigma_g = rng.uniform(SIGMA_G_RANGE.0, SIGMA_G_RANGE.1);
    let gamma_f = rng.uniform(GAMMA_F_RANGE.0, GAMMA_F_RANGE.1);
    let applied_light_path = rng.bernoulli(cfg.p_light);
    let light_gamma_f = rng.uniform(GAMMA_F_RANGE.0, GAMMA_F_RANGE.1);
    let seed = rng.next_u64();
    let noise = if gaussian_family {
        NoiseSpec::AdditiveGaussian { sigma_g }
    } else {
        NoiseSpec::Fourier { gamma_f }
    };
    DegradationSpec {
        applied_blur_noise,
        blur_k,
        noise,
        applied_light_path,
        light_gamma_f,
        seed,
    }
}

/// Runs the blur -> noise path, then the light Fourier -> blur(3) path, each
/// only if flagged. Every step clips.
pub fn apply_degradation<T: Scalar>(img: &Image<T>, spec: &DegradationSpec) -> Result<Image<T>> {
    spec.validate()?;
    let mut rng = RandomStream::new(spec.seed, 0);
    let mut out = img.clone();
    if spec.applied_blur_noise {
        out = blur(&out, &gaussian_kernel(spec.blur_k)?);
        out = spec.noise.apply(&out, &mut rng)?;
    }
    if spec.applied_light_path {
        out = fourier_perturb(&out, spec.light_gamma_f, &mut rng)?;
        out = blur(&out, &gaussian_kernel(LIGHT_PATH_BLUR)?);
    }
    Ok(out)
}

/// Deterministic blur (if `blur_k` is given) followed by Fourier perturbation
/// at a fixed `gamma_f`.
pub fn stress_degradation<T: Scalar>(
    img: &Image<T>,
    gamma_f: f64,
    blur_k: Option<usize>,
    rng: &mut RandomStream,
) -> Result<Image<T>> {
    NoiseSpec::Fourier { gamma_f }.validate()?;
    let blurred = match blur_k {
        Some(k) => blur(img, &gaussian_kernel(k)?),
        None => img.clone(),
    };
    fourier_perturb(&blurred, gamma_f, rng)
}
