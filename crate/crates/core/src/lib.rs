//! Physics-guided degradation, NLLR clean-target generation and restoration
//! metrics for ultrasound B-mode images.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the `f64` instantiation used by the I/O, benchmark and CLI
//! layers.

pub mod bench;
pub mod degrade;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod nllr;
pub mod rng;
mod scalar;
pub mod serde_util;
pub mod spectral;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use scalar::Scalar;

/// Default double-precision grayscale image.
pub type GrayImage = image::Image<f64>;
pub type GrayImageF32 = image::Image<f32>;
pub type Spectrum = spectral::Spectrum<f64>;
pub type SpectrumF32 = spectral::Spectrum<f32>;
pub type BlurKernel = degrade::BlurKernel<f64>;
pub type BlurKernelF32 = degrade::BlurKernel<f32>;
pub type PatchGroup = nllr::PatchGroup<f64>;
