//! Physics-guided corruption operators and their stochastic composition.

mod compose;
mod kernel;
mod noise;

pub use compose::{
    apply_degradation, draw_training_degradation, draw_training_degradation_with, stress_degradation,
    CompositionConfig, DegradationSpec, GAMMA_F_RANGE, LIGHT_PATH_BLUR, SIGMA_G_RANGE, TRAINING_BLUR_SIZES,
};
pub use kernel::{blur, gaussian_kernel, kernel_from_sigma, BlurKernel};
pub use noise::{add_gaussian_noise, speckle, NoiseSpec};
