//! Quality (PSNR, SSIM) and resolution (FWHM, gradients, contrast) metrics.

mod quality;
mod resolution;

pub use quality::{
    mse, psnr, psnr_with, quality_report, ssim, ssim_with, PsnrOptions, QualityReport, SsimWindow, PEAK, SSIM_K1,
    SSIM_K2,
};
pub use resolution::{
    abs_gradient, classify_bands, contrast, contrast_band, extract_profile, fwhm, fwhm_with, grad_max_band,
    grad_mean_band, grad_stats, resolution_report, Band, FwhmMode, Profile, ProfileAxis, ResolutionReport, RoiSpec,
};
