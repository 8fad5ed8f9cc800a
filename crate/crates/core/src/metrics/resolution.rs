//! Profile-based resolution metrics: FWHM, gradient statistics, contrast and
//! their rule-of-thumb bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// 1D intensity profile, unit sample spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    samples: Vec<f64>,
}

impl Profile {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!("profile needs >= 2 samples, got {}", samples.len())));
        }
        if let Some(v) = samples.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("profile value {v} outside [0, 1]")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileAxis {
    /// One sample per row, averaged across the ROI columns.
    AlongRows,
    /// One sample per column, averaged across the ROI rows.
    AlongCols,
}

/// Half-open pixel rectangle `[r0, r1) × [c0, c1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub row_range: (usize, usize),
    pub col_range: (usize, usize),
    pub profile_axis: ProfileAxis,
}

impl RoiSpec {
    fn validate(&self, h: usize, w: usize) -> Result<()> {
        let (r0, r1) = self.row_range;
        let (c0, c1) = self.col_range;
        if r0 >= r1 || c0 >= c1 || r1 > h || c1 > w {
            return Err(Error::invalid(format!(
                "ROI rows {r0}..{r1}, cols {c0}..{c1} invalid for {h}x{w} image"
            )));
        }
        Ok(())
    }
}

/// Averages the ROI across the axis orthogonal to the profile.
pub fn extract_profile<T: Scalar>(img: &Image<T>, roi: &RoiSpec) -> Result<Profile> {
    roi.validate(img.height(), img.width())?;
    let (r0, r1) = roi.row_range;
    let (c0, c1) = roi.col_range;
    let samples: Vec<f64> = match roi.profile_axis {
        ProfileAxis::AlongRows => (r0..r1)
            .map(|r| img.row(r)[c0..c1].iter().map(|v| v.as_f64()).sum::<f64>() / (c1 - c0) as f64)
            .collect(),
        ProfileAxis::AlongCols => (c0..c1)
            .map(|c| (r0..r1).map(|r| img.get(r, c).as_f64()).sum::<f64>() / (r1 - r0) as f64)
            .collect(),
    };
    Profile::new(samples.into_iter().map(|v: f64| v.clamp(0.0, 1.0)).collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FwhmMode {
    /// Outermost half-maximum crossings, linearly interpolated.
    #[default]
    Interpolated,
    /// Number of samples at or above half maximum.
    SampleCount,
}

/// Full width at half maximum, half level = max/2 over a zero baseline.
///
/// `None` when the profile does not fall below the half level on both sides
/// of its above-half region (e.g. a monotone ramp) or is all zero.
pub fn fwhm(profile: &Profile) -> Option<f64> {
    fwhm_with(profile, FwhmMode::Interpolated)
}

pub fn fwhm_with(profile: &Profile, mode: FwhmMode) -> Option<f64> {
    let p = &profile.samples;
    let peak = p.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let first = p.iter().position(|&v| v >= half)?;
    let last = p.iter().rposition(|&v| v >= half)?;
    if first == 0 || last == p.len() - 1 {
        return None;
    }
    match mode {
        FwhmMode::SampleCount => Some(p.iter().filter(|&&v| v >= half).count() as f64),
        FwhmMode::Interpolated => {
            let x1 = (first - 1) as f64 + (half - p[first - 1]) / (p[first] - p[first - 1]);
            let x2 = last as f64 + (p[last] - half) / (p[last] - p[last + 1]);
            Some(x2 - x1)
        }
    }
}

/// Absolute gradient by central differences, one-sided at the endpoints.
pub fn abs_gradient(profile: &Profile) -> Vec<f64> {
    let p = &profile.samples;
    let n = p.len();
    (0..n)
        .map(|i| {
            let d = if i == 0 {
                p[1] - p[0]
            } else if i == n - 1 {
                p[n - 1] - p[n - 2]
            } else {
                (p[i + 1] - p[i - 1]) / 2.0
            };
            d.abs()
        })
        .collect()
}

/// `(GradMean, GradMax)`.
pub fn grad_stats(profile: &Profile) -> (f64, f64) {
    let g = abs_gradient(profile);
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let max = g.iter().cloned().fold(0.0, f64::max);
    (mean, max)
}

/// `(Imax - Imin)/(Imax + Imin)`; `None` for an all-zero profile.
pub fn contrast(profile: &Profile) -> Option<f64> {
    let p = &profile.samples;
    let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return None;
    }
    Some((max - min) / (max + min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Ideal,
    Good,
    Fair,
    Poor,
}

/// Lower bounds of the ideal/good bands and the upper bound of poor; the gap
/// between poor and good is "fair".
struct Bands {
    ideal: f64,
    good: f64,
    poor: f64,
}

const GRAD_MEAN_BANDS: Bands = Bands { ideal: 0.05, good: 0.03, poor: 0.02 };
const GRAD_MAX_BANDS: Bands = Bands { ideal: 0.30, good: 0.18, poor: 0.12 };
const CONTRAST_BANDS: Bands = Bands { ideal: 0.95, good: 0.90, poor: 0.80 };

impl Bands {
    fn classify(&self, v: f64) -> Band {
        if v >= self.ideal {
            Band::Ideal
        } else if v >= self.good {
            Band::Good
        } else if v > self.poor {
            Band::Fair
        } else {
            Band::Poor
        }
    }
}

pub fn grad_mean_band(v: f64) -> Band {
    GRAD_MEAN_BANDS.classify(v)
}

pub fn grad_max_band(v: f64) -> Band {
    GRAD_MAX_BANDS.classify(v)
}

pub fn contrast_band(v: f64) -> Band {
    CONTRAST_BANDS.classify(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub fwhm_px: Option<f64>,
    pub grad_mean: f64,
    pub grad_max: f64,
    pub contrast: Option<f64>,
    pub band_grad_mean: Option<Band>,
    pub band_grad_max: Option<Band>,
    pub band_contrast: Option<Band>,
}

/// Fills in the three band labels from the metric values.
pub fn classify_bands(report: ResolutionReport) -> ResolutionReport {
    ResolutionReport {
        band_grad_mean: Some(grad_mean_band(report.grad_mean)),
        band_grad_max: Some(grad_max_band(report.grad_max)),
        band_contrast: report.contrast.map(contrast_band),
        ..report
    }
}

pub fn resolution_report(profile: &Profile) -> ResolutionReport {
    let (grad_mean, grad_max) = grad_stats(profile);
    classify_bands(ResolutionReport {
        fwhm_px: fwhm(profile),
        grad_mean,
        grad_max,
        contrast: contrast(profile),
        band_grad_mean: None,
        band_grad_max: None,
        band_contrast: None,
    })
}
