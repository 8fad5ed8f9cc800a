//! Full-reference quality metrics on the 8-bit intensity scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;
use crate::serde_util::f64_inf;

/// Dynamic range used for both PSNR and the SSIM stabilizers.
pub const PEAK: f64 = 255.0;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    #[serde(with = "f64_inf")]
    pub psnr_db: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsnrOptions {
    /// Round the 255-scaled intensities to integers before the MSE.
    pub round_to_u8: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimWindow {
    /// 7×7 uniform window with unbiased (N-1) statistics.
    #[default]
    Uniform7,
    /// 11×11 Gaussian window, σ = 1.5, weighted (biased) statistics.
    Gaussian11,
}

impl SsimWindow {
    pub fn size(self) -> usize {
        match self {
            SsimWindow::Uniform7 => 7,
            SsimWindow::Gaussian11 => 11,
        }
    }
}

fn check_same<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

fn scaled<T: Scalar>(img: &Image<T>, round: bool) -> Vec<f64> {
    img.data()
        .iter()
        .map(|v| {
            let s = v.as_f64() * PEAK;
            if round {
                (s + 0.5).floor()
            } else {
                s
            }
        })
        .collect()
}

/// Mean squared error on the 0..255 scale.
pub fn mse<T: Scalar>(reference: &Image<T>, test: &Image<T>) -> Result<f64> {
    mse_with(reference, test, &PsnrOptions::default())
}

fn mse_with<T: Scalar>(reference: &Image<T>, test: &Image<T>, opts: &PsnrOptions) -> Result<f64> {
    check_same(reference, test)?;
    let a = scaled(reference, opts.round_to_u8);
    let b = scaled(test, opts.round_to_u8);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// `10·log10(255²/MSE)`; `+inf` when the images are identical.
pub fn psnr<T: Scalar>(reference: &Image<T>, test: &Image<T>) -> Result<f64> {
    psnr_with(reference, test, &PsnrOptions::default())
}

pub fn psnr_with<T: Scalar>(reference: &Image<T>, test: &Image<T>, opts: &PsnrOptions) -> Result<f64> {
    let m = mse_with(reference, test, opts)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / m).log10())
}

pub fn ssim<T: Scalar>(reference: &Image<T>, test: &Image<T>) -> Result<f64> {
    ssim_with(reference, test, SsimWindow::default())
}

/// Mean SSIM over every fully interior window position.
pub fn ssim_with<T: Scalar>(reference: &Image<T>, test: &Image<T>, window: SsimWindow) -> Result<f64> {
    check_same(reference, test)?;
    let (h, w) = reference.dims();
    let n = window.size();
    if h < n || w < n {
        return Err(Error::invalid(format!("{h}x{w} image is smaller than the {n}x{n} SSIM window")));
    }
    let x = scaled(reference, false);
    let y = scaled(test, false);
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);

    let weights = match window {
        SsimWindow::Uniform7 => vec![1.0; n],
        SsimWindow::Gaussian11 => {
            let g: Vec<f64> = (0..n)
                .map(|i| {
                    let d = i as f64 - (n / 2) as f64;
                    (-d * d / (2.0 * 1.5 * 1.5)).exp()
                })
                .collect();
            let s: f64 = g.iter().sum();
            g.into_iter().map(|v| v / s).collect()
        }
    };
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let [sx, sy, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|f| window_sums(f, h, w, &weights));

    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut total = 0.0;
    for i in 0..oh * ow {
        let (mx, my, vx, vy, cxy) = match window {
            SsimWindow::Uniform7 => {
                let np = (n * n) as f64;
                let mx = sx[i] / np;
                let my = sy[i] / np;
                (
                    mx,
                    my,
                    (sxx[i] - sx[i] * mx) / (np - 1.0),
                    (syy[i] - sy[i] * my) / (np - 1.0),
                    (sxy[i] - sx[i] * my) / (np - 1.0),
                )
            }
            SsimWindow::Gaussian11 => {
                let (mx, my) = (sx[i], sy[i]);
                (mx, my, sxx[i] - mx * mx, syy[i] - my * my, sxy[i] - mx * my)
            }
        };
        total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / (oh * ow) as f64)
}

/// Separable weighted sums over every valid `n × n` window.
fn window_sums(f: &[f64], h: usize, w: usize, weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    let oh = h - n + 1;
    let ow = w - n + 1;
    let mut cols = vec![0.0; oh * w];
    for r in 0..oh {
        for (k, &wt) in weights.iter().enumerate() {
            let src = &f[(r + k) * w..(r + k + 1) * w];
            for (d, s) in cols[r * w..(r + 1) * w].iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        let row = &cols[r * w..(r + 1) * w];
        for c in 0..ow {
            out[r * ow + c] = weights.iter().zip(&row[c..c + n]).map(|(a, b)| a * b).sum();
        }
    }
    out
}

pub fn quality_report<T: Scalar>(reference: &Image<T>, test: &Image<T>) -> Result<QualityReport> {
    Ok(QualityReport {
        psnr_db: psnr(reference, test)?,
        ssim: ssim(reference, test)?,
    })
}
