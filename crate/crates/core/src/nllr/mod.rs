//! Non-local low-rank (NLLR) denoising for clean-like training targets.
//!
//! Each reference patch on a strided grid is grouped with its most similar
//! neighbours; the group matrix is centered per patch, its singular values
//! are soft-thresholded, and the shrunk patches are averaged back into the
//! image with weight `1/(1 + rank)`.

mod matching;
mod svd;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

pub use matching::{block_match, PatchGroup};

/// Consistency constant mapping the median absolute deviation of a Gaussian
/// to its standard deviation.
const MAD_TO_SIGMA: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NllrParams {
    pub patch_size: usize,
    pub stride: usize,
    pub search_radius: usize,
    pub group_size: usize,
    pub shrink_lambda: f64,
    pub iterations: usize,
    pub relax_delta: f64,
}

impl Default for NllrParams {
    fn default() -> Self {
        Self {
            patch_size: 8,
            stride: 4,
            search_radius: 15,
            group_size: 32,
            shrink_lambda: 1.2,
            iterations: 1,
            relax_delta: 0.1,
        }
    }
}

impl NllrParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.patch_size < 2 {
            return fail(format!("patch_size {} must be >= 2", self.patch_size));
        }
        if self.stride == 0 || self.stride > self.patch_size {
            return fail(format!("stride {} must be in 1..={}", self.stride, self.patch_size));
        }
        if self.group_size < 2 {
            return fail(format!("group_size {} must be >= 2", self.group_size));
        }
        let window = (2 * self.search_radius + 1).pow(2);
        if window < self.group_size {
            return fail(format!(
                "search window of {window} patches cannot fill a group of {}",
                self.group_size
            ));
        }
        if !(self.shrink_lambda > 0.0) || !self.shrink_lambda.is_finite() {
            return fail(format!("shrink_lambda {} must be positive", self.shrink_lambda));
        }
        if self.iterations == 0 {
            return fail("iterations must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.relax_delta) {
            return fail(format!("relax_delta {} outside [0, 1)", self.relax_delta));
        }
        Ok(())
    }

    /// Singular-value threshold `λ·σ·sqrt(max(p², K))`.
    pub fn threshold(&self, sigma: f64) -> f64 {
        let d = (self.patch_size * self.patch_size).max(self.group_size) as f64;
        self.shrink_lambda * sigma * d.sqrt()
    }
}

/// Robust noise level: `median(|d|)/0.6745` over the 2×2 Haar diagonal
/// responses `d = (a - b - c + e)/2` at every valid position.
pub fn estimate_noise_sigma<T: Scalar>(img: &Image<T>) -> Result<f64> {
    let (h, w) = img.dims();
    if h < 2 || w < 2 {
        return Err(Error::invalid(format!("noise estimate needs >= 2x2, got {h}x{w}")));
    }
    let mut d = Vec::with_capacity((h - 1) * (w - 1));
    for r in 0..h - 1 {
        let top = img.row(r);
        let bottom = img.row(r + 1);
        for c in 0..w - 1 {
            let v = 0.5 * (top[c].as_f64() - top[c + 1].as_f64() - bottom[c].as_f64() + bottom[c + 1].as_f64());
            d.push(v.abs());
        }
    }
    Ok(median(&mut d) / MAD_TO_SIGMA)
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Removes each patch's mean, soft-thresholds the singular values of the
/// centered matrix, and restores the means.
pub fn shrink_group<T: Scalar>(mut group: PatchGroup<T>, sigma: f64, params: &NllrParams) -> Result<PatchGroup<T>> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("sigma {sigma} must be >= 0")));
    }
    let d = group.patch_size * group.patch_size;
    let k = group.members.len();
    let means: Vec<T> = group
        .matrix
        .chunks(d)
        .map(|col| col.iter().cloned().sum::<T>() / T::of(d as f64))
        .collect();
    for (col, &m) in group.matrix.chunks_mut(d).zip(&means) {
        col.iter_mut().for_each(|x| *x -= m);
    }
    let rank = svd::soft_threshold(&mut group.matrix, d, k, T::of(params.threshold(sigma)));
    for (col, &m) in group.matrix.chunks_mut(d).zip(&means) {
        col.iter_mut().for_each(|x| *x += m);
    }
    group.rank = Some(rank);
    Ok(group)
}

/// Top-left patch positions along one axis: every `stride`, plus the last
/// valid position so the image is fully covered.
pub fn reference_positions(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    let last = len - patch;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if *v.last().expect("len >= patch") != last {
        v.push(last);
    }
    v
}

pub fn nllr_denoise<T: Scalar>(img: &Image<T>, params: &NllrParams) -> Result<Image<T>> {
    params.validate()?;
    let (h, w) = img.dims();
    let p = params.patch_size;
    if h < p || w < p {
        return Err(Error::invalid(format!("{h}x{w} image is smaller than the {p}x{p} patch")));
    }
    let refs: Vec<(usize, usize)> = {
        let rows = reference_positions(h, p, params.stride);
        let cols = reference_positions(w, p, params.stride);
        rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect()
    };

    let keep = T::of(1.0 - params.relax_delta);
    let mix = T::of(params.relax_delta);
    let mut current = img.clone();
    for it in 0..params.iterations {
        let input = if it == 0 {
            img.clone()
        } else {
            let data = current
                .data()
                .iter()
                .zip(img.data())
                .map(|(&x, &o)| (keep * x + mix * o).clamp_unit())
                .collect();
            Image::from_raw(h, w, data)
        };
        let sigma = estimate_noise_sigma(&input)?;

        let groups = refs
            .par_iter()
            .map(|&r| shrink_group(block_match(&input, r, params)?, sigma, params))
            .collect::<Result<Vec<_>>>()?;

        // sequential accumulation keeps the sums independent of scheduling
        let mut num = vec![T::zero(); h * w];
        let mut den = vec![T::zero(); h * w];
        for g in &groups {
            let weight = T::one() / T::of(1.0 + g.rank.unwrap_or(0) as f64);
            for (j, &(r, c)) in g.members.iter().enumerate() {
                let col = g.column(j);
                for i in 0..p {
                    let base = (r + i) * w + c;
                    for (k, &v) in col[i * p..(i + 1) * p].iter().enumerate() {
                        num[base + k] += weight * v;
                        den[base + k] += weight;
                    }
                }
            }
        }
        let data = num
            .iter()
            .zip(&den)
            .map(|(&n, &d)| (n / d).clamp_unit())
            .collect();
        current = Image::from_raw(h, w, data);
    }
    Ok(current)
}
