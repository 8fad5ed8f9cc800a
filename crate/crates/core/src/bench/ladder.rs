//! Severity ladders: corrupt, restore and score every
//! `(image, level, seed)` triple.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::restorer::{RestoreContext, Restorer, RestorerSpec};
use crate::degrade::{add_gaussian_noise, blur, kernel_from_sigma, speckle};
use crate::error::{Error, Result};
use crate::metrics::{psnr, ssim};
use crate::rng::{stream_key, RandomStream};
use crate::serde_util::opt_f64_inf;
use crate::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    /// Additive Gaussian noise, level = σ_g.
    Gaussian,
    /// Gamma speckle, level = looks L.
    Speckle,
    /// Gaussian PSF blur, level = σ in pixels (0 = none).
    Blur,
}

impl LadderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LadderKind::Gaussian => "gaussian",
            LadderKind::Speckle => "speckle",
            LadderKind::Blur => "blur",
        }
    }
}

impl std::str::FromStr for LadderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(LadderKind::Gaussian),
            "speckle" => Ok(LadderKind::Speckle),
            "blur" => Ok(LadderKind::Blur),
            other => Err(Error::invalid(format!("unknown ladder kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub kind: LadderKind,
    pub levels: Vec<f64>,
    pub seeds_per_image: usize,
    pub restorer: RestorerSpec,
}

impl LadderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::invalid("ladder has no levels"));
        }
        if self.seeds_per_image == 0 {
            return Err(Error::invalid("seeds_per_image must be >= 1"));
        }
        let min = match self.kind {
            LadderKind::Gaussian | LadderKind::Blur => 0.0,
            LadderKind::Speckle => 1.0,
        };
        if let Some(v) = self.levels.iter().find(|v| !(**v >= min) || !v.is_finite()) {
            return Err(Error::invalid(format!("{} level {v} must be >= {min}", self.kind.as_str())));
        }
        Ok(())
    }

    pub fn default_levels(kind: LadderKind) -> Vec<f64> {
        match kind {
            LadderKind::Gaussian => (0..=10).map(|i| f64::from(i) / 100.0).collect(),
            LadderKind::Speckle => vec![1.0, 3.0, 5.0, 7.0, 10.0, 12.0, 15.0, 17.0, 20.0, 22.0, 25.0],
            LadderKind::Blur => vec![0.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0],
        }
    }
}

/// The three standard ladders with one seed per image and the identity
/// restorer.
pub fn default_ladders() -> BTreeMap<LadderKind, LadderSpec> {
    [LadderKind::Gaussian, LadderKind::Speckle, LadderKind::Blur]
        .into_iter()
        .map(|kind| {
            (
                kind,
                LadderSpec {
                    kind,
                    levels: LadderSpec::default_levels(kind),
                    seeds_per_image: 1,
                    restorer: RestorerSpec::Identity,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub image_id: String,
    pub kind: LadderKind,
    pub level: f64,
    /// Seed index within the level.
    pub seed: usize,
    #[serde(with = "opt_f64_inf")]
    pub psnr_in: Option<f64>,
    pub ssim_in: Option<f64>,
    #[serde(with = "opt_f64_inf")]
    pub psnr_out: Option<f64>,
    pub ssim_out: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub spec: LadderSpec,
    #[serde(with = "crate::serde_util::u64_string")]
    pub base_seed: u64,
    pub rows: Vec<LadderRow>,
}

/// Random stream of one ladder row, reproducible in isolation.
pub fn row_stream(base_seed: u64, image_id: &str, level_index: usize, seed_index: usize) -> RandomStream {
    let li = level_index.to_string();
    let si = seed_index.to_string();
    RandomStream::new(base_seed, stream_key(&[image_id, &li, &si]))
}

/// Applies one ladder level. Zero-valued Gaussian and blur levels are the
/// identity.
pub fn corrupt(img: &GrayImage, kind: LadderKind, level: f64, rng: &mut RandomStream) -> Result<GrayImage> {
    match kind {
        LadderKind::Gaussian => add_gaussian_noise(img, level, rng),
        LadderKind::Speckle => speckle(img, level, rng),
        LadderKind::Blur if level == 0.0 => Ok(img.clone()),
        LadderKind::Blur => Ok(blur(img, &kernel_from_sigma(level)?)),
    }
}

/// The corrupted input of one row, as the ladder itself produces it.
pub fn corrupted_input(
    img: &GrayImage,
    image_id: &str,
    spec: &LadderSpec,
    base_seed: u64,
    level_index: usize,
    seed_index: usize,
) -> Result<GrayImage> {
    let mut rng = row_stream(base_seed, image_id, level_index, seed_index);
    corrupt(img, spec.kind, spec.levels[level_index], &mut rng)
}

pub fn run_ladder(images: &[(String, GrayImage)], spec: &LadderSpec, base_seed: u64) -> Result<LadderReport> {
    spec.validate()?;
    let restorer = spec.restorer.build()?;
    run_ladder_with(images, spec, base_seed, restorer.as_ref())
}

/// Runs the ladder with a caller-supplied restorer. Rows are computed in
/// parallel on the current rayon pool and assembled in
/// `(image, level, seed)` order.
pub fn run_ladder_with(
    images: &[(String, GrayImage)],
    spec: &LadderSpec,
    base_seed: u64,
    restorer: &dyn Restorer,
) -> Result<LadderReport> {
    spec.validate()?;
    if images.is_empty() {
        return Err(Error::invalid("ladder needs at least one image"));
    }
    let nl = spec.levels.len();
    let ns = spec.seeds_per_image;
    let rows = (0..images.len() * nl * ns)
        .into_par_iter()
        .map(|i| {
            let (image_index, rest) = (i / (nl * ns), i % (nl * ns));
            let (level_index, seed_index) = (rest / ns, rest % ns);
            let (id, img) = &images[image_index];
            let ctx = RestoreContext {
                image_id: id,
                kind: spec.kind,
                level_index,
                level: spec.levels[level_index],
                seed_index,
            };
            score_row(img, spec, base_seed, &ctx, restorer)
        })
        .collect();
    Ok(LadderReport {
        spec: spec.clone(),
        base_seed,
        rows,
    })
}

fn score_row(
    img: &GrayImage,
    spec: &LadderSpec,
    base_seed: u64,
    ctx: &RestoreContext<'_>,
    restorer: &dyn Restorer,
) -> LadderRow {
    let mut row = LadderRow {
        image_id: ctx.image_id.to_string(),
        kind: ctx.kind,
        level: ctx.level,
        seed: ctx.seed_index,
        psnr_in: None,
        ssim_in: None,
        psnr_out: None,
        ssim_out: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let corrupted = corrupted_input(img, ctx.image_id, spec, base_seed, ctx.level_index, ctx.seed_index)?;
        row.psnr_in = Some(psnr(img, &corrupted)?);
        row.ssim_in = Some(ssim(img, &corrupted)?);
        let restored = restorer.restore(ctx, &corrupted)?;
        row.psnr_out = Some(psnr(img, &restored)?);
        row.ssim_out = Some(ssim(img, &restored)?);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}
