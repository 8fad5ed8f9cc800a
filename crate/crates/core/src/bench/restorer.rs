//! Pluggable restoration methods scored by the ladders.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::LadderKind;
use crate::degrade::{gaussian_kernel, kernel_from_sigma};
use crate::error::{Error, Result};
use crate::io::load_image;
use crate::nllr::{nllr_denoise, NllrParams};
use crate::spectral::wiener_deblur;
use crate::GrayImage;

/// Identifies one ladder row for a restorer.
#[derive(Debug, Clone, Copy)]
pub struct RestoreContext<'a> {
    pub image_id: &'a str,
    pub kind: LadderKind,
    pub level_index: usize,
    pub level: f64,
    pub seed_index: usize,
}

impl RestoreContext<'_> {
    /// `<image_id>_<kind>_<level index>_<seed index>`, the file stem used for
    /// exported corrupted inputs and expected from external restorers.
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{}_{}_{}",
            self.image_id,
            self.kind.as_str(),
            self.level_index,
            self.seed_index
        )
    }
}

pub trait Restorer: Sync {
    fn restore(&self, ctx: &RestoreContext<'_>, corrupted: &GrayImage) -> Result<GrayImage>;
}

pub struct IdentityRestorer;

impl Restorer for IdentityRestorer {
    fn restore(&self, _: &RestoreContext<'_>, corrupted: &GrayImage) -> Result<GrayImage> {
        Ok(corrupted.clone())
    }
}

pub struct NllrRestorer(pub NllrParams);

impl Restorer for NllrRestorer {
    fn restore(&self, _: &RestoreContext<'_>, corrupted: &GrayImage) -> Result<GrayImage> {
        nllr_denoise(corrupted, &self.0)
    }
}

/// Non-blind Wiener baseline: on blur ladders it inverts the level's own
/// kernel, on noise ladders the mild `k = 3` PSF.
pub struct WienerRestorer {
    pub nsr: f64,
}

impl Restorer for WienerRestorer {
    fn restore(&self, ctx: &RestoreContext<'_>, corrupted: &GrayImage) -> Result<GrayImage> {
        let kernel = match ctx.kind {
            LadderKind::Blur if ctx.level > 0.0 => kernel_from_sigma(ctx.level)?,
            LadderKind::Blur => gaussian_kernel(1)?,
            LadderKind::Gaussian | LadderKind::Speckle => gaussian_kernel(3)?,
        };
        wiener_deblur(corrupted, &kernel, self.nsr)
    }
}

/// Reads precomputed outputs `<dir>/<file_stem>.png` (or `.pgm`).
pub struct ExternalDirRestorer {
    pub dir: PathBuf,
}

impl Restorer for ExternalDirRestorer {
    fn restore(&self, ctx: &RestoreContext<'_>, corrupted: &GrayImage) -> Result<GrayImage> {
        let stem = ctx.file_stem();
        let path = ["png", "pgm"]
            .iter()
            .map(|ext| self.dir.join(format!("{stem}.{ext}")))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::invalid(format!("missing external output {stem}.png in {}", self.dir.display())))?;
        let out = load_image(&path)?;
        if out.dims() != corrupted.dims() {
            return Err(Error::invalid(format!(
                "{}: dimensions {:?} differ from input {:?}",
                path.display(),
                out.dims(),
                corrupted.dims()
            )));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RestorerSpec {
    Identity,
    Nllr {
        #[serde(default)]
        params: NllrParams,
    },
    Wiener {
        #[serde(default = "default_nsr")]
        nsr: f64,
    },
    ExternalDirectory {
        path: PathBuf,
    },
}

pub const DEFAULT_WIENER_NSR: f64 = 0.01;

fn default_nsr() -> f64 {
    DEFAULT_WIENER_NSR
}

impl RestorerSpec {
    pub fn build(&self) -> Result<Box<dyn Restorer>> {
        Ok(match self {
            RestorerSpec::Identity => Box::new(IdentityRestorer),
            RestorerSpec::Nllr { params } => {
                params.validate()?;
                Box::new(NllrRestorer(*params))
            }
            RestorerSpec::Wiener { nsr } => {
                if !(*nsr > 0.0) {
                    return Err(Error::invalid(format!("wiener nsr {nsr} must be positive")));
                }
                Box::new(WienerRestorer { nsr: *nsr })
            }
            RestorerSpec::ExternalDirectory { path } => Box::new(ExternalDirRestorer { dir: path.clone() }),
        })
    }
}
