//! Paired `(degraded input, clean target)` training data.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degrade::{apply_degradation, draw_training_degradation_with, CompositionConfig, DegradationSpec};
use crate::error::{Error, Result};
use crate::image::{augment_patch, AugmentSpec, DEFAULT_CROP, DEFAULT_RESIZE};
use crate::io::save_image;
use crate::nllr::{nllr_denoise, NllrParams};
use crate::rng::{stream_key, RandomStream};
use crate::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Clean photographs: the target is the augmented patch.
    Natural,
    /// Speckled scans: the target is the NLLR-denoised patch.
    Ultrasound,
}

#[derive(Debug, Clone)]
pub struct SourceImage {
    pub id: String,
    pub kind: SourceKind,
    pub image: GrayImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairConfig {
    pub target_resize: usize,
    pub crop_size: usize,
    pub composition: CompositionConfig,
    pub nllr: NllrParams,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            target_resize: DEFAULT_RESIZE,
            crop_size: DEFAULT_CROP,
            composition: CompositionConfig::default(),
            nllr: NllrParams::default(),
        }
    }
}

/// Everything needed to rebuild one pair from its source image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub source_id: String,
    pub index: usize,
    pub source_kind: SourceKind,
    pub augment: AugmentSpec,
    pub degradation: DegradationSpec,
    /// Present for ultrasound sources.
    pub nllr: Option<NllrParams>,
}

#[derive(Debug, Clone)]
pub struct Pair {
    pub record: PairRecord,
    pub input: GrayImage,
    pub target: GrayImage,
}

pub trait PairSink {
    fn accept(&mut self, pair: Pair) -> Result<()>;
}

impl PairSink for Vec<Pair> {
    fn accept(&mut self, pair: Pair) -> Result<()> {
        self.push(pair);
        Ok(())
    }
}

/// Writes `<id>_<k>_input.png`, `<id>_<k>_target.png` and
/// `<id>_<k>_spec.json` into one directory.
pub struct DirSink {
    dir: PathBuf,
}

impl DirSink {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stem(record: &PairRecord) -> String {
        format!("{}_{}", record.source_id, record.index)
    }
}

impl PairSink for DirSink {
    fn accept(&mut self, pair: Pair) -> Result<()> {
        let stem = Self::stem(&pair.record);
        save_image(&pair.input, self.dir.join(format!("{stem}_input.png")))?;
        save_image(&pair.target, self.dir.join(format!("{stem}_target.png")))?;
        let path = self.dir.join(format!("{stem}_spec.json"));
        let json = serde_json::to_string_pretty(&pair.record)?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub source_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairSummary {
    pub pairs: usize,
    pub failures: Vec<PairFailure>,
}

pub fn pair_stream(base_seed: u64, source_id: &str, index: usize) -> RandomStream {
    RandomStream::new(base_seed, stream_key(&[source_id, "pair", &index.to_string()]))
}

/// Draws the record of pair `index` of `source`.
pub fn draw_record(source: &SourceImage, index: usize, base_seed: u64, cfg: &PairConfig) -> Result<PairRecord> {
    let mut rng = pair_stream(base_seed, &source.id, index);
    let augment = AugmentSpec::draw(&mut rng, cfg.target_resize, cfg.crop_size)?;
    let degradation = draw_training_degradation_with(&mut rng, &cfg.composition);
    Ok(PairRecord {
        source_id: source.id.clone(),
        index,
        source_kind: source.kind,
        augment,
        degradation,
        nllr: (source.kind == SourceKind::Ultrasound).then_some(cfg.nllr),
    })
}

/// Rebuilds `(input, target)` from a record and its source image.
pub fn replay_pair(source: &GrayImage, record: &PairRecord) -> Result<(GrayImage, GrayImage)> {
    let patch = augment_patch(source, &record.augment)?;
    let input = apply_degradation(&patch, &record.degradation)?;
    let target = match record.source_kind {
        SourceKind::Natural => patch,
        SourceKind::Ultrasound => {
            let params = record
                .nllr
                .ok_or_else(|| Error::invalid("ultrasound record lacks nllr parameters"))?;
            nllr_denoise(&patch, &params)?
        }
    };
    Ok((input, target))
}

/// Emits `count_per_image` pairs per source. Sources are processed in
/// parallel and handed to the sink in input order. A failing source is
/// reported in the summary and the remaining sources still run.
pub fn emit_pair_dataset(
    sources: &[SourceImage],
    count_per_image: usize,
    base_seed: u64,
    cfg: &PairConfig,
    sink: &mut dyn PairSink,
) -> Result<PairSummary> {
    if cfg.crop_size == 0 || cfg.crop_size > cfg.target_resize {
        return Err(Error::invalid(format!(
            "crop {} must be in 1..={}",
            cfg.crop_size, cfg.target_resize
        )));
    }
    cfg.nllr.validate()?;
    let built: Vec<Result<Vec<Pair>>> = sources
        .par_iter()
        .map(|src| {
            (0..count_per_image)
                .map(|k| {
                    let record = draw_record(src, k, base_seed, cfg)?;
                    let (input, target) = replay_pair(&src.image, &record)?;
                    Ok(Pair { record, input, target })
                })
                .collect()
        })
        .collect();
    let mut summary = PairSummary::default();
    for (src, result) in sources.iter().zip(built) {
        match result {
            Ok(pairs) => {
                for pair in pairs {
                    sink.accept(pair)?;
                    summary.pairs += 1;
                }
            }
            Err(e) => summary.failures.push(PairFailure {
                source_id: src.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    Ok(summary)
}
