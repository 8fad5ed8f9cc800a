//! Subcommand arguments and implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use usdegrade::bench::{
    corrupted_input, emit_pair_dataset, run_ladder, sidecar, write_csv, DirSink, LadderKind, LadderSpec, PairConfig,
    RestoreContext, RestorerSpec, SourceImage, SourceKind,
};
use usdegrade::degrade::{
    add_gaussian_noise, apply_degradation, blur, draw_training_degradation, gaussian_kernel, kernel_from_sigma,
    speckle,
};
use usdegrade::image::{augment_patch, AugmentSpec};
use usdegrade::io::{load_dir, load_image, save_image};
use usdegrade::metrics::{extract_profile, quality_report, resolution_report, ProfileAxis, RoiSpec};
use usdegrade::nllr::{nllr_denoise, NllrParams};
use usdegrade::spectral::fourier_perturb;
use usdegrade::RandomStream;

use crate::config::{echo, sibling, write_json};
use crate::CliError;

pub struct Run<'a> {
    pub name: &'a str,
    pub threads: &'a str,
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradeArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gaussian PSF of odd size K, sigma = (K-1)/6.
    #[arg(long, conflicts_with = "blur_sigma")]
    pub blur_k: Option<usize>,
    /// Gaussian PSF of the given sigma in pixels.
    #[arg(long)]
    pub blur_sigma: Option<f64>,
    #[arg(long)]
    pub gauss_sigma: Option<f64>,
    #[arg(long)]
    pub fourier_gamma: Option<f64>,
    #[arg(long = "speckle-L")]
    pub speckle_l: Option<f64>,
    /// Draw a training composition from the seed instead of fixed operators.
    #[arg(long)]
    #[serde(default)]
    pub train_draw: bool,
}

/// Spec sidecar of a fixed-operator `degrade` run. Operators apply in field
/// order: blur, Fourier perturbation, Gaussian noise, speckle.
#[derive(Debug, Serialize)]
struct StressRecord {
    mode: &'static str,
    #[serde(with = "usdegrade::serde_util::u64_string")]
    seed: u64,
    blur_k: Option<usize>,
    blur_sigma: Option<f64>,
    fourier_gamma: Option<f64>,
    gauss_sigma: Option<f64>,
    speckle_l: Option<f64>,
}

pub fn degrade(run: &Run, a: DegradeArgs) -> Result<ExitCode, CliError> {
    let input = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    if a.blur_k.is_some() && a.blur_sigma.is_some() {
        return Err(CliError::Usage("--blur-k and --blur-sigma are exclusive".into()));
    }
    let img = load_image(input)?;
    let mut rng = RandomStream::new(a.seed, 0);
    let spec_json;
    let result = if a.train_draw {
        let spec = draw_training_degradation(&mut rng);
        spec_json = serde_json::to_value(spec).expect("serializable");
        apply_degradation(&img, &spec)?
    } else {
        let mut x = img;
        if let Some(k) = a.blur_k {
            x = blur(&x, &gaussian_kernel(k)?);
        }
        if let Some(s) = a.blur_sigma {
            x = blur(&x, &kernel_from_sigma(s)?);
        }
        if let Some(g) = a.fourier_gamma {
            x = fourier_perturb(&x, g, &mut rng)?;
        }
        if let Some(s) = a.gauss_sigma {
            x = add_gaussian_noise(&x, s, &mut rng)?;
        }
        if let Some(l) = a.speckle_l {
            x = speckle(&x, l, &mut rng)?;
        }
        spec_json = serde_json::to_value(StressRecord {
            mode: "fixed",
            seed: a.seed,
            blur_k: a.blur_k,
            blur_sigma: a.blur_sigma,
            fourier_gamma: a.fourier_gamma,
            gauss_sigma: a.gauss_sigma,
            speckle_l: a.speckle_l,
        })
        .expect("serializable");
        x
    };
    ensure_parent(out)?;
    save_image(&result, out)?;
    write_json(&sibling(out, "spec.json"), &spec_json)?;
    echo(run.name, run.threads, &a, &sibling(out, "config.json"))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = usdegrade::image::DEFAULT_RESIZE)]
    pub resize: usize,
    #[arg(long, default_value_t = usdegrade::image::DEFAULT_CROP)]
    pub crop: usize,
}

pub fn augment(run: &Run, a: AugmentArgs) -> Result<ExitCode, CliError> {
    let input = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    let img = load_image(input)?;
    let spec = AugmentSpec::draw(&mut RandomStream::new(a.seed, 0), a.resize, a.crop)?;
    let patch = augment_patch(&img, &spec)?;
    ensure_parent(out)?;
    save_image(&patch, out)?;
    write_json(&sibling(out, "spec.json"), &spec)?;
    echo(run.name, run.threads, &a, &sibling(out, "config.json"))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NllrArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub patch: usize,
    #[arg(long, default_value_t = 4)]
    pub stride: usize,
    #[arg(long, default_value_t = 15)]
    pub search: usize,
    #[arg(long, default_value_t = 32)]
    pub group: usize,
    #[arg(long, default_value_t = 1.2)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.1)]
    pub relax: f64,
}

impl NllrArgs {
    fn params(&self) -> NllrParams {
        NllrParams {
            patch_size: self.patch,
            stride: self.stride,
            search_radius: self.search,
            group_size: self.group,
            shrink_lambda: self.lambda,
            iterations: self.iters,
            relax_delta: self.relax,
        }
    }
}

pub fn nllr(run: &Run, a: NllrArgs) -> Result<ExitCode, CliError> {
    let input = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    let params = a.params();
    params.validate()?;
    let img = load_image(input)?;
    let result = nllr_denoise(&img, &params)?;
    ensure_parent(out)?;
    save_image(&result, out)?;
    echo(run.name, run.threads, &a, &sibling(out, "config.json"))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsArgs {
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    #[serde(default)]
    pub json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn metrics(run: &Run, a: MetricsArgs) -> Result<ExitCode, CliError> {
    let (reference, test) = (required(&a.reference, "ref")?, required(&a.test, "test")?);
    let (reference, test) = (load_image(reference)?, load_image(test)?);
    let report = quality_report(&reference, &test)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("psnr_db\t{}", report.psnr_db);
        println!("ssim\t{}", report.ssim);
    }
    if let Some(out) = &a.out {
        ensure_parent(out)?;
        write_json(out, &report)?;
        echo(run.name, run.threads, &a, &sibling(out, "config.json"))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Half-open ROI `r0:r1,c0:c1`.
    #[arg(long)]
    pub roi: Option<String>,
    #[arg(long, value_enum, default_value_t = Axis::Rows)]
    pub axis: Axis,
    #[arg(long)]
    #[serde(default)]
    pub json: bool,
    /// Directory for `profile.csv`, `resolution.json` and `config.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_roi(s: &str, axis: Axis) -> Result<RoiSpec, CliError> {
    let bad = || CliError::Usage(format!("--roi {s:?}: expected r0:r1,c0:c1"));
    let range = |part: &str| -> Result<(usize, usize), CliError> {
        let (a, b) = part.split_once(':').ok_or_else(bad)?;
        Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
    };
    let (rows, cols) = s.split_once(',').ok_or_else(bad)?;
    Ok(RoiSpec {
        row_range: range(rows)?,
        col_range: range(cols)?,
        profile_axis: match axis {
            Axis::Rows => ProfileAxis::AlongRows,
            Axis::Cols => ProfileAxis::AlongCols,
        },
    })
}

#[derive(Serialize)]
struct ProfileOutput {
    roi: RoiSpec,
    profile: Vec<f64>,
    #[serde(flatten)]
    report: usdegrade::metrics::ResolutionReport,
}

pub fn profile(run: &Run, a: ProfileArgs) -> Result<ExitCode, CliError> {
    let input = required(&a.input, "in")?;
    let roi = parse_roi(required(&a.roi, "roi")?, a.axis)?;
    let img = load_image(input)?;
    let profile = extract_profile(&img, &roi)?;
    let report = resolution_report(&profile);
    let output = ProfileOutput {
        roi,
        profile: profile.samples().to_vec(),
        report,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
    } else {
        let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| v.to_string());
        println!("fwhm_px\t{}", show(report.fwhm_px));
        println!("grad_mean\t{}", report.grad_mean);
        println!("grad_max\t{}", report.grad_max);
        println!("contrast\t{}", show(report.contrast));
    }
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let mut csv = String::from("index,value\n");
        for (i, v) in profile.samples().iter().enumerate() {
            csv.push_str(&format!("{i},{v}\n"));
        }
        let path = dir.join("profile.csv");
        fs::write(&path, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        write_json(&dir.join("resolution.json"), &output)?;
        echo(run.name, run.threads, &a, &dir.join("config.json"))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderArgs {
    /// Directory of `.png`/`.pgm` images; file stems become image ids.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<LadderKind>,
    /// identity | nllr | wiener | dir:PATH
    #[arg(long, default_value = "identity")]
    pub restorer: String,
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Base seed of the per-row streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated levels replacing the default ladder.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Noise-to-signal ratio of the Wiener restorer.
    #[arg(long, default_value_t = usdegrade::bench::DEFAULT_WIENER_NSR)]
    pub nsr: f64,
    /// Also write every corrupted input to `<out>/inputs/`.
    #[arg(long)]
    #[serde(default)]
    pub save_inputs: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_restorer(s: &str, nsr: f64) -> Result<RestorerSpec, CliError> {
    Ok(match s {
        "identity" => RestorerSpec::Identity,
        "nllr" => RestorerSpec::Nllr {
            params: NllrParams::default(),
        },
        "wiener" => RestorerSpec::Wiener { nsr },
        other => match other.strip_prefix("dir:") {
            Some(path) if !path.is_empty() => RestorerSpec::ExternalDirectory { path: path.into() },
            _ => {
                return Err(CliError::Usage(format!(
                    "--restorer {other:?}: expected identity, nllr, wiener or dir:PATH"
                )))
            }
        },
    })
}

pub fn ladder(run: &Run, a: LadderArgs) -> Result<ExitCode, CliError> {
    let dataset = required(&a.dataset, "dataset")?;
    let kind = *required(&a.kind, "kind")?;
    let out = required(&a.out, "out")?;
    let spec = LadderSpec {
        kind,
        levels: a.levels.clone().unwrap_or_else(|| LadderSpec::default_levels(kind)),
        seeds_per_image: a.seeds,
        restorer: parse_restorer(&a.restorer, a.nsr)?,
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let images = load_dir(dataset)?;
    if images.is_empty() {
        return Err(CliError::Usage(format!("{}: no .png or .pgm images", dataset.display())));
    }
    create_dir(out)?;
    if a.save_inputs {
        let dir = out.join("inputs");
        create_dir(&dir)?;
        for (id, img) in &images {
            for (li, &level) in spec.levels.iter().enumerate() {
                for si in 0..spec.seeds_per_image {
                    let x = corrupted_input(img, id, &spec, a.seed, li, si)?;
                    let ctx = RestoreContext {
                        image_id: id,
                        kind,
                        level_index: li,
                        level,
                        seed_index: si,
                    };
                    save_image(&x, dir.join(format!("{}.png", ctx.file_stem())))?;
                }
            }
        }
    }
    let report = run_ladder(&images, &spec, a.seed)?;
    let csv_path = out.join("report.csv");
    let file = fs::File::create(&csv_path).map_err(|e| CliError::Runtime(format!("{}: {e}", csv_path.display())))?;
    write_csv(&report, std::io::BufWriter::new(file))?;
    let summary = sidecar(&report);
    write_json(&out.join("report.json"), &summary)?;
    echo(run.name, run.threads, &a, &out.join("config.json"))?;
    eprintln!(
        "{} ladder: {} images, {} rows, {} errors",
        kind.as_str(),
        summary.images,
        summary.rows,
        summary.errors
    );
    Ok(if summary.errors == summary.rows {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Natural,
    Ultrasound,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<PairKind>,
    #[arg(long, default_value_t = 1)]
    pub per_image: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = usdegrade::image::DEFAULT_RESIZE)]
    pub resize: usize,
    #[arg(long, default_value_t = usdegrade::image::DEFAULT_CROP)]
    pub crop: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn pairs(run: &Run, a: PairsArgs) -> Result<ExitCode, CliError> {
    let dataset = required(&a.dataset, "dataset")?;
    let kind = match required(&a.kind, "kind")? {
        PairKind::Natural => SourceKind::Natural,
        PairKind::Ultrasound => SourceKind::Ultrasound,
    };
    let out = required(&a.out, "out")?;
    let sources: Vec<SourceImage> = load_dir(dataset)?
        .into_iter()
        .map(|(id, image)| SourceImage { id, kind, image })
        .collect();
    if sources.is_empty() {
        return Err(CliError::Usage(format!("{}: no .png or .pgm images", dataset.display())));
    }
    let cfg = PairConfig {
        target_resize: a.resize,
        crop_size: a.crop,
        ..PairConfig::default()
    };
    let mut sink = DirSink::new(out)?;
    let summary = emit_pair_dataset(&sources, a.per_image, a.seed, &cfg, &mut sink)?;
    write_json(&out.join("summary.json"), &summary)?;
    echo(run.name, run.threads, &a, &out.join("config.json"))?;
    for f in &summary.failures {
        eprintln!("{}: {}", f.source_id, f.message);
    }
    eprintln!("{} pairs from {} images", summary.pairs, sources.len());
    Ok(if summary.pairs == 0 && !summary.failures.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}
