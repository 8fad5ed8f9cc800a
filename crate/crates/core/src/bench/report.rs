//! Per-level aggregation and the CSV / JSON ladder outputs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ladder::{LadderReport, LadderRow, LadderSpec};
use crate::error::Result;
use crate::serde_util::opt_f64_inf;

pub const CSV_HEADER: [&str; 9] = [
    "image_id", "kind", "level", "seed", "psnr_in", "ssim_in", "psnr_out", "ssim_out", "error",
];

/// Mean and sample standard deviation of one metric at one level.
///
/// Infinite PSNR values (bit-identical images) are left out of `mean`/`std`
/// and counted in `excluded_inf`. If every value is infinite the mean is
/// `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    #[serde(with = "opt_f64_inf")]
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub count: usize,
    pub excluded_inf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level_index: usize,
    pub level: f64,
    pub rows: usize,
    pub errors: usize,
    pub psnr_in: MetricSummary,
    pub ssim_in: MetricSummary,
    pub psnr_out: MetricSummary,
    pub ssim_out: MetricSummary,
}

pub fn summarize(values: impl IntoIterator<Item = f64>) -> MetricSummary {
    let mut finite = Vec::new();
    let mut excluded_inf = 0;
    for v in values {
        if v.is_finite() {
            finite.push(v);
        } else {
            excluded_inf += 1;
        }
    }
    let n = finite.len();
    let (mean, std) = if n == 0 {
        (if excluded_inf > 0 { Some(f64::INFINITY) } else { None }, None)
    } else {
        let mean = finite.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        (Some(mean), Some(std))
    };
    MetricSummary {
        mean,
        std,
        count: n,
        excluded_inf,
    }
}

/// Aggregates rows by level, in ladder order. Rows carrying an error only
/// contribute to `errors`.
pub fn aggregate(report: &LadderReport) -> Vec<LevelSummary> {
    let nl = report.spec.levels.len().max(1);
    let ns = report.spec.seeds_per_image.max(1);
    report
        .spec
        .levels
        .iter()
        .enumerate()
        .map(|(level_index, &level)| {
            let rows: Vec<&LadderRow> = report
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| (i / ns) % nl == level_index)
                .map(|(_, r)| r)
                .collect();
            let ok: Vec<&&LadderRow> = rows.iter().filter(|r| r.error.is_none()).collect();
            let pick = |f: fn(&LadderRow) -> Option<f64>| summarize(ok.iter().filter_map(|r| f(r)));
            LevelSummary {
                level_index,
                level,
                rows: rows.len(),
                errors: rows.len() - ok.len(),
                psnr_in: pick(|r| r.psnr_in),
                ssim_in: pick(|r| r.ssim_in),
                psnr_out: pick(|r| r.psnr_out),
                ssim_out: pick(|r| r.ssim_out),
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) if v == f64::NEG_INFINITY => "-inf".into(),
        Some(v) => v.to_string(),
    }
}

pub fn write_csv(report: &LadderReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.image_id.clone(),
            r.kind.as_str().to_string(),
            r.level.to_string(),
            r.seed.to_string(),
            fmt_opt(r.psnr_in),
            fmt_opt(r.ssim_in),
            fmt_opt(r.psnr_out),
            fmt_opt(r.ssim_out),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::Csv(e.into()))?;
    Ok(())
}

/// JSON companion of the CSV: the ladder definition plus per-level
/// aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSidecar {
    pub spec: LadderSpec,
    #[serde(with = "crate::serde_util::u64_string")]
    pub base_seed: u64,
    pub images: usize,
    pub rows: usize,
    pub errors: usize,
    pub levels: Vec<LevelSummary>,
}

pub fn sidecar(report: &LadderReport) -> LadderSidecar {
    let mut ids: Vec<&str> = report.rows.iter().map(|r| r.image_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    LadderSidecar {
        spec: report.spec.clone(),
        base_seed: report.base_seed,
        images: ids.len(),
        rows: report.rows.len(),
        errors: report.rows.iter().filter(|r| r.error.is_some()).count(),
        levels: aggregate(report),
    }
}

pub fn write_json(report: &LadderReport, out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(out, &sidecar(report))?;
    Ok(())
}
