//! 8-bit PNG / binary PGM reading and writing.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::GrayImage;

/// Loads an 8-bit grayscale PNG or PGM as `byte / 255`. RGB(A) images are
/// reduced with luma `0.299R + 0.587G + 0.114B`; 16-bit data is rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = image::guess_format(&bytes).map_err(|e| Error::Decode {
        path: path.into(),
        source: e,
    })?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(Error::UnsupportedFormat {
            path: path.into(),
            reason: format!("{format:?} is not PNG or PGM"),
        });
    }
    let decoded = image::load_from_memory_with_format(&bytes, format).map_err(|e| Error::Decode {
        path: path.into(),
        source: e,
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let data: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect(),
        DynamicImage::ImageLumaA8(b) => b.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        DynamicImage::ImageRgb8(b) => b.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(b) => b.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.into(),
                reason: format!("{:?} samples; only 8-bit data is supported", other.color()),
            })
        }
    };
    GrayImage::from_vec_clipped(h, w, data)
}

fn luma(r: u8, g: u8, b: u8) -> f64 {
    (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)) / 255.0
}

/// `round(clip(v)·255)` with halves rounded up.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn to_bytes(img: &GrayImage) -> Vec<u8> {
    img.data().iter().map(|&v| quantize(v)).collect()
}

/// Writes an 8-bit grayscale PNG, or binary PGM when the extension is
/// `.pgm`.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, to_bytes(img))
        .expect("buffer length matches dimensions");
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let format = if is_pgm { ImageFormat::Pnm } else { ImageFormat::Png };
    buf.save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.into(),
            source: other,
        },
    })
}

/// Image files (`.png`, `.pgm`) in `dir`, sorted by file name, with the file
/// stem as id.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, GrayImage)>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if p.is_file() && matches!(ext.as_deref(), Some("png" | "pgm")) {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            Ok((id, load_image(&p)?))
        })
        .collect()
}
