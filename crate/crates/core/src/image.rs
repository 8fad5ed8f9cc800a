//! Grayscale rasters in `[0, 1]` and the geometric augmentation pipeline.
//!
//! Training patches are produced by resize -> rotate -> crop. Every operation
//! here is a pure function that returns a new image whose intensities are
//! already clipped to the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Builds an image, rejecting wrong lengths and values outside `[0, 1]`.
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        check_dims(height, width, data.len())?;
        if let Some(v) = data.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds an image, clamping every value into `[0, 1]` (NaN becomes 0).
    pub fn from_vec_clipped(height: usize, width: usize, mut data: Vec<T>) -> Result<Self> {
        check_dims(height, width, data.len())?;
        data.iter_mut().for_each(|v| *v = v.clamp_unit());
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Result<Self> {
        Self::from_vec(height, width, vec![value; height * width])
    }

    /// Builds an image from `f(row, col)`, clamping the results.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec_clipped(height, width, data)
    }

    /// Internal constructor for buffers the caller has already clipped.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        debug_assert!(data.iter().all(|v| *v >= T::zero() && *v <= T::one()));
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|v| v.as_f64()).sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` per pixel and clips the result.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        let data = self.data.iter().map(|&v| f(v).clamp_unit()).collect();
        Self::from_raw(self.height, self.width, data)
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Scalar>(&self) -> Image<U> {
        let data = self.data.iter().map(|v| U::of(v.as_f64()).clamp_unit()).collect();
        Image::from_raw(self.height, self.width, data)
    }
}

fn check_dims(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!("image dimensions {height}x{width} must be positive")));
    }
    if height * width != len {
        return Err(Error::invalid(format!(
            "data length {len} does not match {height}x{width}"
        )));
    }
    Ok(())
}

/// Clamps every pixel into `[0, 1]`.
pub fn clip_unit<T: Scalar>(img: &Image<T>) -> Image<T> {
    img.map(|v| v)
}

#[inline]
fn lerp<T: Scalar>(a: T, b: T, t: T) -> T {
    // a + t(b - a) keeps constants exact
    a + t * (b - a)
}

/// Bilinear sample with `(y, x)` in source pixel coordinates. The caller
/// guarantees `0 <= y <= h-1` and `0 <= x <= w-1`.
#[inline]
fn bilinear_at<T: Scalar>(img: &Image<T>, y: T, x: T) -> T {
    let h = img.height;
    let w = img.width;
    let y0 = y.floor().to_usize().unwrap_or(0).min(h - 1);
    let x0 = x.floor().to_usize().unwrap_or(0).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let fy = y - T::of(y0 as f64);
    let fx = x - T::of(x0 as f64);
    let top = lerp(img.get(y0, x0), img.get(y0, x1), fx);
    let bottom = lerp(img.get(y1, x0), img.get(y1, x1), fx);
    lerp(top, bottom, fy)
}

/// Bilinear resize with half-pixel (align-corners = false) coordinate mapping.
/// Source coordinates beyond the border are clamped to the edge pixels.
pub fn resize_bilinear<T: Scalar>(img: &Image<T>, out_h: usize, out_w: usize) -> Result<Image<T>> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::invalid(format!("resize target {out_h}x{out_w} must be positive")));
    }
    if (out_h, out_w) == img.dims() {
        return Ok(img.clone());
    }
    let sy = img.height as f64 / out_h as f64;
    let sx = img.width as f64 / out_w as f64;
    let max_y = (img.height - 1) as f64;
    let max_x = (img.width - 1) as f64;
    let xs: Vec<T> = (0..out_w)
        .map(|c| T::of(((c as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x)))
        .collect();
    let mut data = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let y = T::of(((r as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y));
        data.extend(xs.iter().map(|&x| bilinear_at(img, y, x).clamp_unit()));
    }
    Ok(Image::from_raw(out_h, out_w, data))
}

// trig round-off must not push exact border samples outside the source
const EDGE_EPS: f64 = 1e-9;

/// Rotates counter-clockwise (as displayed, rows growing downward) by
/// `degrees` about the geometric center `((H-1)/2, (W-1)/2)`.
///
/// Each output pixel is inverse-mapped into the source and sampled
/// bilinearly; samples that land outside the source are 0.
pub fn rotate<T: Scalar>(img: &Image<T>, degrees: f64) -> Image<T> {
    let (h, w) = img.dims();
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let max_y = (h - 1) as f64;
    let max_x = (w - 1) as f64;
    let mut data = Vec::with_capacity(h * w);
    for r in 0..h {
        let dy = r as f64 - cy;
        for c in 0..w {
            let dx = c as f64 - cx;
            let x = cx + cos * dx - sin * dy;
            let y = cy + sin * dx + cos * dy;
            let v = if (-EDGE_EPS..=max_y + EDGE_EPS).contains(&y)
                && (-EDGE_EPS..=max_x + EDGE_EPS).contains(&x)
            {
                let y = T::of(y.clamp(0.0, max_y));
                let x = T::of(x.clamp(0.0, max_x));
                bilinear_at(img, y, x).clamp_unit()
            } else {
                T::zero()
            };
            data.push(v);
        }
    }
    Image::from_raw(h, w, data)
}

/// Copies the `size = (h, w)` sub-rectangle starting at `origin = (row, col)`.
pub fn crop<T: Scalar>(img: &Image<T>, origin: (usize, usize), size: (usize, usize)) -> Result<Image<T>> {
    let (r0, c0) = origin;
    let (ch, cw) = size;
    if ch == 0 || cw == 0 || r0 + ch > img.height || c0 + cw > img.width {
        return Err(Error::invalid(format!(
            "crop {ch}x{cw} at ({r0}, {c0}) outside {}x{} image",
            img.height, img.width
        )));
    }
    let mut data = Vec::with_capacity(ch * cw);
    for r in r0..r0 + ch {
        data.extend_from_slice(&img.row(r)[c0..c0 + cw]);
    }
    Ok(Image::from_raw(ch, cw, data))
}

pub const DEFAULT_RESIZE: usize = 128;
pub const DEFAULT_CROP: usize = 64;
pub const MAX_ROTATION_DEGREES: f64 = 15.0;

/// One fully drawn augmentation: square resize, rotation, square crop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub target_resize: usize,
    pub rotation_degrees: f64,
    pub crop_size: usize,
    pub crop_origin: (usize, usize),
}

impl Default for AugmentSpec {
    fn default() -> Self {
        let off = (DEFAULT_RESIZE - DEFAULT_CROP) / 2;
        Self {
            target_resize: DEFAULT_RESIZE,
            rotation_degrees: 0.0,
            crop_size: DEFAULT_CROP,
            crop_origin: (off, off),
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.target_resize == 0 || self.crop_size == 0 {
            return Err(Error::invalid("resize and crop sizes must be positive"));
        }
        if !(self.rotation_degrees.abs() <= MAX_ROTATION_DEGREES) {
            return Err(Error::invalid(format!(
                "rotation {} exceeds +/-{MAX_ROTATION_DEGREES} degrees",
                self.rotation_degrees
            )));
        }
        let (r, c) = self.crop_origin;
        if r + self.crop_size > self.target_resize || c + self.crop_size > self.target_resize {
            return Err(Error::invalid(format!(
                "crop {} at ({r}, {c}) does not fit in {}",
                self.crop_size, self.target_resize
            )));
        }
        Ok(())
    }

    /// Draws θ ~ U[-15°, 15°] and a crop origin uniform over all valid origins.
    pub fn draw(rng: &mut RandomStream, target_resize: usize, crop_size: usize) -> Result<Self> {
        if crop_size == 0 || crop_size > target_resize {
            return Err(Error::invalid(format!(
                "crop {crop_size} must be in 1..={target_resize}"
            )));
        }
        let rotation_degrees = rng.uniform(-MAX_ROTATION_DEGREES, MAX_ROTATION_DEGREES);
        let span = target_resize - crop_size + 1;
        let row = rng.index(span);
        let col = rng.index(span);
        Ok(Self {
            target_resize,
            rotation_degrees,
            crop_size,
            crop_origin: (row, col),
        })
    }
}

/// Resize to a square, rotate, then crop.
pub fn augment_patch<T: Scalar>(img: &Image<T>, spec: &AugmentSpec) -> Result<Image<T>> {
    spec.validate()?;
    let resized = resize_bilinear(img, spec.target_resize, spec.target_resize)?;
    let rotated = rotate(&resized, spec.rotation_degrees);
    crop(&rotated, spec.crop_origin, (spec.crop_size, spec.crop_size))
}
