//! Grayscale image container and file I/O.
//!
//! Samples live in `[0, 1]` as `f64`, stored row-major. The range is nominal:
//! intermediate pipeline stages (inverse transforms, raw extraction
//! estimates) may leave it, and values are only clamped when explicitly
//! requested or at 8-bit quantization time.
//!
//! Supported formats: binary PGM (P5, maxval 255, hand-rolled codec so the
//! written bytes are reproducible), plus PNG and baseline JPEG through the
//! `image` crate. Color inputs are reduced to luma with BT.601 weights
//! (0.299 R + 0.587 G + 0.114 B); the crate's own converter uses BT.709, so
//! the conversion is done here.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantize one sample to 8-bit: clamp to [0,1], scale by 255, round half up.
pub fn quantize_sample(s: f64) -> u8 {
    (s.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// A grayscale image, at least 2x2, row-major `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Build from raw samples. `data` is row-major, length `width * height`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidDimensions(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDimensions(
                "samples must be finite".to_string(),
            ));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        GrayImage::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    /// Decode 8-bit samples (value / 255, exact).
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        GrayImage::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Apply `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamped(&self) -> GrayImage {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// 8-bit rendering (clamp, scale, round half up).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_sample(v)).collect()
    }

    /// Clamp and snap every sample to the nearest 1/255 step, i.e. the image
    /// that an 8-bit save/load round trip would produce.
    pub fn quantized(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| f64::from(quantize_sample(v)) / 255.0)
                .collect(),
        }
    }
}

/// Resampling method for [`resize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMethod {
    Nearest,
    Bilinear,
}

/// Resize to `new_width` x `new_height`.
///
/// Sampling is center-aligned and edge-clamped: output pixel centers map to
/// `(i + 0.5) * in/out - 0.5` in input coordinates. A constant image stays
/// exactly constant under both methods.
pub fn resize(
    img: &GrayImage,
    new_width: usize,
    new_height: usize,
    method: ResizeMethod,
) -> Result<GrayImage> {
    if new_width < 2 || new_height < 2 {
        return Err(Error::InvalidDimensions(format!(
            "resize target must be at least 2x2, got {new_width}x{new_height}"
        )));
    }
    let sx = img.width as f64 / new_width as f64;
    let sy = img.height as f64 / new_height as f64;
    let mut data = Vec::with_capacity(new_width * new_height);
    for row in 0..new_height {
        let src_y = (row as f64 + 0.5) * sy - 0.5;
        for col in 0..new_width {
            let src_x = (col as f64 + 0.5) * sx - 0.5;
            let v = match method {
                ResizeMethod::Nearest => {
                    let y = (src_y.round().max(0.0) as usize).min(img.height - 1);
                    let x = (src_x.round().max(0.0) as usize).min(img.width - 1);
                    img.get(y, x)
                }
                ResizeMethod::Bilinear => {
                    let y0f = src_y.floor();
                    let x0f = src_x.floor();
                    let fy = src_y - y0f;
                    let fx = src_x - x0f;
                    let y0 = (y0f.max(0.0) as usize).min(img.height - 1);
                    let x0 = (x0f.max(0.0) as usize).min(img.width - 1);
                    let y1 = (y0f + 1.0).clamp(0.0, (img.height - 1) as f64) as usize;
                    let x1 = (x0f + 1.0).clamp(0.0, (img.width - 1) as f64) as usize;
                    // lerp form a + (b - a) * t keeps constants exact.
                    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
                    let top = lerp(img.get(y0, x0), img.get(y0, x1), fx);
                    let bot = lerp(img.get(y1, x0), img.get(y1, x1), fx);
                    lerp(top, bot, fy)
                }
            };
            data.push(v);
        }
    }
    GrayImage::new(new_width, new_height, data)
}

/// Load a grayscale image from PGM (P5), PNG, or JPEG.
///
/// The format is sniffed from magic bytes, not the extension. 8-bit samples
/// decode to `value / 255` exactly; color inputs are converted with BT.601
/// luma weights and re-quantized to the 1/255 grid.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let bytes = fs::read(path)?;
    match bytes.as_slice() {
        [b'P', b'5', ..] => decode_pgm(&bytes),
        [0x89, b'P', b'N', b'G', ..] | [0xFF, 0xD8, ..] => decode_with_image_crate(&bytes),
        [b'P', m, ..] if (b'1'..=b'7').contains(m) => Err(Error::UnsupportedFormat(format!(
            "only binary PGM (P5) is supported, got P{}",
            *m as char
        ))),
        _ => Err(Error::UnsupportedFormat(format!(
            "unrecognized image format: {}",
            path.display()
        ))),
    }
}

/// Save as PGM (P5), PNG, or JPEG depending on the file extension.
/// Samples are quantized to 8-bit with round-half-up.
pub fn save_image(path: &Path, img: &GrayImage) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = img.to_bytes();
    match ext.as_str() {
        "pgm" => {
            let file = fs::File::create(path)?;
            let mut w = BufWriter::new(file);
            write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
            w.write_all(&bytes)?;
            w.flush()?;
            Ok(())
        }
        "png" => image::save_buffer_with_format(
            path,
            &bytes,
            img.width as u32,
            img.height as u32,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::CorruptImage(format!("png encode: {e}"))),
        "jpg" | "jpeg" => {
            use image::ImageEncoder;
            let file = fs::File::create(path)?;
            let mut w = BufWriter::new(file);
            let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(&mut w, 90);
            enc.write_image(
                &bytes,
                img.width as u32,
                img.height as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|e| Error::CorruptImage(format!("jpeg encode: {e}")))?;
            w.flush()?;
            Ok(())
        }
        _ => Err(Error::UnsupportedFormat(format!(
            "cannot infer output format from path: {}",
            path.display()
        ))),
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2; // past "P5"
    let width = read_pgm_int(bytes, &mut pos)?;
    let height = read_pgm_int(bytes, &mut pos)?;
    let maxval = read_pgm_int(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PGM maxval must be 255, got {maxval}"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::CorruptImage("PGM header not terminated".into())),
    }
    let expected = width * height;
    let raster = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| Error::CorruptImage("PGM raster shorter than header promises".into()))?;
    GrayImage::from_bytes(width, height, raster)
}

/// Read the next decimal integer from a PGM header, skipping whitespace and
/// `#` comment lines.
fn read_pgm_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::CorruptImage("malformed PGM header".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::CorruptImage("malformed PGM header".into()))
}

fn decode_with_image_crate(bytes: &[u8]) -> Result<GrayImage> {
    let dyn_img =
        image::load_from_memory(bytes).map_err(|e| Error::CorruptImage(format!("decode: {e}")))?;
    let (w, h) = (dyn_img.width() as usize, dyn_img.height() as usize);
    match dyn_img {
        image::DynamicImage::ImageLuma8(buf) => GrayImage::from_bytes(w, h, buf.as_raw()),
        image::DynamicImage::ImageLumaA8(buf) => {
            let luma: Vec<u8> = buf.pixels().map(|p| p.0[0]).collect();
            GrayImage::from_bytes(w, h, &luma)
        }
        image::DynamicImage::ImageRgb8(_) | image::DynamicImage::ImageRgba8(_) => {
            let rgb = dyn_img.to_rgb8();
            let luma: Vec<u8> = rgb
                .pixels()
                .map(|p| {
                    let [r, g, b] = p.0;
                    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
                    y.round() as u8
                })
                .collect();
            GrayImage::from_bytes(w, h, &luma)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "sample format {:?} not supported (8-bit only)",
            other.color()
        ))),
    }
}
