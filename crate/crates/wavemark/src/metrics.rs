//! Fidelity and similarity scoring.
//!
//! PSNR is defined against MAX = 1.0: samples are normalized to `[0, 1]`, so
//! `psnr = 10 * log10(1 / mse)`. Similarity Ratio is `S / (S + D)` where `S`
//! counts matching pixels and `D` differing ones, evaluated after a
//! quantization rule chosen by [`SrMode`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// Mean squared error over raw (unquantized) samples.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "mse needs equal dimensions, got {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let n = a.as_slice().len() as f64;
    let sum: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / n)
}

/// Peak signal-to-noise ratio in dB for a given MSE, with MAX = 1.0.
/// An MSE of zero maps to `+inf`.
pub fn psnr(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

pub fn psnr_between(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(psnr(mse(a, b)?))
}

/// Quantization rule applied to both images before counting matches.
///
/// `Exact8Bit` compares 8-bit renderings sample for sample. `Binary`
/// thresholds both images first; it is the right rule for logo-style
/// watermarks, where an estimate can sit well off the exact 8-bit grid yet
/// still carry every bit of the payload.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SrMode {
    #[default]
    Exact8Bit,
    Binary {
        threshold: f64,
    },
}

impl std::fmt::Display for SrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SrMode::Exact8Bit => write!(f, "exact8bit"),
            SrMode::Binary { threshold } => write!(f, "binary({threshold})"),
        }
    }
}

/// Similarity Ratio `S / (S + D)` of two images under `mode`. Symmetric in
/// its arguments; 1.0 iff the quantized images are identical (exact mode) or
/// identically classified (binary mode).
///
/// Both modes score the 8-bit rendering, not the raw floats, and binary mode
/// classifies a byte as "ink" when its quantization interval reaches the
/// threshold (`byte >= 255*t - 0.5`). The half-step guard keeps the class
/// boundary off representable payload values: a payload sitting exactly on
/// the threshold rounds to byte 127 or 128 depending on sub-quantization
/// extraction noise, and both classify alike.
pub fn similarity_ratio(extracted: &GrayImage, reference: &GrayImage, mode: SrMode) -> Result<f64> {
    if extracted.width() != reference.width() || extracted.height() != reference.height() {
        return Err(Error::DimensionMismatch(format!(
            "similarity_ratio needs equal dimensions, got {}x{} vs {}x{}",
            extracted.width(),
            extracted.height(),
            reference.width(),
            reference.height()
        )));
    }
    if let SrMode::Binary { threshold } = mode {
        if !threshold.is_finite() {
            return Err(Error::InvalidParam(format!(
                "binary SR threshold must be finite, got {threshold}"
            )));
        }
    }
    let total = extracted.as_slice().len();
    let a_bytes = extracted.to_bytes();
    let b_bytes = reference.to_bytes();
    let matching = match mode {
        SrMode::Exact8Bit => a_bytes
            .iter()
            .zip(b_bytes.iter())
            .filter(|(a, b)| a == b)
            .count(),
        SrMode::Binary { threshold } => {
            let cut = 255.0 * threshold - 0.5;
            let class = |byte: u8| f64::from(byte) >= cut;
            a_bytes
                .iter()
                .zip(b_bytes.iter())
                .filter(|(&a, &b)| class(a) == class(b))
                .count()
        }
    };
    Ok(matching as f64 / total as f64)
}
