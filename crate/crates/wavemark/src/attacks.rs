//! Deterministic attack battery for robustness evaluation.
//!
//! Every attack models the 8-bit world: the input is clamped to `[0, 1]`
//! first and the output is clamped again at the end. All attacks are
//! bit-reproducible; the only stochastic one, `GaussianNoise`, owns an
//! explicit seed and draws from a frozen generator (ChaCha8 stream, ziggurat
//! normal sampling, row-major order).

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{quantize_sample, resize, GrayImage, ResizeMethod};
use crate::metrics::psnr_between;

fn default_gamma() -> f64 {
    1.5
}
fn default_in_high() -> f64 {
    0.8
}
fn default_factor() -> f64 {
    0.5
}
fn default_amount() -> f64 {
    0.6
}
fn default_quality() -> u8 {
    75
}

/// One attack with its parameters. Serializes to tagged JSON
/// (`{"kind": "jpeg_compress", "quality": 75}`) for attack-matrix configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    /// Power-law intensity remap `v^gamma`.
    IntensityAdjust {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// Linear stretch of `[0, in_high]` onto `[0, 1]`, clipping above.
    GammaCorrection {
        #[serde(default = "default_in_high")]
        in_high: f64,
    },
    /// 256-bin histogram equalization via the cumulative distribution.
    HistEq,
    /// 3x3 box blur, edge-replicated.
    LowPass,
    /// Bilinear resample down to `factor` per axis and back up.
    Resize {
        #[serde(default = "default_factor")]
        factor: f64,
    },
    /// Additive white Gaussian noise, seeded.
    GaussianNoise { mean: f64, variance: f64, seed: u64 },
    /// Unsharp sharpening with strength `amount`.
    HighPass {
        #[serde(default = "default_amount")]
        amount: f64,
    },
    /// Baseline JPEG encode/decode cycle at the given quality.
    JpegCompress {
        #[serde(default = "default_quality")]
        quality: u8,
    },
}

impl AttackSpec {
    /// Frozen evaluation-order default matrix. `seed` feeds the noise attack.
    pub fn default_matrix(seed: u64) -> Vec<AttackSpec> {
        vec![
            AttackSpec::IntensityAdjust {
                gamma: default_gamma(),
            },
            AttackSpec::GammaCorrection {
                in_high: default_in_high(),
            },
            AttackSpec::HistEq,
            AttackSpec::LowPass,
            AttackSpec::Resize {
                factor: default_factor(),
            },
            AttackSpec::GaussianNoise {
                mean: 0.0,
                variance: 0.001,
                seed,
            },
            AttackSpec::HighPass {
                amount: default_amount(),
            },
            AttackSpec::JpegCompress {
                quality: default_quality(),
            },
        ]
    }

    /// Stable name, identical to the serde tag.
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::IntensityAdjust { .. } => "intensity_adjust",
            AttackSpec::GammaCorrection { .. } => "gamma_correction",
            AttackSpec::HistEq => "hist_eq",
            AttackSpec::LowPass => "low_pass",
            AttackSpec::Resize { .. } => "resize",
            AttackSpec::GaussianNoise { .. } => "gaussian_noise",
            AttackSpec::HighPass { .. } => "high_pass",
            AttackSpec::JpegCompress { .. } => "jpeg_compress",
        }
    }

    /// Human-readable parameter summary. Never contains commas, so it can be
    /// dropped into a CSV field unquoted.
    pub fn params_summary(&self) -> String {
        match self {
            AttackSpec::IntensityAdjust { gamma } => format!("gamma={gamma}"),
            AttackSpec::GammaCorrection { in_high } => format!("in_high={in_high}"),
            AttackSpec::HistEq => String::new(),
            AttackSpec::LowPass => "kernel=3x3".to_string(),
            AttackSpec::Resize { factor } => format!("factor={factor}"),
            AttackSpec::GaussianNoise {
                mean,
                variance,
                seed,
            } => format!("mean={mean} var={variance} seed={seed}"),
            AttackSpec::HighPass { amount } => format!("amount={amount}"),
            AttackSpec::JpegCompress { quality } => format!("quality={quality}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackSpec::IntensityAdjust { gamma } => {
                if !gamma.is_finite() || gamma <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "intensity_adjust gamma must be finite and > 0, got {gamma}"
                    )));
                }
            }
            AttackSpec::GammaCorrection { in_high } => {
                if !in_high.is_finite() || in_high <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "gamma_correction in_high must be finite and > 0, got {in_high}"
                    )));
                }
            }
            AttackSpec::HistEq | AttackSpec::LowPass => {}
            AttackSpec::Resize { factor } => {
                if !factor.is_finite() || factor <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "resize factor must be finite and > 0, got {factor}"
                    )));
                }
            }
            AttackSpec::GaussianNoise { mean, variance, .. } => {
                if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "gaussian_noise needs finite mean and variance >= 0, got mean={mean} variance={variance}"
                    )));
                }
            }
            AttackSpec::HighPass { amount } => {
                if !amount.is_finite() || amount < 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "high_pass amount must be finite and >= 0, got {amount}"
                    )));
                }
            }
            AttackSpec::JpegCompress { quality } => {
                if !(1..=100).contains(&quality) {
                    return Err(Error::InvalidParam(format!(
                        "jpeg_compress quality must be in 1..=100, got {quality}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// 3x3 convolution with edge-replicated borders.
fn conv3x3(img: &GrayImage, kernel: &[[f64; 3]; 3]) -> GrayImage {
    let (w, h) = (img.width() as isize, img.height() as isize);
    GrayImage::from_fn(img.width(), img.height(), |r, c| {
        let mut acc = 0.0;
        for (kr, row) in kernel.iter().enumerate() {
            for (kc, &k) in row.iter().enumerate() {
                let y = (r as isize + kr as isize - 1).clamp(0, h - 1) as usize;
                let x = (c as isize + kc as isize - 1).clamp(0, w - 1) as usize;
                acc += k * img.get(y, x);
            }
        }
        acc
    })
    .expect("same dimensions as a valid image")
}

fn hist_eq(img: &GrayImage) -> GrayImage {
    let bytes = img.to_bytes();
    let mut hist = [0u64; 256];
    for &b in &bytes {
        hist[b as usize] += 1;
    }
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (i, &hv) in hist.iter().enumerate() {
        acc += hv;
        cdf[i] = acc;
    }
    let total = bytes.len() as u64;
    let cdf_min = cdf
        .iter()
        .copied()
        .find(|&v| v > 0)
        .expect("image is non-empty");
    // Standard CDF remap: level -> round(255 * (cdf - cdf_min) / (N - cdf_min)).
    // A constant image (cdf_min == N) has nothing to equalize; pass through.
    if cdf_min == total {
        return img.clamped();
    }
    let denom = (total - cdf_min) as f64;
    let mut lut = [0f64; 256];
    for i in 0..256 {
        let num = cdf[i].saturating_sub(cdf_min) as f64;
        lut[i] = (255.0 * num / denom).round() / 255.0;
    }
    GrayImage::from_fn(img.width(), img.height(), |r, c| {
        lut[quantize_sample(img.get(r, c)) as usize]
    })
    .expect("same dimensions as a valid image")
}

fn jpeg_cycle(img: &GrayImage, quality: u8) -> Result<GrayImage> {
    use image::ImageEncoder;
    let bytes = img.to_bytes();
    let mut encoded = Vec::new();
    let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(&mut encoded, quality);
    enc.write_image(
        &bytes,
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|e| Error::CorruptImage(format!("jpeg encode: {e}")))?;
    let decoded = image::load_from_memory_with_format(&encoded, image::ImageFormat::Jpeg)
        .map_err(|e| Error::CorruptImage(format!("jpeg decode: {e}")))?
        .into_luma8();
    GrayImage::from_bytes(
        decoded.width() as usize,
        decoded.height() as usize,
        decoded.as_raw(),
    )
}

/// Run one attack. The result has the input's dimensions and lies in [0, 1].
pub fn apply_attack(img: &GrayImage, spec: &AttackSpec) -> Result<GrayImage> {
    spec.validate()?;
    let input = img.clamped();
    let out = match *spec {
        AttackSpec::IntensityAdjust { gamma } => input.map(|v| v.powf(gamma)),
        AttackSpec::GammaCorrection { in_high } => input.map(|v| v / in_high),
        AttackSpec::HistEq => hist_eq(&input),
        AttackSpec::LowPass => {
            let k = 1.0 / 9.0;
            conv3x3(&input, &[[k; 3]; 3])
        }
        AttackSpec::Resize { factor } => {
            let mid_w = ((input.width() as f64 * factor).round() as usize).max(2);
            let mid_h = ((input.height() as f64 * factor).round() as usize).max(2);
            let down = resize(&input, mid_w, mid_h, ResizeMethod::Bilinear)?;
            resize(&down, input.width(), input.height(), ResizeMethod::Bilinear)?
        }
        AttackSpec::GaussianNoise {
            mean,
            variance,
            seed,
        } => {
            if variance == 0.0 {
                input.map(|v| v + mean)
            } else {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(mean, variance.sqrt())
                    .map_err(|e| Error::InvalidParam(format!("gaussian_noise: {e}")))?;
                let noisy: Vec<f64> = input
                    .as_slice()
                    .iter()
                    .map(|v| v + normal.sample(&mut rng))
                    .collect();
                GrayImage::new(input.width(), input.height(), noisy)?
            }
        }
        AttackSpec::HighPass { amount } => {
            let a = amount;
            let s = 1.0 / (a + 1.0);
            let kernel = [
                [-a * s, (a - 1.0) * s, -a * s],
                [(a - 1.0) * s, (a + 5.0) * s, (a - 1.0) * s],
                [-a * s, (a - 1.0) * s, -a * s],
            ];
            conv3x3(&input, &kernel)
        }
        AttackSpec::JpegCompress { quality } => jpeg_cycle(&input, quality)?,
    };
    Ok(out.clamped())
}

/// PSNR between an image and its attacked version (or any pair).
pub fn attack_psnr(original: &GrayImage, attacked: &GrayImage) -> Result<f64> {
    psnr_between(original, attacked)
}
