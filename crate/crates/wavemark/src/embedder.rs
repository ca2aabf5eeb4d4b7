//! Watermark nesting and additive subband embedding.
//!
//! Nesting folds a secondary watermark into the horizontal detail band of a
//! primary watermark: `nested = idwt2(ca, ch + alpha_nest * S, cv, cd)`. The
//! nested image is then embedded into a cover by adding `alpha_ll * W` to a
//! window of the cover's approximation band and `alpha_hh * W` to the same
//! window of its diagonal band. Everything stays in float; nothing here
//! clamps or quantizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::GrayImage;
use crate::wavelet::{dwt2, idwt2, WaveletKind};

fn default_alpha_ll() -> f64 {
    0.04
}
fn default_alpha_hh() -> f64 {
    0.01
}
fn default_alpha_nest() -> f64 {
    1.0
}

/// Embedding strengths and placement.
///
/// The defaults carry the approximation band at 0.04 and the diagonal band at
/// 0.01: the LL band tolerates a stronger mark before visible distortion,
/// while HH must stay weak. `alpha_ll < alpha_hh` is therefore suspicious but
/// not invalid; [`EmbedParams::warnings`] flags it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    #[serde(default)]
    pub wavelet: WaveletKind,
    #[serde(default = "default_alpha_ll")]
    pub alpha_ll: f64,
    #[serde(default = "default_alpha_hh")]
    pub alpha_hh: f64,
    #[serde(default = "default_alpha_nest")]
    pub alpha_nest: f64,
    #[serde(default)]
    pub offset_row: usize,
    #[serde(default)]
    pub offset_col: usize,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            wavelet: WaveletKind::Haar,
            alpha_ll: default_alpha_ll(),
            alpha_hh: default_alpha_hh(),
            alpha_nest: default_alpha_nest(),
            offset_row: 0,
            offset_col: 0,
        }
    }
}

impl EmbedParams {
    /// Hard validation: every strength must be finite and positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_ll", self.alpha_ll),
            ("alpha_hh", self.alpha_hh),
            ("alpha_nest", self.alpha_nest),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Non-fatal oddities worth surfacing to the user.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha_ll < self.alpha_hh {
            out.push(format!(
                "alpha_ll ({}) is weaker than alpha_hh ({}); the approximation band usually carries the stronger mark",
                self.alpha_ll, self.alpha_hh
            ));
        }
        out
    }
}

/// A primary watermark with a secondary folded into its horizontal band.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedWatermark {
    /// The composite payload actually embedded into covers. Unclamped.
    pub image: GrayImage,
    pub primary_dims: (usize, usize),
    pub secondary_dims: (usize, usize),
}

/// Fold `secondary` into the horizontal detail band of `primary`.
///
/// The secondary must be exactly half the primary along each axis so it fills
/// the band completely; use [`crate::imageio::resize`] first if it is not.
pub fn nest_watermarks(
    primary: &GrayImage,
    secondary: &GrayImage,
    params: &EmbedParams,
) -> Result<NestedWatermark> {
    params.validate()?;
    let mut bands = dwt2(primary, params.wavelet)?;
    let want = (primary.width() / 2, primary.height() / 2);
    let got = (secondary.width(), secondary.height());
    if got != want {
        return Err(Error::DimensionMismatch(format!(
            "secondary watermark must be half the primary per axis: expected {}x{}, got {}x{}",
            want.0, want.1, got.0, got.1
        )));
    }
    for r in 0..secondary.height() {
        for c in 0..secondary.width() {
            let v = bands.ch.get(r, c) + params.alpha_nest * secondary.get(r, c);
            bands.ch.set(r, c, v);
        }
    }
    let image = idwt2(&bands, params.wavelet)?;
    Ok(NestedWatermark {
        image,
        primary_dims: (primary.width(), primary.height()),
        secondary_dims: got,
    })
}

/// Additively embed `watermark` (typically [`NestedWatermark::image`]) into
/// the cover's `ca` and `cd` bands at the configured window offset. The
/// output is float and unclamped.
pub fn embed_into_cover(
    cover: &GrayImage,
    watermark: &GrayImage,
    params: &EmbedParams,
) -> Result<GrayImage> {
    params.validate()?;
    let mut bands = dwt2(cover, params.wavelet)?;
    let (band_h, band_w) = bands.ca.dims();
    let (wm_w, wm_h) = (watermark.width(), watermark.height());
    if params.offset_row + wm_h > band_h || params.offset_col + wm_w > band_w {
        return Err(Error::WatermarkTooLarge {
            wm_width: wm_w,
            wm_height: wm_h,
            offset_row: params.offset_row,
            offset_col: params.offset_col,
            band_width: band_w,
            band_height: band_h,
        });
    }
    for r in 0..wm_h {
        for c in 0..wm_w {
            let (br, bc) = (params.offset_row + r, params.offset_col + c);
            let w = watermark.get(r, c);
            bands
                .ca
                .set(br, bc, bands.ca.get(br, bc) + params.alpha_ll * w);
            bands
                .cd
                .set(br, bc, bands.cd.get(br, bc) + params.alpha_hh * w);
        }
    }
    idwt2(&bands, params.wavelet)
}

/// Payload capacity in bits for a watermark of `wm_dims` (width, height)
/// carried by `cover`: one bit per watermark pixel, doubled when the
/// watermark itself nests a secondary.
pub fn capacity_bits(cover: &GrayImage, wm_dims: (usize, usize), nested: bool) -> Result<u64> {
    let (band_w, band_h) = (cover.width() / 2, cover.height() / 2);
    let (wm_w, wm_h) = wm_dims;
    if wm_w > band_w || wm_h > band_h {
        return Err(Error::WatermarkTooLarge {
            wm_width: wm_w,
            wm_height: wm_h,
            offset_row: 0,
            offset_col: 0,
            band_width: band_w,
            band_height: band_h,
        });
    }
    let area = (wm_w * wm_h) as u64;
    Ok(if nested { 2 * area } else { area })
}
