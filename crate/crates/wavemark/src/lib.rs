//! Nested wavelet watermarking for grayscale images.
//!
//! The pipeline: a secondary watermark is folded into the horizontal detail
//! band of a primary watermark (nesting), the nested result is embedded
//! additively into the approximation and diagonal bands of a cover image, and
//! non-blind extraction inverts the algebra to recover the payload. The
//! `attacks`, `metrics`, and `report` modules evaluate robustness of the two
//! carrier bands under common signal-processing attacks.

pub mod attacks;
pub mod config;
pub mod embedder;
pub mod error;
pub mod extractor;
pub mod fixtures;
pub mod imageio;
pub mod metrics;
pub mod report;
pub mod wavelet;

pub use attacks::{apply_attack, attack_psnr, AttackSpec};
pub use embedder::{
    capacity_bits, embed_into_cover, nest_watermarks, EmbedParams, NestedWatermark,
};
pub use error::{Error, Result};
pub use extractor::{denest_secondary, extract_watermark, extract_with_divisors, ExtractionResult};
pub use imageio::{load_image, resize, save_image, GrayImage, ResizeMethod};
pub use metrics::{mse, psnr, psnr_between, similarity_ratio, SrMode};
pub use wavelet::{dwt2, idwt2, Plane, SubbandSet, WaveletKind};
