//! Error type shared across the crate.
//!
//! Display strings lead with the condition name so CLI diagnostics and logs
//! can be grepped for the exact failure class.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FileNotFound: {0}")]
    FileNotFound(PathBuf),

    #[error("UnsupportedFormat: {0}")]
    UnsupportedFormat(String),

    #[error("CorruptImage: {0}")]
    CorruptImage(String),

    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),

    #[error("InvalidDimensions: {0}")]
    InvalidDimensions(String),

    /// Single-level DWT halves each axis, so both sides must be even.
    #[error("OddDimensions: {width}x{height} (both sides must be even)")]
    OddDimensions { width: usize, height: usize },

    #[error("MismatchedPlanes: {0}")]
    MismatchedPlanes(String),

    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),

    #[error("WatermarkTooLarge: watermark {wm_width}x{wm_height} at offset ({offset_row},{offset_col}) exceeds subband {band_width}x{band_height}")]
    WatermarkTooLarge {
        wm_width: usize,
        wm_height: usize,
        offset_row: usize,
        offset_col: usize,
        band_width: usize,
        band_height: usize,
    },

    #[error("InvalidParam: {0}")]
    InvalidParam(String),

    #[error("ConfigError: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for usage/config problems, 3 for
    /// processing failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FileNotFound(_) | Error::InvalidParam(_) | Error::Config(_) => 2,
            _ => 3,
        }
    }
}
