//! Cross-module stories: nesting, embedding, storage, attacks and recovery
//! composed the way a user would chain them.

use wavemark::attacks::{apply_attack, AttackSpec};
use wavemark::embedder::{embed_into_cover, nest_watermarks, EmbedParams};
use wavemark::extractor::{denest_secondary, extract_watermark};
use wavemark::fixtures::{primary_logo, pseudo_lena, secondary_logo};
use wavemark::imageio::{load_image, resize, save_image, GrayImage, ResizeMethod};
use wavemark::metrics::{similarity_ratio, SrMode};
use wavemark::wavelet::WaveletKind;

const BINARY: SrMode = SrMode::Binary { threshold: 0.5 };

fn max_abs_diff(a: &GrayImage, b: &GrayImage) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn nested_secondary_survives_jpeg_after_storage() {
    let cover = pseudo_lena(512);
    let primary = primary_logo(64);
    let secondary = secondary_logo(32);
    let params = EmbedParams::default();

    let nested = nest_watermarks(&primary, &secondary, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params)
        .unwrap()
        .clamped();

    // Storage round trip, then a lossy attack on the stored image.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("marked.pgm");
    save_image(&path, &marked).unwrap();
    let stored = load_image(&path).unwrap();
    let attacked = apply_attack(&stored, &AttackSpec::JpegCompress { quality: 75 }).unwrap();

    let result = extract_watermark(&attacked, &cover, 64, 64, &params).unwrap();
    let secondary_estimate = denest_secondary(&result.ll_estimate, &primary, &params).unwrap();
    let sr = similarity_ratio(&secondary_estimate, &secondary, BINARY).unwrap();
    // The secondary rides the LL channel, which JPEG leaves almost intact;
    // denesting averages residual noise further down.
    assert!(sr >= 0.99, "secondary SR after stored+jpeg: {sr}");
}

#[test]
fn db2_pipeline_recovers_exactly_in_memory() {
    let cover = pseudo_lena(256);
    let primary = primary_logo(32);
    let secondary = secondary_logo(16);
    let params = EmbedParams {
        wavelet: WaveletKind::Daubechies4,
        offset_row: 19,
        offset_col: 4,
        ..EmbedParams::default()
    };

    let nested = nest_watermarks(&primary, &secondary, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params).unwrap();
    let result = extract_watermark(&marked, &cover, 32, 32, &params).unwrap();
    assert!(max_abs_diff(&result.ll_estimate, &nested.image) < 1e-8);
    assert!(max_abs_diff(&result.hh_estimate, &nested.image) < 1e-8);

    let secondary_estimate = denest_secondary(&result.ll_estimate, &primary, &params).unwrap();
    assert!(max_abs_diff(&secondary_estimate, &secondary) < 1e-6);
}

#[test]
fn storage_formats_preserve_the_payload() {
    let cover = pseudo_lena(256);
    let logo = primary_logo(32);
    let params = EmbedParams::default();
    let marked = embed_into_cover(&cover, &logo, &params).unwrap().clamped();
    let dir = tempfile::tempdir().unwrap();

    // PNG is lossless over the 8-bit rendering: binary recovery is perfect.
    let png = dir.path().join("marked.png");
    save_image(&png, &marked).unwrap();
    let from_png = extract_watermark(&load_image(&png).unwrap(), &cover, 32, 32, &params).unwrap();
    assert_eq!(
        similarity_ratio(&from_png.ll_estimate, &logo, BINARY).unwrap(),
        1.0
    );
    assert_eq!(
        similarity_ratio(&from_png.hh_estimate, &logo, BINARY).unwrap(),
        1.0
    );

    // JPEG storage is lossy; the LL channel must still carry the logo.
    let jpg = dir.path().join("marked.jpg");
    save_image(&jpg, &marked).unwrap();
    let from_jpg = extract_watermark(&load_image(&jpg).unwrap(), &cover, 32, 32, &params).unwrap();
    let sr = similarity_ratio(&from_jpg.ll_estimate, &logo, BINARY).unwrap();
    assert!(sr >= 0.6, "LL SR from jpeg storage: {sr}");
}

#[test]
fn resized_secondary_flows_through_nesting() {
    let cover = pseudo_lena(128);
    let primary = primary_logo(32);
    // Wrong-sized secondary: resize down to primary/2 first.
    let oversized = secondary_logo(24);
    let fitted = resize(&oversized, 16, 16, ResizeMethod::Bilinear).unwrap();
    let params = EmbedParams::default();

    let nested = nest_watermarks(&primary, &fitted, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params).unwrap();
    let result = extract_watermark(&marked, &cover, 32, 32, &params).unwrap();
    let estimate = denest_secondary(&result.ll_estimate, &primary, &params).unwrap();
    assert!(max_abs_diff(&estimate, &fitted) < 1e-6);
}

#[test]
fn attacked_extraction_is_reproducible_end_to_end() {
    let cover = pseudo_lena(128);
    let primary = primary_logo(16);
    let secondary = secondary_logo(8);
    let params = EmbedParams::default();
    let nested = nest_watermarks(&primary, &secondary, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params)
        .unwrap()
        .clamped();

    let spec = AttackSpec::GaussianNoise {
        mean: 0.0,
        variance: 0.001,
        seed: 7,
    };
    let run = || {
        let attacked = apply_attack(&marked, &spec).unwrap();
        let result = extract_watermark(&attacked, &cover, 16, 16, &params).unwrap();
        (
            result.ll_estimate,
            similarity_ratio(&result.hh_estimate, &nested.image, BINARY).unwrap(),
        )
    };
    let (first_ll, first_sr) = run();
    let (second_ll, second_sr) = run();
    assert_eq!(first_ll, second_ll);
    assert_eq!(first_sr, second_sr);
}
