//! Acceptance gate: one test per shipping criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`, or on failure). Tolerances
//! are pinned here and nowhere else.

use std::time::Instant;

use wavemark::attacks::{apply_attack, AttackSpec};
use wavemark::embedder::{capacity_bits, embed_into_cover, nest_watermarks, EmbedParams};
use wavemark::error::Error;
use wavemark::extractor::{extract_watermark, extract_with_divisors};
use wavemark::fixtures::{primary_logo, pseudo_lena, secondary_logo};
use wavemark::imageio::{load_image, save_image, GrayImage};
use wavemark::metrics::{mse, psnr, similarity_ratio, SrMode};
use wavemark::report::{build_report, Band, ReportOptions};
use wavemark::wavelet::{dwt2, idwt2, WaveletKind};

/// Forward/inverse transform must reproduce the input to this absolute error.
const PR_TOL: f64 = 1e-10;
/// Attack-free extraction from an unquantized marked image.
const RECOVERY_TOL: f64 = 1e-8;
/// Binary-mode similarity after one 8-bit save/load round trip.
const ROUNDTRIP_SR_MIN: f64 = 0.99;
/// Analytic embedding-distortion budget, relative.
const BUDGET_REL_TOL: f64 = 1e-9;
/// Published PSNR reference points, dB.
const PSNR_POINT_TOL: f64 = 0.02;
/// Sample variance of the noise attack vs its parameter, relative.
const NOISE_VAR_REL_TOL: f64 = 0.10;
/// Per attack, the better band must keep at least this similarity.
const ATTACK_SR_MIN: f64 = 0.6;
/// Whole-matrix evaluation wall-clock budget.
const EVALUATE_TIME_BUDGET_SECS: f64 = 60.0;
/// Divisor-substitution identity, absolute on products.
const LITERAL_TOL: f64 = 1e-12;

const SEED: u64 = 42;
const BINARY: SrMode = SrMode::Binary { threshold: 0.5 };

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("{name}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} — {detail}");
}

/// xorshift64; keeps the gate free of RNG crates so criterion inputs are
/// frozen by this file alone.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }
    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn noise_image(width: usize, height: usize, rng: &mut Rng) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.unit()).unwrap()
}

fn max_abs_diff(a: &GrayImage, b: &GrayImage) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn standard_setup() -> (GrayImage, GrayImage, GrayImage, EmbedParams) {
    (
        pseudo_lena(512),
        primary_logo(64),
        secondary_logo(32),
        EmbedParams::default(),
    )
}

#[test]
fn criterion_1_perfect_reconstruction() {
    let mut rng = Rng::new(0xC1);
    let mut worst: f64 = 0.0;
    for kind in [WaveletKind::Haar, WaveletKind::Daubechies4] {
        for (w, h) in [
            (2, 2),
            (4, 4),
            (6, 6),
            (2, 8),
            (16, 4),
            (64, 64),
            (128, 128),
            (512, 512),
        ] {
            let img = noise_image(w, h, &mut rng);
            let rebuilt = idwt2(&dwt2(&img, kind).unwrap(), kind).unwrap();
            worst = worst.max(max_abs_diff(&img, &rebuilt));
        }
        let lena = pseudo_lena(512);
        let rebuilt = idwt2(&dwt2(&lena, kind).unwrap(), kind).unwrap();
        worst = worst.max(max_abs_diff(&lena, &rebuilt));
    }
    verdict(
        "criterion 1 (perfect reconstruction)",
        worst <= PR_TOL,
        &format!(
            "max |x - idwt2(dwt2(x))| = {worst:.3e} over haar+db2, 2x2..512x512 (tol {PR_TOL:.0e})"
        ),
    );
}

#[test]
fn criterion_2_recovery_and_storage_fidelity() {
    let (cover, logo, _, params) = standard_setup();
    let marked_raw = embed_into_cover(&cover, &logo, &params).unwrap();
    let exact = extract_watermark(&marked_raw, &cover, 64, 64, &params).unwrap();
    let raw_err =
        max_abs_diff(&exact.ll_estimate, &logo).max(max_abs_diff(&exact.hh_estimate, &logo));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("watermarked.pgm");
    save_image(&path, &marked_raw.clamped()).unwrap();
    let loaded = load_image(&path).unwrap();
    let stored = extract_watermark(&loaded, &cover, 64, 64, &params).unwrap();
    let sr_ll = similarity_ratio(&stored.ll_estimate, &logo, BINARY).unwrap();
    let sr_hh = similarity_ratio(&stored.hh_estimate, &logo, BINARY).unwrap();
    // The exact-8-bit scores after storage are reported for transparency:
    // quantization residue amplified by 1/alpha keeps estimates off the
    // exact grid, which is precisely why the shipping score is binary.
    let ex_ll = similarity_ratio(&stored.ll_estimate, &logo, SrMode::Exact8Bit).unwrap();
    let ex_hh = similarity_ratio(&stored.hh_estimate, &logo, SrMode::Exact8Bit).unwrap();

    verdict(
        "criterion 2 (recovery and storage fidelity)",
        raw_err <= RECOVERY_TOL && sr_ll >= ROUNDTRIP_SR_MIN && sr_hh >= ROUNDTRIP_SR_MIN,
        &format!(
            "raw max err {raw_err:.3e} (tol {RECOVERY_TOL:.0e}); 8-bit round trip SR binary LL {sr_ll:.4} HH {sr_hh:.4} (min {ROUNDTRIP_SR_MIN}); exact8bit LL {ex_ll:.4} HH {ex_hh:.4} (informational)"
        ),
    );
}

#[test]
fn criterion_3_distortion_budget() {
    let mut rng = Rng::new(0xBD6E7);
    let mut worst_rel: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 * (3 + rng.below(29)); // even 6..=62
        let band = n / 2;
        let wm_w = 2 + rng.below(band - 1);
        let wm_h = 2 + rng.below(band - 1);
        let params = EmbedParams {
            wavelet: if trial % 2 == 0 {
                WaveletKind::Haar
            } else {
                WaveletKind::Daubechies4
            },
            alpha_ll: rng.range(0.005, 0.2),
            alpha_hh: rng.range(0.005, 0.2),
            alpha_nest: 1.0,
            offset_row: rng.below(band - wm_h + 1),
            offset_col: rng.below(band - wm_w + 1),
        };
        let cover = noise_image(n, n, &mut rng);
        let wm = GrayImage::from_fn(wm_w, wm_h, |_, _| rng.range(0.05, 1.0)).unwrap();
        let marked = embed_into_cover(&cover, &wm, &params).unwrap();
        let measured = mse(&cover, &marked).unwrap();
        let mean_sq = wm.as_slice().iter().map(|v| v * v).sum::<f64>() / (wm_w * wm_h) as f64;
        let predicted =
            (params.alpha_ll.powi(2) + params.alpha_hh.powi(2)) * mean_sq * (wm_w * wm_h) as f64
                / (n * n) as f64;
        worst_rel = worst_rel.max((measured - predicted).abs() / predicted);
    }
    let p1 = (psnr(6.10e-5) - 42.15).abs();
    let p2 = (psnr(3.81e-6) - 54.19).abs();
    verdict(
        "criterion 3 (distortion budget)",
        worst_rel <= BUDGET_REL_TOL
            && p1 <= PSNR_POINT_TOL
            && p2 <= PSNR_POINT_TOL
            && psnr(0.0).is_infinite(),
        &format!(
            "100 trials, worst relative budget error {worst_rel:.3e} (tol {BUDGET_REL_TOL:.0e}); psnr points off by {p1:.4}/{p2:.4} dB (tol {PSNR_POINT_TOL}); psnr(0)=inf"
        ),
    );
}

#[test]
fn criterion_4_capacity() {
    let cover = pseudo_lena(512);
    let single = capacity_bits(&cover, (64, 64), false).unwrap();
    let nested = capacity_bits(&cover, (64, 64), true).unwrap();
    let oversized = capacity_bits(&cover, (300, 300), false);
    verdict(
        "criterion 4 (capacity)",
        single == 4096
            && nested == 8192
            && matches!(oversized, Err(Error::WatermarkTooLarge { .. })),
        &format!("64x64 in 512x512: {single} bits plain, {nested} nested; 300x300 rejected"),
    );
}

#[test]
fn criterion_5a_attacks_deterministic_and_bounded() {
    let (cover, logo, secondary, params) = standard_setup();
    let nested = nest_watermarks(&logo, &secondary, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params)
        .unwrap()
        .clamped();
    let small = pseudo_lena(128);
    let mut all_ok = true;
    let mut detail = String::new();
    for spec in AttackSpec::default_matrix(SEED) {
        for img in [&marked, &small] {
            let once = apply_attack(img, &spec).unwrap();
            let twice = apply_attack(img, &spec).unwrap();
            let deterministic = once == twice;
            let bounded = once.as_slice().iter().all(|v| (0.0..=1.0).contains(v));
            if !deterministic || !bounded {
                all_ok = false;
                detail.push_str(&format!(
                    " {}(det={deterministic},bounded={bounded})",
                    spec.name()
                ));
            }
        }
    }
    verdict(
        "criterion 5a (attacks deterministic, outputs in [0,1])",
        all_ok,
        &(if detail.is_empty() {
            "8 attacks, two images, repeated runs identical".to_string()
        } else {
            format!("violations:{detail}")
        }),
    );
}

#[test]
fn criterion_5b_noise_variance() {
    let flat = GrayImage::constant(128, 128, 0.5).unwrap();
    let spec = AttackSpec::GaussianNoise {
        mean: 0.0,
        variance: 0.001,
        seed: SEED,
    };
    let noisy = apply_attack(&flat, &spec).unwrap();
    let n = noisy.as_slice().len() as f64;
    let mean = noisy.as_slice().iter().map(|v| v - 0.5).sum::<f64>() / n;
    let var = noisy
        .as_slice()
        .iter()
        .map(|v| (v - 0.5 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let rel = (var - 0.001).abs() / 0.001;
    verdict(
        "criterion 5b (noise variance)",
        rel <= NOISE_VAR_REL_TOL,
        &format!("sample variance {var:.6} vs 0.001 (rel err {rel:.3}, tol {NOISE_VAR_REL_TOL})"),
    );
}

#[test]
fn criterion_5c_robustness_floor_and_runtime() {
    let (cover, logo, secondary, params) = standard_setup();
    let matrix = AttackSpec::default_matrix(SEED);
    let started = Instant::now();
    let report = build_report(
        &cover,
        &logo,
        &secondary,
        &params,
        &matrix,
        &ReportOptions::default(),
    )
    .unwrap();
    let elapsed = started.elapsed().as_secs_f64();

    let mut floor: f64 = 1.0;
    let mut weakest = String::new();
    for row in &report.attacks {
        let best = row.sr_ll.max(row.sr_hh);
        if best < floor {
            floor = best;
            weakest = row.attack.clone();
        }
    }

    // JPEG quality sweep: the LL channel has to hold across realistic
    // qualities, not just the matrix default.
    let sweep: Vec<(u8, f64)> = [50u8, 75, 90]
        .iter()
        .map(|&quality| {
            let r = build_report(
                &cover,
                &logo,
                &secondary,
                &params,
                &[AttackSpec::JpegCompress { quality }],
                &ReportOptions::default(),
            )
            .unwrap();
            (quality, r.attacks[0].sr_ll)
        })
        .collect();
    let sweep_ok = sweep.iter().all(|(_, sr)| *sr >= ATTACK_SR_MIN);
    let sweep_text = sweep
        .iter()
        .map(|(q, sr)| format!("q{q}={sr:.4}"))
        .collect::<Vec<_>>()
        .join(" ");

    verdict(
        "criterion 5c (per-attack similarity floor, runtime)",
        floor >= ATTACK_SR_MIN && sweep_ok && elapsed < EVALUATE_TIME_BUDGET_SECS,
        &format!(
            "weakest attack {weakest} best-band SR {floor:.4} (min {ATTACK_SR_MIN}); jpeg LL sweep {sweep_text}; evaluation took {elapsed:.2}s (budget {EVALUATE_TIME_BUDGET_SECS}s)"
        ),
    );
}

#[test]
fn criterion_5d_band_pattern() {
    let (cover, logo, secondary, params) = standard_setup();
    let report = build_report(
        &cover,
        &logo,
        &secondary,
        &params,
        &AttackSpec::default_matrix(SEED),
        &ReportOptions::default(),
    )
    .unwrap();
    let band_of = |name: &str| {
        report
            .attacks
            .iter()
            .find(|r| r.attack == name)
            .map(|r| r.best_band)
            .unwrap()
    };
    // Soft notes for texture-dependent rows; hard expectations only where
    // the mechanism forces the winner: JPEG discards high frequencies (LL
    // carries), histogram equalization remaps tones globally (HH carries).
    for note in report.band_pattern_deviations() {
        println!("criterion 5d note: {note}");
    }
    let jpeg = band_of("jpeg_compress");
    let histeq = band_of("hist_eq");
    verdict(
        "criterion 5d (band survival pattern)",
        jpeg == Band::Ll && histeq == Band::Hh,
        &format!("jpeg_compress best {jpeg} (want LL), hist_eq best {histeq} (want HH)"),
    );
}

#[test]
fn criterion_6_determinism() {
    let (cover, logo, secondary, params) = standard_setup();
    let matrix = AttackSpec::default_matrix(SEED);
    let mut renders = Vec::new();
    for parallel in [false, false, true] {
        let report = build_report(
            &cover,
            &logo,
            &secondary,
            &params,
            &matrix,
            &ReportOptions {
                parallel,
                ..ReportOptions::default()
            },
        )
        .unwrap();
        renders.push((report.to_csv(), report.to_json().unwrap()));
    }
    let all_equal = renders.windows(2).all(|w| w[0] == w[1]);
    verdict(
        "criterion 6 (report determinism)",
        all_equal,
        &format!(
            "serial x2 + parallel x1 renders byte-identical: {} bytes CSV, {} bytes JSON",
            renders[0].0.len(),
            renders[0].1.len()
        ),
    );
}

#[test]
fn criterion_7_literal_divisor_identity() {
    let (cover, logo, secondary, params) = standard_setup();
    let nested = nest_watermarks(&logo, &secondary, &params).unwrap();
    let marked = embed_into_cover(&cover, &nested.image, &params).unwrap();
    let correct = extract_watermark(&marked, &cover, 64, 64, &params).unwrap();
    let literal = extract_with_divisors(&marked, &cover, 64, 64, &params, 3.0, 1.0).unwrap();

    // Dividing the same band difference by 3 instead of alpha_ll scales every
    // LL sample by exactly alpha_ll/3 (and HH by alpha_hh/1).
    let mut worst: f64 = 0.0;
    for (lit, corr) in literal
        .ll_estimate
        .as_slice()
        .iter()
        .zip(correct.ll_estimate.as_slice())
    {
        worst = worst.max((lit * 3.0 - corr * params.alpha_ll).abs());
    }
    for (lit, corr) in literal
        .hh_estimate
        .as_slice()
        .iter()
        .zip(correct.hh_estimate.as_slice())
    {
        worst = worst.max((lit * 1.0 - corr * params.alpha_hh).abs());
    }
    let scale = params.alpha_ll / 3.0;
    verdict(
        "criterion 7 (literal divisor substitution)",
        worst <= LITERAL_TOL,
        &format!(
            "LL estimates shrink by exactly alpha_ll/3 = {scale:.6}; worst product mismatch {worst:.3e} (tol {LITERAL_TOL:.0e})"
        ),
    );
}
