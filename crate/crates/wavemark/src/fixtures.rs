//! Procedural test fixtures.
//!
//! The toolkit ships no photographs; instead the `fixtures` subcommand
//! synthesizes a deterministic cover texture plus two binary logos. The cover
//! is a smooth superposition of long-period sinusoids: mid-tone dominant,
//! little high-frequency energy, snapped to the 1/255 grid so the in-memory
//! fixture is identical to its own 8-bit file round trip.

use std::f64::consts::TAU;

use crate::imageio::GrayImage;

/// Smooth synthetic cover texture (natural-image stand-in).
pub fn pseudo_lena(n: usize) -> GrayImage {
    let nf = n as f64;
    let img = GrayImage::from_fn(n, n, |r, c| {
        let x = c as f64;
        let y = r as f64;
        let dx = x - 0.37 * nf;
        let dy = y - 0.61 * nf;
        let radius = (dx * dx + dy * dy).sqrt();
        0.44 + 0.10 * ((x + y) / (2.0 * nf) - 0.5)
            + 0.16 * (TAU * x / 97.0 + 2.3 * (TAU * y / 181.0).sin()).sin()
            + 0.12 * (TAU * y / 139.0 + 1.9 * (TAU * x / 167.0).cos()).cos()
            + 0.07 * (TAU * (x + y) / 211.0).sin()
            + 0.05 * (TAU * radius / 127.0).cos()
            + 0.02 * (TAU * x / 29.0).sin() * (TAU * y / 31.0).cos()
    })
    .expect("valid dimensions")
    .map(|v| v.clamp(0.02, 0.95));
    img.quantized()
}

const PRIMARY_MASK: [u8; 8] = [
    0b1111_1111,
    0b1000_0001,
    0b1010_0101,
    0b1010_0101,
    0b1001_1001,
    0b1011_1101,
    0b1000_0001,
    0b1111_1111,
];

const SECONDARY_MASK: [u8; 8] = [
    0b0001_1000,
    0b0011_1100,
    0b0110_0110,
    0b1100_0011,
    0b1100_0011,
    0b0110_0110,
    0b0011_1100,
    0b0001_1000,
];

fn scaled_mask(mask: &[u8; 8], n: usize) -> GrayImage {
    GrayImage::from_fn(n, n, |r, c| {
        let mr = r * 8 / n;
        let mc = c * 8 / n;
        if mask[mr] >> (7 - mc) & 1 == 1 {
            1.0
        } else {
            0.0
        }
    })
    .expect("valid dimensions")
}

/// Binary primary logo (frame and glyph, strokes of n/8 pixels).
pub fn primary_logo(n: usize) -> GrayImage {
    scaled_mask(&PRIMARY_MASK, n)
}

/// Binary secondary logo (diamond outline).
pub fn secondary_logo(n: usize) -> GrayImage {
    scaled_mask(&SECONDARY_MASK, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(pseudo_lena(64), pseudo_lena(64));
        assert_eq!(primary_logo(64), primary_logo(64));
        assert_eq!(secondary_logo(32), secondary_logo(32));
    }

    #[test]
    fn logos_are_binary_and_chunky() {
        for (img, n) in [(primary_logo(64), 64), (secondary_logo(32), 32)] {
            let mut ink = 0usize;
            for &v in img.as_slice() {
                assert!(v == 0.0 || v == 1.0);
                ink += (v == 1.0) as usize;
            }
            let frac = ink as f64 / (n * n) as f64;
            assert!((0.15..=0.6).contains(&frac), "ink fraction {frac}");
            // Strokes are n/8 pixels wide by construction: every ink pixel
            // belongs to a solid (n/8) x (n/8) cell.
            let cell = n / 8;
            for r in 0..n {
                for c in 0..n {
                    let anchor = img.get(r / cell * cell, c / cell * cell);
                    assert_eq!(img.get(r, c), anchor);
                }
            }
        }
    }

    #[test]
    fn cover_is_mid_tone_smooth_and_on_grid() {
        let img = pseudo_lena(512);
        let slice = img.as_slice();
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        assert!((0.3..=0.6).contains(&mean), "mean {mean}");
        for &v in slice {
            assert!((0.0..=1.0).contains(&v));
            let scaled = v * 255.0;
            assert!(
                (scaled - scaled.round()).abs() < 1e-9,
                "off-grid sample {v}"
            );
        }
        // Smoothness: neighboring pixels move by a couple of gray levels on
        // average, not by jumps.
        let mut grad_sum = 0.0;
        let mut count = 0u64;
        for r in 0..512 {
            for c in 1..512 {
                grad_sum += (img.get(r, c) - img.get(r, c - 1)).abs();
                count += 1;
            }
        }
        let mean_grad = grad_sum / count as f64;
        assert!(mean_grad < 0.02, "mean horizontal gradient {mean_grad}");
    }

    #[test]
    fn cover_leaves_embedding_headroom() {
        // Embedding at default strengths moves a pixel by at most ~0.05;
        // the texture keeps away from both rails.
        let img = pseudo_lena(512);
        let lo = img.as_slice().iter().copied().fold(f64::MAX, f64::min);
        let hi = img.as_slice().iter().copied().fold(f64::MIN, f64::max);
        // Clamp rails 0.02 / 0.95 land on bytes 5 and 242 after snapping.
        assert!(lo >= 5.0 / 255.0 - 1e-12, "lo {lo}");
        assert!(hi <= 242.0 / 255.0 + 1e-12, "hi {hi}");
    }
}
