//! Single-level 2D discrete wavelet transform with orthonormal filter banks.
//!
//! Boundary handling is periodization (circular indexing), which keeps the
//! transform an orthogonal map: round trips reconstruct exactly and energy is
//! preserved (Parseval), both of which the embedding algebra depends on.
//!
//! Subband layout for an `h x w` input, all planes `h/2 x w/2`:
//! `ca` low/low (approximation), `ch` horizontal detail (row lowpass, column
//! highpass), `cv` vertical detail (row highpass, column lowpass), `cd`
//! diagonal detail. The frozen sign convention on a 2x2 `[[a,b],[c,d]]` under
//! Haar is `ca=(a+b+c+d)/2`, `ch=(a+b-c-d)/2`, `cv=(a-b+c-d)/2`,
//! `cd=(a-b-c+d)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// Supported orthonormal wavelets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WaveletKind {
    #[default]
    Haar,
    /// Four-tap Daubechies filter (db2).
    #[serde(rename = "db2")]
    Daubechies4,
}

impl std::fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WaveletKind::Haar => write!(f, "haar"),
            WaveletKind::Daubechies4 => write!(f, "db2"),
        }
    }
}

impl std::str::FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletKind::Haar),
            "db2" => Ok(WaveletKind::Daubechies4),
            other => Err(Error::InvalidParam(format!(
                "unknown wavelet {other:?}, expected haar or db2"
            ))),
        }
    }
}

impl WaveletKind {
    /// Analysis lowpass taps. The highpass is the quadrature mirror
    /// `g[n] = (-1)^n h[L-1-n]`.
    pub fn lowpass(&self) -> Vec<f64> {
        match self {
            WaveletKind::Haar => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![s, s]
            }
            WaveletKind::Daubechies4 => {
                let s3 = 3.0f64.sqrt();
                let norm = 4.0 * 2.0f64.sqrt();
                vec![
                    (1.0 + s3) / norm,
                    (3.0 + s3) / norm,
                    (3.0 - s3) / norm,
                    (1.0 - s3) / norm,
                ]
            }
        }
    }

    pub fn highpass(&self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[l - 1 - n]
            })
            .collect()
    }
}

/// A coefficient matrix. Unlike [`GrayImage`] it has no minimum size and no
/// nominal sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Plane {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MismatchedPlanes(format!(
                "expected {} values for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Plane { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

impl From<&GrayImage> for Plane {
    fn from(img: &GrayImage) -> Self {
        Plane {
            rows: img.height(),
            cols: img.width(),
            data: img.as_slice().to_vec(),
        }
    }
}

/// The four subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub ca: Plane,
    pub ch: Plane,
    pub cv: Plane,
    pub cd: Plane,
}

impl SubbandSet {
    /// Common plane dimensions, or `MismatchedPlanes` if the four disagree.
    pub fn dims(&self) -> Result<(usize, usize)> {
        let d = self.ca.dims();
        for (name, plane) in [("ch", &self.ch), ("cv", &self.cv), ("cd", &self.cd)] {
            if plane.dims() != d {
                return Err(Error::MismatchedPlanes(format!(
                    "ca is {}x{} but {name} is {}x{}",
                    d.0,
                    d.1,
                    plane.dims().0,
                    plane.dims().1
                )));
            }
        }
        Ok(d)
    }
}

/// One analysis step: `lo[k] = sum_n h[n] x[(2k+n) mod N]`, same for `hi`
/// with `g`.
fn forward_1d(x: &[f64], h: &[f64], g: &[f64], lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    for k in 0..n / 2 {
        let mut a = 0.0;
        let mut d = 0.0;
        for (i, (&hc, &gc)) in h.iter().zip(g.iter()).enumerate() {
            let v = x[(2 * k + i) % n];
            a += hc * v;
            d += gc * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

/// Synthesis adjoint of [`forward_1d`]: scatter each coefficient back through
/// its (periodized) basis vector.
fn inverse_1d(lo: &[f64], hi: &[f64], h: &[f64], g: &[f64], x: &mut [f64]) {
    let n = x.len();
    x.fill(0.0);
    for k in 0..lo.len() {
        let (a, d) = (lo[k], hi[k]);
        for (i, (&hc, &gc)) in h.iter().zip(g.iter()).enumerate() {
            x[(2 * k + i) % n] += a * hc + d * gc;
        }
    }
}

/// Single-level 2D analysis. Both image sides must be even.
pub fn dwt2(img: &GrayImage, kind: WaveletKind) -> Result<SubbandSet> {
    let (w, h) = (img.width(), img.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::OddDimensions {
            width: w,
            height: h,
        });
    }
    let hf = kind.lowpass();
    let gf = kind.highpass();
    let (half_w, half_h) = (w / 2, h / 2);

    // Row pass, along the width.
    let mut row_lo = Plane::zeros(h, half_w);
    let mut row_hi = Plane::zeros(h, half_w);
    let mut lo_buf = vec![0.0; half_w];
    let mut hi_buf = vec![0.0; half_w];
    for r in 0..h {
        let row = &img.as_slice()[r * w..(r + 1) * w];
        forward_1d(row, &hf, &gf, &mut lo_buf, &mut hi_buf);
        for c in 0..half_w {
            row_lo.set(r, c, lo_buf[c]);
            row_hi.set(r, c, hi_buf[c]);
        }
    }

    // Column pass, along the height.
    let mut ca = Plane::zeros(half_h, half_w);
    let mut ch = Plane::zeros(half_h, half_w);
    let mut cv = Plane::zeros(half_h, half_w);
    let mut cd = Plane::zeros(half_h, half_w);
    let mut col = vec![0.0; h];
    let mut lo_col = vec![0.0; half_h];
    let mut hi_col = vec![0.0; half_h];
    for c in 0..half_w {
        for (r, slot) in col.iter_mut().enumerate() {
            *slot = row_lo.get(r, c);
        }
        forward_1d(&col, &hf, &gf, &mut lo_col, &mut hi_col);
        for r in 0..half_h {
            ca.set(r, c, lo_col[r]);
            ch.set(r, c, hi_col[r]);
        }
        for (r, slot) in col.iter_mut().enumerate() {
            *slot = row_hi.get(r, c);
        }
        forward_1d(&col, &hf, &gf, &mut lo_col, &mut hi_col);
        for r in 0..half_h {
            cv.set(r, c, lo_col[r]);
            cd.set(r, c, hi_col[r]);
        }
    }

    Ok(SubbandSet { ca, ch, cv, cd })
}

/// Single-level 2D synthesis. The output is not clamped.
pub fn idwt2(bands: &SubbandSet, kind: WaveletKind) -> Result<GrayImage> {
    let (half_h, half_w) = bands.dims()?;
    let (h, w) = (half_h * 2, half_w * 2);
    let hf = kind.lowpass();
    let gf = kind.highpass();

    // Column synthesis back to the row-pass intermediates.
    let mut row_lo = Plane::zeros(h, half_w);
    let mut row_hi = Plane::zeros(h, half_w);
    let mut lo_col = vec![0.0; half_h];
    let mut hi_col = vec![0.0; half_h];
    let mut col = vec![0.0; h];
    for c in 0..half_w {
        for (r, (lo, hi)) in lo_col.iter_mut().zip(hi_col.iter_mut()).enumerate() {
            *lo = bands.ca.get(r, c);
            *hi = bands.ch.get(r, c);
        }
        inverse_1d(&lo_col, &hi_col, &hf, &gf, &mut col);
        for (r, &v) in col.iter().enumerate() {
            row_lo.set(r, c, v);
        }
        for (r, (lo, hi)) in lo_col.iter_mut().zip(hi_col.iter_mut()).enumerate() {
            *lo = bands.cv.get(r, c);
            *hi = bands.cd.get(r, c);
        }
        inverse_1d(&lo_col, &hi_col, &hf, &gf, &mut col);
        for (r, &v) in col.iter().enumerate() {
            row_hi.set(r, c, v);
        }
    }

    // Row synthesis back to pixels.
    let mut data = vec![0.0; w * h];
    let mut lo_buf = vec![0.0; half_w];
    let mut hi_buf = vec![0.0; half_w];
    let mut row = vec![0.0; w];
    for r in 0..h {
        for c in 0..half_w {
            lo_buf[c] = row_lo.get(r, c);
            hi_buf[c] = row_hi.get(r, c);
        }
        inverse_1d(&lo_buf, &hi_buf, &hf, &gf, &mut row);
        data[r * w..(r + 1) * w].copy_from_slice(&row);
    }
    GrayImage::new(w, h, data)
}
