//! Robustness evaluation: run an attack matrix against a watermarked cover
//! and tabulate PSNR plus per-band similarity ratios.
//!
//! The pipeline is `nest -> embed -> clamp -> attack -> extract -> score`,
//! all in f64; nothing here quantizes the marked image to 8 bits, so the
//! table isolates attack damage from storage effects. Rows keep the matrix
//! order regardless of `parallel`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{apply_attack, AttackSpec};
use crate::embedder::{embed_into_cover, nest_watermarks, EmbedParams};
use crate::error::{Error, Result};
use crate::extractor::{extract_watermark, extract_with_divisors};
use crate::imageio::GrayImage;
use crate::metrics::{mse, psnr, psnr_between, similarity_ratio, SrMode};

pub const REPORT_SCHEMA: &str = "wavemark-report/1";

/// Divisors a strict reading of the source protocol uses in place of the
/// embedding strengths; kept for side-by-side columns.
pub const LITERAL_DIVISOR_LL: f64 = 3.0;
pub const LITERAL_DIVISOR_HH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "LL")]
    Ll,
    #[serde(rename = "HH")]
    Hh,
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Band::Ll => write!(f, "LL"),
            Band::Hh => write!(f, "HH"),
        }
    }
}

/// dB values can be `+inf` (zero MSE); JSON gets the string `"inf"` there
/// since JSON numbers cannot express it.
pub mod db_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!("bad dB value {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub attack: String,
    pub params: String,
    /// PSNR between the clean cover and the attacked marked image.
    #[serde(with = "db_serde")]
    pub psnr_db: f64,
    pub sr_ll: f64,
    pub sr_hh: f64,
    pub best_band: Band,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sr_ll_paperalpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sr_hh_paperalpha: Option<f64>,
}

/// PSNR1/MSE1 score the nesting distortion (primary vs nested watermark);
/// PSNR2/MSE2 score the embedding distortion (cover vs marked image).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityBlock {
    #[serde(with = "db_serde")]
    pub psnr1_db: f64,
    pub mse1: f64,
    #[serde(with = "db_serde")]
    pub psnr2_db: f64,
    pub mse2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema: String,
    pub embed: EmbedParams,
    pub sr_mode: SrMode,
    pub seed: u64,
    pub wm_width: usize,
    pub wm_height: usize,
    pub paper_literal_alphas: bool,
    pub fidelity: FidelityBlock,
    pub attacks: Vec<AttackRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub sr_mode: SrMode,
    pub paper_literal_alphas: bool,
    pub parallel: bool,
    /// Echoed into the report; the attack matrix itself already carries any
    /// RNG seeds.
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            sr_mode: SrMode::Binary { threshold: 0.5 },
            paper_literal_alphas: false,
            parallel: false,
            seed: 42,
        }
    }
}

pub fn build_report(
    cover: &GrayImage,
    primary: &GrayImage,
    secondary: &GrayImage,
    params: &EmbedParams,
    matrix: &[AttackSpec],
    opts: &ReportOptions,
) -> Result<EvaluationReport> {
    params.validate()?;
    let nested = nest_watermarks(primary, secondary, params)?;
    let payload = &nested.image;

    let mse1 = mse(primary, payload)?;
    let marked = embed_into_cover(cover, payload, params)?.clamped();
    let mse2 = mse(cover, &marked)?;
    let fidelity = FidelityBlock {
        psnr1_db: psnr(mse1),
        mse1,
        psnr2_db: psnr(mse2),
        mse2,
    };

    let run_row = |spec: &AttackSpec| -> Result<AttackRow> {
        let attacked = apply_attack(&marked, spec)?;
        let psnr_db = psnr_between(cover, &attacked)?;
        let extraction =
            extract_watermark(&attacked, cover, payload.width(), payload.height(), params)?;
        let sr_ll = similarity_ratio(&extraction.ll_estimate, payload, opts.sr_mode)?;
        let sr_hh = similarity_ratio(&extraction.hh_estimate, payload, opts.sr_mode)?;
        let (sr_ll_paperalpha, sr_hh_paperalpha) = if opts.paper_literal_alphas {
            let literal = extract_with_divisors(
                &attacked,
                cover,
                payload.width(),
                payload.height(),
                params,
                LITERAL_DIVISOR_LL,
                LITERAL_DIVISOR_HH,
            )?;
            (
                Some(similarity_ratio(
                    &literal.ll_estimate,
                    payload,
                    opts.sr_mode,
                )?),
                Some(similarity_ratio(
                    &literal.hh_estimate,
                    payload,
                    opts.sr_mode,
                )?),
            )
        } else {
            (None, None)
        };
        Ok(AttackRow {
            attack: spec.name().to_string(),
            params: spec.params_summary(),
            psnr_db,
            best_band: if sr_ll >= sr_hh { Band::Ll } else { Band::Hh },
            sr_ll,
            sr_hh,
            sr_ll_paperalpha,
            sr_hh_paperalpha,
        })
    };

    let attacks: Vec<AttackRow> = if opts.parallel {
        matrix.par_iter().map(run_row).collect::<Result<_>>()?
    } else {
        matrix.iter().map(run_row).collect::<Result<_>>()?
    };

    Ok(EvaluationReport {
        schema: REPORT_SCHEMA.to_string(),
        embed: *params,
        sr_mode: opts.sr_mode,
        seed: opts.seed,
        wm_width: payload.width(),
        wm_height: payload.height(),
        paper_literal_alphas: opts.paper_literal_alphas,
        fidelity,
        attacks,
    })
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

impl EvaluationReport {
    /// Attack table as CSV. The header is part of the output contract:
    /// `attack,params,psnr_db,sr_ll,sr_hh,best_band`, extended with
    /// `sr_ll_paperalpha,sr_hh_paperalpha` when those columns were computed.
    /// `params` summaries are comma-free by construction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attack,params,psnr_db,sr_ll,sr_hh,best_band");
        if self.paper_literal_alphas {
            out.push_str(",sr_ll_paperalpha,sr_hh_paperalpha");
        }
        out.push('\n');
        for row in &self.attacks {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{}",
                row.attack,
                row.params,
                fmt_db(row.psnr_db),
                row.sr_ll,
                row.sr_hh,
                row.best_band
            ));
            if self.paper_literal_alphas {
                out.push_str(&format!(
                    ",{:.6},{:.6}",
                    row.sr_ll_paperalpha.unwrap_or(f64::NAN),
                    row.sr_hh_paperalpha.unwrap_or(f64::NAN)
                ));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<EvaluationReport> {
        let report: EvaluationReport = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("report parse failed: {e}")))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported report schema {:?}, expected {REPORT_SCHEMA:?}",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Robustness report\n\n");
        out.push_str(&format!(
            "- wavelet: {}\n- alpha_ll: {}\n- alpha_hh: {}\n- alpha_nest: {}\n",
            self.embed.wavelet, self.embed.alpha_ll, self.embed.alpha_hh, self.embed.alpha_nest
        ));
        out.push_str(&format!(
            "- watermark: {}x{} at offset ({}, {})\n- SR mode: {}\n- seed: {}\n\n",
            self.wm_width,
            self.wm_height,
            self.embed.offset_row,
            self.embed.offset_col,
            self.sr_mode,
            self.seed
        ));
        out.push_str("## Fidelity\n\n");
        out.push_str("| metric | value |\n|---|---|\n");
        out.push_str(&format!(
            "| PSNR1 (primary vs nested) | {} dB |\n",
            fmt_db(self.fidelity.psnr1_db)
        ));
        out.push_str(&format!("| MSE1 | {:.3e} |\n", self.fidelity.mse1));
        out.push_str(&format!(
            "| PSNR2 (cover vs marked) | {} dB |\n",
            fmt_db(self.fidelity.psnr2_db)
        ));
        out.push_str(&format!("| MSE2 | {:.3e} |\n\n", self.fidelity.mse2));
        out.push_str("## Attacks\n\n");
        if self.paper_literal_alphas {
            out.push_str(
                "| attack | params | PSNR (dB) | SR LL | SR HH | best | SR LL (literal) | SR HH (literal) |\n",
            );
            out.push_str("|---|---|---|---|---|---|---|---|\n");
        } else {
            out.push_str("| attack | params | PSNR (dB) | SR LL | SR HH | best |\n");
            out.push_str("|---|---|---|---|---|---|\n");
        }
        for row in &self.attacks {
            out.push_str(&format!(
                "| {} | {} | {} | {:.4} | {:.4} | {} |",
                row.attack,
                row.params,
                fmt_db(row.psnr_db),
                row.sr_ll,
                row.sr_hh,
                row.best_band
            ));
            if self.paper_literal_alphas {
                out.push_str(&format!(
                    " {:.4} | {:.4} |",
                    row.sr_ll_paperalpha.unwrap_or(f64::NAN),
                    row.sr_hh_paperalpha.unwrap_or(f64::NAN)
                ));
            }
            out.push('\n');
        }
        out
    }

    /// Soft consistency check of the band-survival pattern: smoothing-type
    /// attacks should leave LL the better channel, point-wise tone remaps
    /// HH. Returns one message per row that deviates; attacks without an
    /// expectation are skipped.
    pub fn band_pattern_deviations(&self) -> Vec<String> {
        self.attacks
            .iter()
            .filter_map(|row| {
                let expected = match row.attack.as_str() {
                    "jpeg_compress" | "low_pass" | "high_pass" | "gaussian_noise" | "resize" => {
                        Band::Ll
                    }
                    "hist_eq" | "intensity_adjust" | "gamma_correction" => Band::Hh,
                    _ => return None,
                };
                (row.best_band != expected).then(|| {
                    format!(
                        "{}: best band {} (sr_ll={:.4}, sr_hh={:.4}), expected {}",
                        row.attack, row.best_band, row.sr_ll, row.sr_hh, expected
                    )
                })
            })
            .collect()
    }
}
