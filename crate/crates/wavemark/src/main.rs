//! Command-line front end. Subcommands mirror the library pipeline: generate
//! fixtures, embed, attack, extract, or run the whole evaluation in one go.
//!
//! Exit codes: 0 success, 2 bad input (missing file, bad parameter or
//! config), 3 processing failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wavemark::attacks::{apply_attack, AttackSpec};
use wavemark::config::{ReportFormat, RunConfig};
use wavemark::embedder::{embed_into_cover, nest_watermarks, EmbedParams};
use wavemark::error::{Error, Result};
use wavemark::extractor::{denest_secondary, extract_watermark};
use wavemark::fixtures::{primary_logo, pseudo_lena, secondary_logo};
use wavemark::imageio::{load_image, resize, save_image, GrayImage, ResizeMethod};
use wavemark::metrics::{mse, psnr, psnr_between, similarity_ratio, SrMode};
use wavemark::report::{build_report, db_serde, EvaluationReport, FidelityBlock, ReportOptions};
use wavemark::wavelet::WaveletKind;

#[derive(Parser)]
#[command(
    name = "wavemark",
    version,
    about = "Nested DWT watermarking: embed, attack, extract, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nest two watermarks and embed them into a cover image.
    Embed(EmbedArgs),
    /// Recover watermark estimates from a suspect image.
    Extract(ExtractArgs),
    /// Apply a single attack to an image.
    Attack(AttackArgs),
    /// Run an attack matrix against a config's inputs and write reports.
    Evaluate(EvaluateArgs),
    /// Generate deterministic sample images and a starter config.
    Fixtures(FixturesArgs),
    /// Re-render an existing JSON report as CSV and markdown.
    Report(ReportArgs),
}

#[derive(Args)]
struct EmbedFlags {
    /// Wavelet family: haar or db2.
    #[arg(long, default_value_t = WaveletKind::Haar)]
    wavelet: WaveletKind,
    #[arg(long, default_value_t = EmbedParams::default().alpha_ll)]
    alpha_ll: f64,
    #[arg(long, default_value_t = EmbedParams::default().alpha_hh)]
    alpha_hh: f64,
    #[arg(long, default_value_t = EmbedParams::default().alpha_nest)]
    alpha_nest: f64,
    /// Window placement inside the carrier bands, in coefficients.
    #[arg(long, default_value_t = 0)]
    offset_row: usize,
    #[arg(long, default_value_t = 0)]
    offset_col: usize,
}

impl EmbedFlags {
    fn to_params(&self) -> EmbedParams {
        EmbedParams {
            wavelet: self.wavelet,
            alpha_ll: self.alpha_ll,
            alpha_hh: self.alpha_hh,
            alpha_nest: self.alpha_nest,
            offset_row: self.offset_row,
            offset_col: self.offset_col,
        }
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    primary: PathBuf,
    #[arg(long)]
    secondary: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Bilinear-resize the secondary to half the primary's size if needed.
    #[arg(long)]
    resize_secondary: bool,
    #[command(flatten)]
    flags: EmbedFlags,
}

#[derive(Args)]
struct ExtractArgs {
    /// Possibly-attacked marked image.
    #[arg(long)]
    suspect: PathBuf,
    /// Clean cover the suspect is compared against.
    #[arg(long)]
    cover: PathBuf,
    /// Original primary watermark; sets the window size and enables
    /// denesting.
    #[arg(long)]
    primary: PathBuf,
    /// Original secondary watermark; when given, estimates are scored
    /// against the reconstructed nested payload.
    #[arg(long)]
    secondary: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, requires = "secondary")]
    resize_secondary: bool,
    #[command(flatten)]
    flags: EmbedFlags,
    /// Similarity scoring rule: binary or exact8bit.
    #[arg(long, default_value = "binary")]
    sr_mode: String,
    /// Classification threshold for binary scoring.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    image: PathBuf,
    /// Attack spec: inline JSON (e.g. '{"kind":"hist_eq"}') or a path to a
    /// JSON file.
    #[arg(long)]
    spec: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override quality on every jpeg_compress entry in the matrix.
    #[arg(long)]
    jpeg_quality: Option<u8>,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the config's wavelet: haar or db2.
    #[arg(long)]
    wavelet: Option<WaveletKind>,
    /// Evaluate attack rows on a thread pool.
    #[arg(long)]
    parallel: bool,
    /// Add side-by-side columns extracted with the fixed divisors 3 and 1.
    #[arg(long)]
    paper_literal_alphas: bool,
    #[arg(long)]
    resize_secondary: bool,
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long, default_value = "fixtures")]
    out: PathBuf,
    /// Cover side length (even).
    #[arg(long, default_value_t = 512)]
    size: usize,
    /// Primary watermark side length (multiple of 8, at most size/2); the
    /// secondary is half this.
    #[arg(long, default_value_t = 64)]
    wm_size: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Existing report.json.
    #[arg(long)]
    json: PathBuf,
    /// Output directory; defaults to the JSON file's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Fixtures(args) => cmd_fixtures(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

fn print_warnings(params: &EmbedParams) {
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
}

/// Halve-or-reject policy for the secondary watermark's size.
fn prepare_secondary(
    secondary: GrayImage,
    primary: &GrayImage,
    resize_flag: bool,
) -> Result<GrayImage> {
    if !resize_flag {
        return Ok(secondary);
    }
    let (w, h) = (primary.width() / 2, primary.height() / 2);
    if secondary.width() == w && secondary.height() == h {
        return Ok(secondary);
    }
    resize(&secondary, w, h, ResizeMethod::Bilinear)
}

fn parse_sr_mode(mode: &str, threshold: f64) -> Result<SrMode> {
    match mode {
        "exact8bit" => Ok(SrMode::Exact8Bit),
        "binary" => Ok(SrMode::Binary { threshold }),
        other => Err(Error::InvalidParam(format!(
            "unknown SR mode {other:?}, expected binary or exact8bit"
        ))),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn save_and_log(path: &Path, img: &GrayImage) -> Result<()> {
    save_image(path, img)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let params = args.flags.to_params();
    params.validate()?;
    print_warnings(&params);
    let cover = load_image(&args.cover)?;
    let primary = load_image(&args.primary)?;
    let secondary = prepare_secondary(
        load_image(&args.secondary)?,
        &primary,
        args.resize_secondary,
    )?;

    let nested = nest_watermarks(&primary, &secondary, &params)?;
    let marked = embed_into_cover(&cover, &nested.image, &params)?.clamped();
    let mse1 = mse(&primary, &nested.image)?;
    let mse2 = mse(&cover, &marked)?;
    let fidelity = FidelityBlock {
        psnr1_db: psnr(mse1),
        mse1,
        psnr2_db: psnr(mse2),
        mse2,
    };

    fs::create_dir_all(&args.out)?;
    save_and_log(&args.out.join("watermarked.pgm"), &marked)?;
    save_and_log(&args.out.join("nested.pgm"), &nested.image)?;
    let mut json = serde_json::to_string_pretty(&fidelity)
        .map_err(|e| Error::Config(format!("fidelity serialization failed: {e}")))?;
    json.push('\n');
    write_text(&args.out.join("fidelity.json"), &json)?;
    println!(
        "PSNR1 (primary vs nested): {} dB",
        fmt_db(fidelity.psnr1_db)
    );
    println!("PSNR2 (cover vs marked): {} dB", fmt_db(fidelity.psnr2_db));
    Ok(())
}

#[derive(Serialize)]
struct ExtractionSummary {
    schema: &'static str,
    wm_width: usize,
    wm_height: usize,
    embed: EmbedParams,
    sr_mode: SrMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    sr_ll: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sr_hh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sr_secondary: Option<f64>,
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let params = args.flags.to_params();
    params.validate()?;
    print_warnings(&params);
    let mode = parse_sr_mode(&args.sr_mode, args.threshold)?;
    let suspect = load_image(&args.suspect)?;
    let cover = load_image(&args.cover)?;
    let primary = load_image(&args.primary)?;

    let result = extract_watermark(&suspect, &cover, primary.width(), primary.height(), &params)?;
    // The LL channel is the stronger carrier, so denesting reads from it.
    let secondary_estimate = denest_secondary(&result.ll_estimate, &primary, &params)?;

    let mut summary = ExtractionSummary {
        schema: "wavemark-extraction/1",
        wm_width: primary.width(),
        wm_height: primary.height(),
        embed: params,
        sr_mode: mode,
        sr_ll: None,
        sr_hh: None,
        sr_secondary: None,
    };
    if let Some(secondary_path) = &args.secondary {
        let secondary =
            prepare_secondary(load_image(secondary_path)?, &primary, args.resize_secondary)?;
        let nested = nest_watermarks(&primary, &secondary, &params)?;
        summary.sr_ll = Some(similarity_ratio(&result.ll_estimate, &nested.image, mode)?);
        summary.sr_hh = Some(similarity_ratio(&result.hh_estimate, &nested.image, mode)?);
        summary.sr_secondary = Some(similarity_ratio(&secondary_estimate, &secondary, mode)?);
    }

    fs::create_dir_all(&args.out)?;
    save_and_log(&args.out.join("extracted_ll.pgm"), &result.ll_rendered)?;
    save_and_log(&args.out.join("extracted_hh.pgm"), &result.hh_rendered)?;
    save_and_log(
        &args.out.join("secondary_estimate.pgm"),
        &secondary_estimate,
    )?;
    let mut json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    json.push('\n');
    write_text(&args.out.join("extraction.json"), &json)?;
    if let (Some(ll), Some(hh), Some(sec)) = (summary.sr_ll, summary.sr_hh, summary.sr_secondary) {
        println!("SR LL: {ll:.6}");
        println!("SR HH: {hh:.6}");
        println!("SR secondary: {sec:.6}");
    }
    Ok(())
}

#[derive(Serialize)]
struct AttackSummary {
    schema: &'static str,
    attack: String,
    params: String,
    #[serde(with = "db_serde")]
    psnr_db: f64,
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let spec_text = if args.spec.trim_start().starts_with('{') {
        args.spec.clone()
    } else {
        fs::read_to_string(Path::new(&args.spec)).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::FileNotFound(PathBuf::from(&args.spec))
            } else {
                Error::Io(e)
            }
        })?
    };
    let spec: AttackSpec = serde_json::from_str(&spec_text)
        .map_err(|e| Error::Config(format!("attack spec parse failed: {e}")))?;
    let img = load_image(&args.image)?;
    let attacked = apply_attack(&img, &spec)?;
    let psnr_db = psnr_between(&img, &attacked)?;

    fs::create_dir_all(&args.out)?;
    save_and_log(
        &args.out.join(format!("attacked_{}.pgm", spec.name())),
        &attacked,
    )?;
    let summary = AttackSummary {
        schema: "wavemark-attack/1",
        attack: spec.name().to_string(),
        params: spec.params_summary(),
        psnr_db,
    };
    let mut json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    json.push('\n');
    write_text(
        &args.out.join(format!("attack_{}.json", spec.name())),
        &json,
    )?;
    println!("{}: PSNR {} dB", spec.name(), fmt_db(psnr_db));
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.out_dir {
        config.out_dir = dir;
    }
    if let Some(wavelet) = args.wavelet {
        config.embed.wavelet = wavelet;
    }
    config.parallel |= args.parallel;
    config.paper_literal_alphas |= args.paper_literal_alphas;
    config.resize_secondary |= args.resize_secondary;
    config.embed.validate()?;
    print_warnings(&config.embed);

    let mut matrix = config.effective_attacks();
    if let Some(quality) = args.jpeg_quality {
        for spec in &mut matrix {
            if let AttackSpec::JpegCompress { quality: q } = spec {
                *q = quality;
            }
        }
    }
    for spec in &matrix {
        spec.validate()?;
    }

    let cover = load_image(&config.cover)?;
    let primary = load_image(&config.primary)?;
    let secondary = prepare_secondary(
        load_image(&config.secondary)?,
        &primary,
        config.resize_secondary,
    )?;

    let opts = ReportOptions {
        sr_mode: config.sr_mode,
        paper_literal_alphas: config.paper_literal_alphas,
        parallel: config.parallel,
        seed: config.seed,
    };
    let report = build_report(&cover, &primary, &secondary, &config.embed, &matrix, &opts)?;

    fs::create_dir_all(&config.out_dir)?;
    let nested = nest_watermarks(&primary, &secondary, &config.embed)?;
    let marked = embed_into_cover(&cover, &nested.image, &config.embed)?.clamped();
    save_and_log(&config.out_dir.join("watermarked.pgm"), &marked)?;
    for format in &config.report_formats {
        let text = match format {
            ReportFormat::Csv => report.to_csv(),
            ReportFormat::Json => report.to_json()?,
            ReportFormat::Markdown => report.to_markdown(),
        };
        write_text(&config.out_dir.join(format.file_name()), &text)?;
    }

    println!(
        "PSNR1 (primary vs nested): {} dB",
        fmt_db(report.fidelity.psnr1_db)
    );
    println!(
        "PSNR2 (cover vs marked): {} dB",
        fmt_db(report.fidelity.psnr2_db)
    );
    for row in &report.attacks {
        println!(
            "{}: PSNR {} dB, SR LL {:.4}, SR HH {:.4}, best {}",
            row.attack,
            fmt_db(row.psnr_db),
            row.sr_ll,
            row.sr_hh,
            row.best_band
        );
    }
    for note in report.band_pattern_deviations() {
        eprintln!("note: {note}");
    }
    Ok(())
}

fn cmd_fixtures(args: FixturesArgs) -> Result<()> {
    if args.size < 4 || !args.size.is_multiple_of(2) {
        return Err(Error::InvalidParam(format!(
            "size must be even and at least 4, got {}",
            args.size
        )));
    }
    if args.wm_size < 8 || !args.wm_size.is_multiple_of(8) || args.wm_size > args.size / 2 {
        return Err(Error::InvalidParam(format!(
            "wm_size must be a multiple of 8 no larger than size/2, got {}",
            args.wm_size
        )));
    }
    fs::create_dir_all(&args.out)?;
    let half = args.wm_size / 2;
    let cover_name = "pseudo_lena.pgm".to_string();
    let primary_name = format!("logo{}.pgm", args.wm_size);
    let secondary_name = format!("logo{half}.pgm");
    save_and_log(&args.out.join(&cover_name), &pseudo_lena(args.size))?;
    save_and_log(&args.out.join(&primary_name), &primary_logo(args.wm_size))?;
    save_and_log(&args.out.join(&secondary_name), &secondary_logo(half))?;
    let config = RunConfig::new(
        cover_name.into(),
        primary_name.into(),
        secondary_name.into(),
    );
    write_text(&args.out.join("config.json"), &config.to_json()?)?;
    println!(
        "try: wavemark evaluate --config {}",
        args.out.join("config.json").display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.json).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(args.json.clone())
        } else {
            Error::Io(e)
        }
    })?;
    let report = EvaluationReport::from_json(&text)?;
    let out = match args.out {
        Some(dir) => dir,
        None => args
            .json
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&out)?;
    write_text(&out.join("report.csv"), &report.to_csv())?;
    write_text(&out.join("report.md"), &report.to_markdown())?;
    Ok(())
}
