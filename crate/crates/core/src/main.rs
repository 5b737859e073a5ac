//! `nlm` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::warn;
use nlm_core::diagnostics::{expected_distance_check, PatchGeometry};
use nlm_core::experiment::{
    emit_csv, ingest_corpus, parse_d_values, run_decomposition_sweep_on, run_regularity_on,
    run_sweep_on, to_csv_string, CsvRecord, HRule, Settings, SweepSpec, Variant, STANDARD_VARIANTS,
};
use nlm_core::image::{add_gaussian_noise, load_image, psnr, save_image, Coord, NoiseSpec};
use nlm_core::nlm::{denoise, DenoiseConfig, DistanceSource, DEFAULT_TOP_K};
use nlm_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "nlm",
    version,
    about = "NL-means denoising and non-locality experiments"
)]
struct Cli {
    /// Plain-text `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (output is identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denoise one image.
    Denoise(DenoiseArgs),
    /// PSNR versus window radius for each variant over a corpus.
    Sweep(SweepArgs),
    /// Bias / variance / covariance split of the squared error.
    Decompose(SweepArgs),
    /// R(d) regularity curve of the clean images.
    Regularity(SweepArgs),
    /// Monte-Carlo check of the expected noisy patch distance.
    CheckExpectation(ExpectationArgs),
}

#[derive(Args, Debug, Default)]
struct EstimatorArgs {
    #[arg(long)]
    sigma: Option<f64>,
    /// Filtering parameter (defaults to sigma).
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    patch_radius: Option<usize>,
    /// Patch kernel std in pixels, or `inf` for a uniform kernel.
    #[arg(long)]
    a: Option<f64>,
    /// mirror | crop
    #[arg(long)]
    border: Option<String>,
    /// literal | max-other
    #[arg(long = "self")]
    self_weight: Option<String>,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    /// Input image. With --seed it is taken as the clean image and noise is added first.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output PGM.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clean image for oracle selection and PSNR reporting.
    #[arg(long)]
    oracle_image: Option<PathBuf>,
    /// Noise seed; enables synthetic corruption of --in.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the noisy input to this PGM.
    #[arg(long)]
    noisy_out: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    /// all | topk:K | thresh:T
    #[arg(long)]
    select: Option<String>,
    /// noisy | oracle
    #[arg(long)]
    source: Option<String>,
    /// include | exclude
    #[arg(long)]
    center: Option<String>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Directory of PGM/PNG images.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// CSV output (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Radii, e.g. `1..15` or `0,2,4`.
    #[arg(long)]
    d_values: Option<String>,
    /// Comma-separated variants: w, w_v, w_v0, w_u, w_u0 or source/center/selection.
    #[arg(long)]
    variants: Option<String>,
    #[arg(long)]
    seed_base: Option<u64>,
    /// Center crop size; 0 keeps full images.
    #[arg(long)]
    crop: Option<usize>,
    /// Selection size of the standard variants and of R(d).
    #[arg(long)]
    top_k: Option<usize>,
    /// Restrict to one corpus image (file name or stem).
    #[arg(long)]
    image: Option<String>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Args, Debug)]
struct ExpectationArgs {
    /// Clean image.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// First patch center as `row,col`.
    #[arg(long)]
    x: Option<String>,
    /// Second patch center as `row,col`.
    #[arg(long)]
    y: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

/// Flag value, else config-file value.
fn pick<T: FromStr + Clone>(flag: &Option<T>, settings: &Settings, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v.clone())),
        None => settings.get(key),
    }
}

fn pick_parsed<T: FromStr<Err = Error>>(
    flag: &Option<String>,
    settings: &Settings,
    key: &str,
) -> Result<Option<T>> {
    match flag.as_deref().or_else(|| settings.raw(key)) {
        Some(s) => s.parse().map(Some),
        None => Ok(None),
    }
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("missing required setting --{name}")))
}

fn parse_coord(s: &str) -> Result<Coord> {
    let bad = || Error::Parse(format!("coordinate must be 'row,col', got '{s}'"));
    let (r, c) = s.split_once(',').ok_or_else(bad)?;
    Ok(Coord::new(
        r.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    ))
}

fn apply_estimator(cfg: &mut DenoiseConfig, args: &EstimatorArgs, s: &Settings) -> Result<()> {
    if let Some(sigma) = pick(&args.sigma, s, "sigma")? {
        cfg.sigma = sigma;
    }
    cfg.h = match pick_parsed::<HRule>(&args.h, s, "h")? {
        Some(HRule::Value(h)) => h,
        _ => cfg.sigma,
    };
    if let Some(r) = pick(&args.patch_radius, s, "patch-radius")? {
        cfg.patch_radius = r;
    }
    if let Some(a) = pick(&args.a, s, "a")? {
        cfg.kernel_a = a;
    }
    if let Some(b) = pick_parsed(&args.border, s, "border")? {
        cfg.border = b;
    }
    if let Some(w) = pick_parsed(&args.self_weight, s, "self")? {
        cfg.self_weight = w;
    }
    Ok(())
}

fn write_or_print<T: CsvRecord>(rows: &[T], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => emit_csv(rows, path),
        None => {
            print!("{}", to_csv_string(rows));
            Ok(())
        }
    }
}

fn run_denoise(args: &DenoiseArgs, s: &Settings) -> Result<()> {
    let mut cfg = DenoiseConfig::default();
    apply_estimator(&mut cfg, &args.estimator, s)?;
    if let Some(d) = pick(&args.d, s, "d")? {
        cfg.d = d;
    }
    if let Some(sel) = pick_parsed(&args.select, s, "select")? {
        cfg.selection = sel;
    }
    if let Some(src) = pick_parsed(&args.source, s, "source")? {
        cfg.source = src;
    }
    if let Some(c) = pick_parsed(&args.center, s, "center")? {
        cfg.center = c;
    }
    cfg.validate()?;

    let input = require(pick(&args.input, s, "in")?, "in")?;
    let out = require(pick(&args.out, s, "out")?, "out")?;
    let oracle_path = pick(&args.oracle_image, s, "oracle-image")?;
    let image = load_image(&input)?;
    let (noisy, clean) = match pick(&args.seed, s, "seed")? {
        Some(seed) => {
            let (v, _) = add_gaussian_noise(&image, &NoiseSpec::new(cfg.sigma, seed))?;
            let clean = match &oracle_path {
                Some(p) => load_image(p)?,
                None => image,
            };
            (v, Some(clean))
        }
        None => (image, oracle_path.as_ref().map(load_image).transpose()?),
    };
    if cfg.source == DistanceSource::Oracle && clean.is_none() {
        return Err(Error::MissingOracle);
    }
    if let Some(p) = pick(&args.noisy_out, s, "noisy-out")? {
        save_image(&noisy, p)?;
    }
    let estimate = denoise(&noisy, &cfg, clean.as_ref())?;
    save_image(&estimate, &out)?;
    if let Some(u) = &clean {
        println!("psnr_input,psnr_output");
        println!(
            "{},{}",
            nlm_core::experiment::format_number(psnr(u, &noisy)?),
            nlm_core::experiment::format_number(psnr(u, &estimate)?)
        );
    }
    Ok(())
}

fn sweep_spec(args: &SweepArgs, s: &Settings) -> Result<SweepSpec> {
    let corpus = require(pick(&args.corpus, s, "corpus")?, "corpus")?;
    let mut spec = SweepSpec::new(corpus);
    let mut cfg = DenoiseConfig::default();
    apply_estimator(&mut cfg, &args.estimator, s)?;
    spec.sigma = cfg.sigma;
    spec.h = pick_parsed(&args.estimator.h, s, "h")?.unwrap_or(HRule::EqualSigma);
    spec.patch_radius = cfg.patch_radius;
    spec.kernel_a = cfg.kernel_a;
    spec.border = cfg.border;
    spec.self_weight = cfg.self_weight;
    spec.top_k = pick(&args.top_k, s, "top-k")?.unwrap_or(DEFAULT_TOP_K);
    if let Some(d) = pick(&args.d_values, s, "d-values")? {
        spec.d_values = parse_d_values(&d)?;
    }
    spec.variants = match pick(&args.variants, s, "variants")? {
        Some(v) => Variant::parse_list(&v, spec.top_k)?,
        None => STANDARD_VARIANTS
            .iter()
            .map(|l| Variant::standard(l, spec.top_k).expect("standard label"))
            .collect(),
    };
    if let Some(seed) = pick(&args.seed_base, s, "seed-base")? {
        spec.seed_base = seed;
    }
    if let Some(crop) = pick(&args.crop, s, "crop")? {
        spec.crop = (crop > 0).then_some(crop);
    }
    spec.image = pick(&args.image, s, "image")?;
    spec.output_path = pick(&args.out, s, "out")?;
    Ok(spec)
}

fn load_corpus(spec: &SweepSpec) -> Result<Vec<nlm_core::experiment::NamedImage>> {
    let corpus = ingest_corpus(&spec.corpus_dir, spec.crop)?;
    for skip in &corpus.skipped {
        warn!("skipped {}: {}", skip.path.display(), skip.reason);
    }
    Ok(corpus.images)
}

fn run_expectation(args: &ExpectationArgs, s: &Settings) -> Result<()> {
    let mut cfg = DenoiseConfig::default();
    apply_estimator(&mut cfg, &args.estimator, s)?;
    let u = load_image(require(pick(&args.input, s, "in")?, "in")?)?;
    let x = parse_coord(&require(pick(&args.x, s, "x")?, "x")?)?;
    let y = parse_coord(&require(pick(&args.y, s, "y")?, "y")?)?;
    let trials = pick(&args.trials, s, "trials")?.unwrap_or(2000);
    let seed = pick(&args.seed, s, "seed")?.unwrap_or(0);
    let check = expected_distance_check(
        &u,
        x,
        y,
        cfg.sigma,
        trials,
        seed,
        &PatchGeometry::from(&cfg),
    )?;
    write_or_print(&[check], pick(&args.out, s, "out")?.as_deref())
}

fn run(cli: &Cli) -> Result<()> {
    let settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    match &cli.command {
        Command::Denoise(args) => run_denoise(args, &settings),
        Command::Sweep(args) => {
            let spec = sweep_spec(args, &settings)?;
            let rows = run_sweep_on(&load_corpus(&spec)?, &spec)?;
            write_or_print(&rows, spec.output_path.as_deref())
        }
        Command::Decompose(args) => {
            let spec = sweep_spec(args, &settings)?;
            let rows = run_decomposition_sweep_on(&load_corpus(&spec)?, &spec)?;
            write_or_print(&rows, spec.output_path.as_deref())
        }
        Command::Regularity(args) => {
            let spec = sweep_spec(args, &settings)?;
            let rows = run_regularity_on(&load_corpus(&spec)?, &spec)?;
            write_or_print(&rows, spec.output_path.as_deref())
        }
        Command::CheckExpectation(args) => run_expectation(args, &settings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match &cli.config {
            Some(p) => Settings::load(p)
                .ok()
                .and_then(|s| s.get("threads").ok().flatten()),
            None => None,
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
