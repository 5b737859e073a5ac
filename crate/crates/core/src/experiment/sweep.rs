use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::corpus::{ingest_corpus, NamedImage};
use super::csv::{format_number, parse_field, CsvRecord};
use crate::diagnostics::{
    decompose_eqm_batch, regularity_curve, DecompositionReport, ExpectationCheck, PatchGeometry,
    RegularityPoint,
};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, psnr, BorderPolicy, CenterPolicy, Coord, NoiseSpec};
use crate::nlm::{
    denoise_batch, DenoiseConfig, DistanceSource, SelectionRule, SelfWeight, DEFAULT_KERNEL_A,
    DEFAULT_PATCH_RADIUS, DEFAULT_SIGMA, DEFAULT_TOP_K,
};

/// The five estimator curves: plain weights, then top-k selection on the
/// noisy image (with / without the center pixel) and on the clean image
/// (with / without the center pixel).
pub const STANDARD_VARIANTS: [&str; 5] = ["w", "w_v", "w_v0", "w_u", "w_u0"];

/// A labelled estimator variant of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub source: DistanceSource,
    pub center: CenterPolicy,
    pub selection: SelectionRule,
}

impl Variant {
    /// One of [`STANDARD_VARIANTS`], with top-`k` selection where applicable.
    pub fn standard(label: &str, k: usize) -> Option<Variant> {
        use CenterPolicy::{Exclude, Include};
        use DistanceSource::{Noisy, Oracle};
        let top = SelectionRule::TopK(k);
        let (source, center, selection) = match label {
            "w" => (Noisy, Include, SelectionRule::All),
            "w_v" => (Noisy, Include, top),
            "w_v0" => (Noisy, Exclude, top),
            "w_u" => (Oracle, Include, top),
            "w_u0" => (Oracle, Exclude, top),
            _ => return None,
        };
        Some(Variant {
            label: label.to_string(),
            source,
            center,
            selection,
        })
    }

    /// A standard label, or an explicit `source/center/selection` triple such
    /// as `oracle/exclude/thresh:0.4` (which then also serves as the label).
    pub fn parse(token: &str, k: usize) -> Result<Variant> {
        let token = token.trim();
        if let Some(v) = Variant::standard(token, k) {
            return Ok(v);
        }
        let parts: Vec<&str> = token.split('/').collect();
        if parts.len() != 3 || token.contains(',') {
            return Err(Error::Parse(format!(
                "variant must be one of {} or source/center/selection, got '{token}'",
                STANDARD_VARIANTS.join("|")
            )));
        }
        Ok(Variant {
            label: token.to_string(),
            source: parts[0].parse()?,
            center: parts[1].parse()?,
            selection: parts[2].parse()?,
        })
    }

    pub fn parse_list(s: &str, k: usize) -> Result<Vec<Variant>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| Variant::parse(t, k))
            .collect()
    }
}

/// How the filtering bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HRule {
    EqualSigma,
    Value(f64),
}

impl FromStr for HRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "equal-sigma" | "sigma" => Ok(HRule::EqualSigma),
            other => other.parse().map(HRule::Value).map_err(|_| {
                Error::Parse(format!(
                    "h must be 'equal-sigma' or a number, got '{other}'"
                ))
            }),
        }
    }
}

impl fmt::Display for HRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HRule::EqualSigma => f.write_str("equal-sigma"),
            HRule::Value(h) => write!(f, "{h}"),
        }
    }
}

/// Everything a sweep needs. Image `i` (in corpus order) is corrupted once
/// with seed `seed_base + i`, and that realization is shared by every
/// variant and radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub corpus_dir: PathBuf,
    pub d_values: Vec<usize>,
    pub variants: Vec<Variant>,
    pub sigma: f64,
    pub h: HRule,
    pub seed_base: u64,
    pub output_path: Option<PathBuf>,
    /// Center crop applied at ingestion; `None` keeps full images.
    pub crop: Option<usize>,
    pub patch_radius: usize,
    pub kernel_a: f64,
    pub border: BorderPolicy,
    pub self_weight: SelfWeight,
    /// Selection size of the standard variants and of `R(d)`.
    pub top_k: usize,
    /// Restrict the run to the corpus image with this file name (or stem).
    pub image: Option<String>,
}

impl SweepSpec {
    pub fn new(corpus_dir: impl Into<PathBuf>) -> Self {
        SweepSpec {
            corpus_dir: corpus_dir.into(),
            d_values: (1..=15).collect(),
            variants: STANDARD_VARIANTS
                .iter()
                .map(|l| Variant::standard(l, DEFAULT_TOP_K).expect("standard label"))
                .collect(),
            sigma: DEFAULT_SIGMA,
            h: HRule::EqualSigma,
            seed_base: 0,
            output_path: None,
            crop: Some(128),
            patch_radius: DEFAULT_PATCH_RADIUS,
            kernel_a: DEFAULT_KERNEL_A,
            border: BorderPolicy::Mirror,
            self_weight: SelfWeight::Literal,
            top_k: DEFAULT_TOP_K,
            image: None,
        }
    }

    pub fn h(&self) -> f64 {
        match self.h {
            HRule::EqualSigma => self.sigma,
            HRule::Value(h) => h,
        }
    }

    pub fn geometry(&self) -> PatchGeometry {
        PatchGeometry {
            patch_radius: self.patch_radius,
            kernel_a: self.kernel_a,
            border: self.border,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one radius".into(),
            ));
        }
        if self.d_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "radii must be strictly increasing".into(),
            ));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one variant".into(),
            ));
        }
        for (i, v) in self.variants.iter().enumerate() {
            if self.variants[..i].iter().any(|w| w.label == v.label) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate variant '{}'",
                    v.label
                )));
            }
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top-k needs k >= 1".into()));
        }
        self.configs().iter().try_for_each(DenoiseConfig::validate)
    }

    /// Estimator configurations, variant-major then radius.
    pub fn configs(&self) -> Vec<DenoiseConfig> {
        self.variants
            .iter()
            .flat_map(|v| {
                self.d_values.iter().map(move |&d| DenoiseConfig {
                    sigma: self.sigma,
                    h: self.h(),
                    patch_radius: self.patch_radius,
                    d,
                    kernel_a: self.kernel_a,
                    selection: v.selection,
                    source: v.source,
                    center: v.center,
                    self_weight: self.self_weight,
                    border: self.border,
                })
            })
            .collect()
    }

    fn cells(&self) -> impl Iterator<Item = (&Variant, usize)> {
        self.variants
            .iter()
            .flat_map(|v| self.d_values.iter().map(move |&d| (v, d)))
    }

    fn noise_seed(&self, index: usize) -> u64 {
        self.seed_base.wrapping_add(index as u64)
    }

    fn pick<'a>(&self, images: &'a [NamedImage]) -> Result<Vec<&'a NamedImage>> {
        let Some(wanted) = &self.image else {
            return Ok(images.iter().collect());
        };
        let hit: Vec<_> = images
            .iter()
            .filter(|img| {
                img.name == *wanted
                    || std::path::Path::new(&img.name)
                        .file_stem()
                        .is_some_and(|s| s.to_string_lossy() == *wanted)
            })
            .collect();
        if hit.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "image '{wanted}' not in corpus"
            )));
        }
        Ok(hit)
    }

    fn load(&self) -> Result<Vec<NamedImage>> {
        Ok(ingest_corpus(&self.corpus_dir, self.crop)?.images)
    }
}

/// Mean PSNR of one (variant, radius) cell across the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub variant_label: String,
    pub d: usize,
    pub psnr_mean: f64,
    /// Population standard deviation across images.
    pub psnr_std: f64,
    pub n_images: usize,
}

/// Ingests `spec.corpus_dir` and runs [`run_sweep_on`].
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CurveRow>> {
    run_sweep_on(&spec.load()?, spec)
}

/// PSNR of every (variant, radius) cell, one row per cell in variant-major
/// order.
pub fn run_sweep_on(images: &[NamedImage], spec: &SweepSpec) -> Result<Vec<CurveRow>> {
    spec.validate()?;
    let selected = spec.pick(images)?;
    let cfgs = spec.configs();
    let mut table = vec![Vec::with_capacity(selected.len()); cfgs.len()];
    for (i, named) in selected.iter().enumerate() {
        let u = &named.image;
        let (v, _) = add_gaussian_noise(u, &NoiseSpec::new(spec.sigma, spec.noise_seed(i)))?;
        let estimates = denoise_batch(&v, &cfgs, Some(u))?;
        for (cell, est) in table.iter_mut().zip(&estimates) {
            cell.push(psnr(u, est)?);
        }
    }
    Ok(spec
        .cells()
        .zip(table)
        .map(|((variant, d), values)| {
            let (mean, std) = mean_and_std(&values);
            CurveRow {
                variant_label: variant.label.clone(),
                d,
                psnr_mean: mean,
                psnr_std: std,
                n_images: values.len(),
            }
        })
        .collect())
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().fold(0.0, |a, &x| a + x) / n;
    if !mean.is_finite() {
        return (mean, 0.0);
    }
    let var = values.iter().fold(0.0, |a, &x| a + (x - mean) * (x - mean)) / n;
    (mean, var.sqrt())
}

pub fn run_decomposition_sweep(spec: &SweepSpec) -> Result<Vec<DecompositionReport>> {
    run_decomposition_sweep_on(&spec.load()?, spec)
}

/// Bias / variance / covariance / squared error per (variant, radius),
/// averaged over the selected images.
pub fn run_decomposition_sweep_on(
    images: &[NamedImage],
    spec: &SweepSpec,
) -> Result<Vec<DecompositionReport>> {
    spec.validate()?;
    let selected = spec.pick(images)?;
    let cfgs = spec.configs();
    let mut sums = vec![[0.0f64; 4]; cfgs.len()];
    for (i, named) in selected.iter().enumerate() {
        let u = &named.image;
        let (_, b) = add_gaussian_noise(u, &NoiseSpec::new(spec.sigma, spec.noise_seed(i)))?;
        for (acc, r) in sums.iter_mut().zip(decompose_eqm_batch(u, &b, &cfgs)?) {
            acc[0] += r.bias;
            acc[1] += r.variance;
            acc[2] += r.covariance;
            acc[3] += r.eqm;
        }
    }
    let n = selected.len() as f64;
    Ok(spec
        .cells()
        .zip(sums)
        .map(
            |((variant, d), [bias, variance, covariance, eqm])| DecompositionReport {
                bias: bias / n,
                variance: variance / n,
                covariance: covariance / n,
                eqm: eqm / n,
                d,
                variant_label: variant.label.clone(),
            },
        )
        .collect())
}

pub fn run_regularity(spec: &SweepSpec) -> Result<Vec<RegularityPoint>> {
    run_regularity_on(&spec.load()?, spec)
}

/// `R(d)` for each radius of the spec, averaged over the selected images.
/// Only the clean images are used.
pub fn run_regularity_on(images: &[NamedImage], spec: &SweepSpec) -> Result<Vec<RegularityPoint>> {
    if spec.d_values.is_empty() || spec.d_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "radii must be non-empty and strictly increasing".into(),
        ));
    }
    if spec.top_k == 0 {
        return Err(Error::InvalidParameter("top-k needs k >= 1".into()));
    }
    let selected = spec.pick(images)?;
    let geometry = spec.geometry();
    let mut sums = vec![0.0; spec.d_values.len()];
    for named in &selected {
        let curve = regularity_curve(&named.image, &spec.d_values, spec.top_k, &geometry)?;
        for (acc, p) in sums.iter_mut().zip(curve) {
            *acc += p.r;
        }
    }
    let n = selected.len() as f64;
    Ok(spec
        .d_values
        .iter()
        .zip(sums)
        .map(|(&d, s)| RegularityPoint { d, r: s / n })
        .collect())
}

impl CsvRecord for CurveRow {
    const HEADER: &'static [&'static str] = &["variant", "d", "psnr_mean", "psnr_std", "n_images"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.variant_label.clone(),
            self.d.to_string(),
            format_number(self.psnr_mean),
            format_number(self.psnr_std),
            self.n_images.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(CurveRow {
            variant_label: f[0].to_string(),
            d: parse_field(f[1], "d")?,
            psnr_mean: parse_field(f[2], "psnr_mean")?,
            psnr_std: parse_field(f[3], "psnr_std")?,
            n_images: parse_field(f[4], "n_images")?,
        })
    }
}

impl CsvRecord for DecompositionReport {
    const HEADER: &'static [&'static str] =
        &["variant", "d", "bias", "variance", "covariance", "eqm"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.variant_label.clone(),
            self.d.to_string(),
            format_number(self.bias),
            format_number(self.variance),
            format_number(self.covariance),
            format_number(self.eqm),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(DecompositionReport {
            variant_label: f[0].to_string(),
            d: parse_field(f[1], "d")?,
            bias: parse_field(f[2], "bias")?,
            variance: parse_field(f[3], "variance")?,
            covariance: parse_field(f[4], "covariance")?,
            eqm: parse_field(f[5], "eqm")?,
        })
    }
}

impl CsvRecord for RegularityPoint {
    const HEADER: &'static [&'static str] = &["d", "r"];

    fn fields(&self) -> Vec<String> {
        vec![self.d.to_string(), format_number(self.r)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(RegularityPoint {
            d: parse_field(f[0], "d")?,
            r: parse_field(f[1], "r")?,
        })
    }
}

impl CsvRecord for ExpectationCheck {
    const HEADER: &'static [&'static str] = &[
        "x_row",
        "x_col",
        "y_row",
        "y_col",
        "sigma",
        "trials",
        "empirical_offset",
        "std_error",
        "expected_offset",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.x.row.to_string(),
            self.x.col.to_string(),
            self.y.row.to_string(),
            self.y.col.to_string(),
            format_number(self.sigma),
            self.trials.to_string(),
            format_number(self.empirical_offset),
            format_number(self.std_error),
            format_number(self.expected_offset()),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(ExpectationCheck {
            x: Coord::new(parse_field(f[0], "x_row")?, parse_field(f[1], "x_col")?),
            y: Coord::new(parse_field(f[2], "y_row")?, parse_field(f[3], "y_col")?),
            sigma: parse_field(f[4], "sigma")?,
            trials: parse_field(f[5], "trials")?,
            empirical_offset: parse_field(f[6], "empirical_offset")?,
            std_error: parse_field(f[7], "std_error")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{parse_csv, to_csv_string};
    use crate::image::GrayImage;

    fn corpus() -> Vec<NamedImage> {
        (0..2)
            .map(|k| NamedImage {
                name: format!("img{k}.pgm"),
                image: GrayImage::from_fn(20, 20, |c| {
                    ((c.row * (7 + k) + c.col * 5 + c.row * c.col) % 37) as f64 * 6.0
                })
                .unwrap(),
            })
            .collect()
    }

    #[test]
    fn standard_variants_and_parsing() {
        let v = Variant::standard("w_u0", 80).unwrap();
        assert_eq!(v.source, DistanceSource::Oracle);
        assert_eq!(v.center, CenterPolicy::Exclude);
        assert_eq!(v.selection, SelectionRule::TopK(80));
        assert_eq!(
            Variant::standard("w", 80).unwrap().selection,
            SelectionRule::All
        );
        let custom = Variant::parse("noisy/exclude/thresh:0.3", 80).unwrap();
        assert_eq!(custom.label, "noisy/exclude/thresh:0.3");
        assert_eq!(custom.selection, SelectionRule::Threshold(0.3));
        assert!(Variant::parse("w_x", 80).is_err());
        assert_eq!(Variant::parse_list("w, w_v0", 10).unwrap().len(), 2);
        assert_eq!("equal-sigma".parse::<HRule>().unwrap(), HRule::EqualSigma);
        assert_eq!("12.5".parse::<HRule>().unwrap(), HRule::Value(12.5));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new("x");
        assert!(spec.validate().is_ok());
        spec.d_values = vec![3, 3];
        assert!(spec.validate().is_err());
        spec.d_values = vec![];
        assert!(spec.validate().is_err());
        let mut spec = SweepSpec::new("x");
        spec.variants.clear();
        assert!(spec.validate().is_err());
        let mut spec = SweepSpec::new("x");
        spec.variants.push(spec.variants[0].clone());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn one_row_per_cell() {
        let mut spec = SweepSpec::new("unused");
        spec.d_values = vec![3];
        let rows = run_sweep_on(&corpus(), &spec).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.n_images == 2 && r.d == 3));
        let reports = run_decomposition_sweep_on(&corpus(), &spec).unwrap();
        assert_eq!(
            reports
                .iter()
                .map(|r| r.variant_label.as_str())
                .collect::<Vec<_>>(),
            STANDARD_VARIANTS
        );
    }

    #[test]
    fn named_image_filter() {
        let mut spec = SweepSpec::new("unused");
        spec.d_values = vec![1, 2];
        spec.image = Some("img1".into());
        let rows = run_regularity_on(&corpus(), &spec).unwrap();
        assert_eq!(rows.len(), 2);
        spec.image = Some("nope".into());
        assert!(run_regularity_on(&corpus(), &spec).is_err());
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(
            to_csv_string::<CurveRow>(&[]),
            "variant,d,psnr_mean,psnr_std,n_images\n"
        );
        let row = CurveRow {
            variant_label: "w".into(),
            d: 4,
            psnr_mean: 29.123456789012345,
            psnr_std: 0.5,
            n_images: 6,
        };
        let text = to_csv_string(std::slice::from_ref(&row));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 5);
        let back: Vec<CurveRow> = parse_csv(&text).unwrap();
        assert!((back[0].psnr_mean - row.psnr_mean).abs() < 1e-10);
        assert!(parse_csv::<RegularityPoint>(&text).is_err());
    }
}
