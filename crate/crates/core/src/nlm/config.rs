use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{BorderPolicy, CenterPolicy, PatchKernel};

/// Which image drives similar-patch selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DistanceSource {
    /// Distances on the noisy image `v`.
    #[default]
    Noisy,
    /// Distances on the clean image `u` (analysis device; requires `u`).
    Oracle,
}

/// How the similar set is carved out of the search window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SelectionRule {
    /// Keep the whole window.
    #[default]
    All,
    /// Keep the `k` closest patches (the center counts as one of them).
    /// Ties are broken by row-major position.
    TopK(usize),
    /// Keep patches whose raw affinity is at least `tau`.
    Threshold(f64),
}

/// Weight given to the center pixel itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SelfWeight {
    /// Plain exponential weight of a zero distance, i.e. 1 before normalization.
    #[default]
    Literal,
    /// Replaced by the largest affinity among the other selected pixels.
    MaxOther,
}

pub const DEFAULT_TOP_K: usize = 80;
pub const DEFAULT_PATCH_RADIUS: usize = 3;
pub const DEFAULT_KERNEL_A: f64 = 2.0;
pub const DEFAULT_SIGMA: f64 = 20.0;

/// Every parameter of the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    /// Noise standard deviation (informational; `h` is what enters the weights).
    pub sigma: f64,
    /// Filtering bandwidth of the exponential weight.
    pub h: f64,
    pub patch_radius: usize,
    /// Search window radius (closed Euclidean disc).
    pub d: usize,
    /// Std of the Gaussian weighting inside the patch norm; `INFINITY` for uniform.
    pub kernel_a: f64,
    pub selection: SelectionRule,
    pub source: DistanceSource,
    pub center: CenterPolicy,
    pub self_weight: SelfWeight,
    pub border: BorderPolicy,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig::new(DEFAULT_SIGMA, 4)
    }
}

impl DenoiseConfig {
    /// Plain NL-means with `h = sigma` and default patch geometry.
    pub fn new(sigma: f64, d: usize) -> Self {
        DenoiseConfig {
            sigma,
            h: sigma,
            patch_radius: DEFAULT_PATCH_RADIUS,
            d,
            kernel_a: DEFAULT_KERNEL_A,
            selection: SelectionRule::All,
            source: DistanceSource::Noisy,
            center: CenterPolicy::Include,
            self_weight: SelfWeight::Literal,
            border: BorderPolicy::Mirror,
        }
    }

    pub fn with_d(&self, d: usize) -> Self {
        DenoiseConfig { d, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "h must be finite and > 0, got {}",
                self.h
            )));
        }
        if self.patch_radius == 0 {
            return Err(Error::InvalidParameter("patch radius must be >= 1".into()));
        }
        if self.kernel_a.is_nan() || self.kernel_a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kernel std a must be > 0 or infinite, got {}",
                self.kernel_a
            )));
        }
        match self.selection {
            SelectionRule::TopK(0) => Err(Error::InvalidParameter("top-k needs k >= 1".into())),
            SelectionRule::Threshold(tau) if !(tau > 0.0 && tau <= 1.0) => Err(
                Error::InvalidParameter(format!("threshold must lie in (0, 1], got {tau}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn kernel(&self) -> Result<PatchKernel> {
        PatchKernel::gaussian(self.patch_radius, self.kernel_a)
    }

    /// `source/center/selection`, e.g. `oracle/exclude/topk:80`.
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.source, self.center, self.selection)
    }
}

impl fmt::Display for DistanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceSource::Noisy => "noisy",
            DistanceSource::Oracle => "oracle",
        })
    }
}

impl FromStr for DistanceSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noisy" => Ok(DistanceSource::Noisy),
            "oracle" => Ok(DistanceSource::Oracle),
            other => Err(Error::Parse(format!(
                "distance source must be noisy|oracle, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::All => f.write_str("all"),
            SelectionRule::TopK(k) => write!(f, "topk:{k}"),
            SelectionRule::Threshold(t) => write!(f, "thresh:{t}"),
        }
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    /// Accepts `all`, `topk:K` and `thresh:T`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Parse(format!("selection must be all|topk:K|thresh:T, got '{s}'"));
        if s == "all" {
            return Ok(SelectionRule::All);
        }
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "topk" => value.parse().map(SelectionRule::TopK).map_err(|_| bad()),
            "thresh" => value
                .parse()
                .map(SelectionRule::Threshold)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SelfWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfWeight::Literal => "literal",
            SelfWeight::MaxOther => "max-other",
        })
    }
}

impl FromStr for SelfWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literal" => Ok(SelfWeight::Literal),
            "max-other" | "maxother" => Ok(SelfWeight::MaxOther),
            other => Err(Error::Parse(format!(
                "self weight must be literal|max-other, got '{other}'"
            ))),
        }
    }
}
