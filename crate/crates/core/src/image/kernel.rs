//! Gaussian-weighted patch footprint and the weighted squared patch distance.
//!
//! Distances are accumulated over the footprint offsets in row-major order as
//! `acc += weight * (diff * diff)` with `diff = f(x + k) - f(y + k)`. Every
//! distance in the crate (reference and optimized paths) follows this order,
//! which keeps the two paths bit-identical.

use std::fmt;
use std::str::FromStr;

use super::{Coord, GrayImage};
use crate::error::{Error, Result};

/// Whether patch distances use the central pixel of each patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CenterPolicy {
    #[default]
    Include,
    /// Drop the center offset and renormalize the remaining weights to sum 1.
    Exclude,
}

/// How pixels near the image edge are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BorderPolicy {
    /// Out-of-range patch samples are mirrored back without repeating the
    /// edge pixel; every pixel is processed.
    #[default]
    Mirror,
    /// Only pixels whose full patch lies inside the image are processed.
    Crop,
}

impl BorderPolicy {
    /// Whether `c` belongs to the processing domain for patches of `radius`.
    pub fn in_domain(self, c: Coord, width: usize, height: usize, radius: usize) -> bool {
        match self {
            BorderPolicy::Mirror => c.row < height && c.col < width,
            BorderPolicy::Crop => {
                c.row >= radius
                    && c.col >= radius
                    && c.row + radius < height
                    && c.col + radius < width
            }
        }
    }
}

/// Mirror an index into `0..len`, reflecting about the edge pixels (which are
/// not repeated). Works for offsets larger than the image.
#[inline]
pub fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Normalized weights over a `(2r+1)^2` patch footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchKernel {
    radius: usize,
    a: f64,
    weights: Vec<f64>,
    weights_no_center: Vec<f64>,
}

/// Builds the kernel with weights proportional to `exp(-(i^2 + j^2) / (2 a^2))`.
/// `a = f64::INFINITY` gives the uniform kernel.
pub fn gaussian_patch_kernel(radius: usize, a: f64) -> Result<PatchKernel> {
    PatchKernel::gaussian(radius, a)
}

impl PatchKernel {
    pub fn gaussian(radius: usize, a: f64) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter("patch radius must be >= 1".into()));
        }
        if a.is_nan() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kernel std must be positive or infinite, got {a}"
            )));
        }
        let r = radius as isize;
        let raw: Vec<f64> = (-r..=r)
            .flat_map(|i| (-r..=r).map(move |j| (i * i + j * j) as f64))
            .map(|d2| {
                if a.is_infinite() {
                    1.0
                } else {
                    libm::exp(-d2 / (2.0 * a * a))
                }
            })
            .collect();
        let center = raw.len() / 2;
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let outer: f64 = raw
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != center)
            .map(|(_, w)| w)
            .sum();
        let weights_no_center = raw
            .iter()
            .enumerate()
            .map(|(k, w)| if k == center { 0.0 } else { w / outer })
            .collect();
        Ok(PatchKernel {
            radius,
            a,
            weights,
            weights_no_center,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Kernel standard deviation (`f64::INFINITY` for the uniform kernel).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Row-major weights, summing to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn center_index(&self) -> usize {
        self.weights.len() / 2
    }

    pub fn center_weight(&self) -> f64 {
        self.weights[self.center_index()]
    }

    /// Weights used under `policy`; under `Exclude` the center entry is zero
    /// and the rest sum to 1.
    pub fn weights_for(&self, policy: CenterPolicy) -> &[f64] {
        match policy {
            CenterPolicy::Include => &self.weights,
            CenterPolicy::Exclude => &self.weights_no_center,
        }
    }

    /// Footprint offsets `(dr, dc, weight)` in row-major order, skipping the
    /// center under `Exclude`.
    pub fn taps(&self, policy: CenterPolicy) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let r = self.radius as isize;
        let side = self.side();
        let center = self.center_index();
        self.weights_for(policy)
            .iter()
            .enumerate()
            .filter(move |&(k, _)| policy == CenterPolicy::Include || k != center)
            .map(move |(k, &w)| ((k / side) as isize - r, (k % side) as isize - r, w))
    }
}

/// Weighted squared distance `sum_k kernel_k (f(x+k) - f(y+k))^2` between the
/// patches centered at `x` and `y`.
pub fn patch_distance_sq(
    img: &GrayImage,
    x: Coord,
    y: Coord,
    kernel: &PatchKernel,
    center: CenterPolicy,
    border: BorderPolicy,
) -> Result<f64> {
    for c in [x, y] {
        if !border.in_domain(c, img.width(), img.height(), kernel.radius()) {
            return Err(Error::OutsideDomain {
                row: c.row,
                col: c.col,
            });
        }
    }
    let (xr, xc) = (x.row as isize, x.col as isize);
    let (yr, yc) = (y.row as isize, y.col as isize);
    let mut acc = 0.0;
    for (dr, dc, w) in kernel.taps(center) {
        let diff = img.get_reflected(xr + dr, xc + dc) - img.get_reflected(yr + dr, yc + dc);
        acc += w * (diff * diff);
    }
    Ok(acc)
}

impl fmt::Display for CenterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterPolicy::Include => "include",
            CenterPolicy::Exclude => "exclude",
        })
    }
}

impl FromStr for CenterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "include" => Ok(CenterPolicy::Include),
            "exclude" => Ok(CenterPolicy::Exclude),
            other => Err(Error::Parse(format!(
                "center policy must be include|exclude, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for BorderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BorderPolicy::Mirror => "mirror",
            BorderPolicy::Crop => "crop",
        })
    }
}

impl FromStr for BorderPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mirror" => Ok(BorderPolicy::Mirror),
            "crop" => Ok(BorderPolicy::Crop),
            other => Err(Error::Parse(format!(
                "border policy must be mirror|crop, got '{other}'"
            ))),
        }
    }
}
