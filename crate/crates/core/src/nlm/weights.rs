use super::config::{DenoiseConfig, DistanceSource, SelfWeight};
use super::select::{select_positions, SelectScratch};
use super::window::search_window;
use crate::error::{Error, Result};
use crate::image::{patch_distance_sq, Coord, GrayImage};

/// Unnormalized NL-means weight `exp(-dist_sq / (2 h^2))`.
#[inline]
pub fn raw_affinity(dist_sq: f64, h: f64) -> f64 {
    libm::exp(-dist_sq / (2.0 * h * h))
}

/// Normalized weights of one pixel over its similar set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub center: Coord,
    /// Similar pixels in row-major order. Pixels whose affinity underflows to
    /// zero carry no weight and are left out.
    pub selected: Vec<Coord>,
    /// Aligned with `selected`; strictly positive and summing to 1.
    pub weights: Vec<f64>,
}

impl WeightRow {
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_y w(x, y) img(y)`.
    pub fn apply(&self, img: &GrayImage) -> f64 {
        self.selected
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (&y, &w)| acc + w * img.get(y))
    }
}

/// Turns affinities (in row-major order) into weights in place: applies the
/// self-weight policy to the entry at `self_pos`, then divides by the sum.
pub(crate) fn normalize_affinities(aff: &mut [f64], self_pos: Option<usize>, policy: SelfWeight) {
    if let (SelfWeight::MaxOther, Some(p)) = (policy, self_pos) {
        let max_other = aff
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, &a)| a)
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
        if let Some(m) = max_other {
            aff[p] = m;
        }
    }
    let z = aff.iter().fold(0.0, |acc, &a| acc + a);
    for a in aff.iter_mut() {
        *a /= z;
    }
}

/// The weight row of pixel `x`: similar set from the configured source, then
/// exponential weights of the noisy-image distances renormalized over that set.
pub fn weight_row(
    x: Coord,
    v: &GrayImage,
    cfg: &DenoiseConfig,
    u: Option<&GrayImage>,
) -> Result<WeightRow> {
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let selection_img = match (cfg.source, u) {
        (DistanceSource::Noisy, _) => v,
        (DistanceSource::Oracle, Some(u)) => {
            v.same_shape(u)?;
            u
        }
        (DistanceSource::Oracle, None) => return Err(Error::MissingOracle),
    };
    let (w, h) = (v.width(), v.height());
    if !cfg.border.in_domain(x, w, h, cfg.patch_radius) {
        return Err(Error::OutsideDomain {
            row: x.row,
            col: x.col,
        });
    }
    let window: Vec<Coord> = search_window(x, cfg.d, w, h)
        .into_iter()
        .filter(|&y| cfg.border.in_domain(y, w, h, cfg.patch_radius))
        .collect();
    let sel_dists = window
        .iter()
        .map(|&y| patch_distance_sq(selection_img, x, y, &kernel, cfg.center, cfg.border))
        .collect::<Result<Vec<f64>>>()?;
    let mut kept = Vec::new();
    select_positions(
        window.len(),
        |i| sel_dists[i],
        cfg.selection,
        cfg.h,
        &mut SelectScratch::default(),
        &mut kept,
    );

    let selected: Vec<Coord> = kept.iter().map(|&i| window[i]).collect();
    let mut weights = selected
        .iter()
        .map(|&y| {
            patch_distance_sq(v, x, y, &kernel, cfg.center, cfg.border)
                .map(|d| raw_affinity(d, cfg.h))
        })
        .collect::<Result<Vec<f64>>>()?;
    let self_pos = selected.iter().position(|&y| y == x);
    normalize_affinities(&mut weights, self_pos, cfg.self_weight);

    let (selected, weights) = selected
        .into_iter()
        .zip(weights)
        .filter(|&(_, w)| w > 0.0)
        .unzip();
    Ok(WeightRow {
        center: x,
        selected,
        weights,
    })
}
