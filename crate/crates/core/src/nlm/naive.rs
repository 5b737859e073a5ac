//! Direct reference implementation used as a testing oracle: for every pixel,
//! every window pixel, every patch offset, with a full sort for top-k.

use super::config::{DenoiseConfig, DistanceSource, SelectionRule, SelfWeight};
use super::weights::raw_affinity;
use super::window::search_window;
use crate::error::{Error, Result};
use crate::image::{patch_distance_sq, GrayImage};

/// Same contract as [`denoise`](crate::nlm::denoise), without any shortcut.
pub fn naive_reference_denoise(
    v: &GrayImage,
    cfg: &DenoiseConfig,
    u: Option<&GrayImage>,
) -> Result<GrayImage> {
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let selection_img = match cfg.source {
        DistanceSource::Noisy => v,
        DistanceSource::Oracle => {
            let u = u.ok_or(Error::MissingOracle)?;
            v.same_shape(u)?;
            u
        }
    };
    let (width, height) = (v.width(), v.height());
    let in_domain = |c| cfg.border.in_domain(c, width, height, cfg.patch_radius);
    let mut out = v.data().to_vec();

    for row in 0..height {
        for col in 0..width {
            let x = crate::image::Coord::new(row, col);
            if !in_domain(x) {
                continue;
            }
            let window: Vec<_> = search_window(x, cfg.d, width, height)
                .into_iter()
                .filter(|&y| in_domain(y))
                .collect();

            let mut ranked = Vec::with_capacity(window.len());
            for (i, &y) in window.iter().enumerate() {
                let dist = patch_distance_sq(selection_img, x, y, &kernel, cfg.center, cfg.border)?;
                ranked.push((dist, i));
            }
            let mut kept: Vec<usize> = match cfg.selection {
                SelectionRule::All => (0..window.len()).collect(),
                SelectionRule::TopK(k) => {
                    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    ranked.iter().take(k).map(|&(_, i)| i).collect()
                }
                SelectionRule::Threshold(tau) => ranked
                    .iter()
                    .filter(|&&(dist, _)| raw_affinity(dist, cfg.h) >= tau)
                    .map(|&(_, i)| i)
                    .collect(),
            };
            kept.sort();

            let mut aff = Vec::with_capacity(kept.len());
            for &i in &kept {
                let dist = patch_distance_sq(v, x, window[i], &kernel, cfg.center, cfg.border)?;
                aff.push(raw_affinity(dist, cfg.h));
            }
            if cfg.self_weight == SelfWeight::MaxOther {
                let mut best: Option<f64> = None;
                let mut self_slot = None;
                for (j, &i) in kept.iter().enumerate() {
                    if window[i] == x {
                        self_slot = Some(j);
                    } else {
                        best = Some(best.map_or(aff[j], |b: f64| b.max(aff[j])));
                    }
                }
                if let (Some(j), Some(b)) = (self_slot, best) {
                    aff[j] = b;
                }
            }
            let mut z = 0.0;
            for &a in &aff {
                z += a;
            }
            let mut acc = 0.0;
            for (j, &i) in kept.iter().enumerate() {
                acc += (aff[j] / z) * v.get(window[i]);
            }
            out[row * width + col] = acc;
        }
    }
    GrayImage::new(width, height, out)
}
