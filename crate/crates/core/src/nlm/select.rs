use std::cmp::Ordering;

use super::config::{DenoiseConfig, SelectionRule};
use super::weights::raw_affinity;
use crate::error::Result;
use crate::image::{patch_distance_sq, Coord, GrayImage};

/// Reusable buffer for top-k selection.
#[derive(Debug, Default)]
pub(crate) struct SelectScratch {
    keyed: Vec<(f64, usize)>,
}

fn by_distance_then_position(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Applies `rule` to `n` candidates in row-major order with distances given by
/// `dist`. Writes the kept candidate positions to `out` in ascending order.
pub(crate) fn select_positions(
    n: usize,
    dist: impl Fn(usize) -> f64,
    rule: SelectionRule,
    h: f64,
    scratch: &mut SelectScratch,
    out: &mut Vec<usize>,
) {
    out.clear();
    match rule {
        SelectionRule::All => out.extend(0..n),
        SelectionRule::TopK(k) if k >= n => out.extend(0..n),
        SelectionRule::TopK(k) => {
            let keyed = &mut scratch.keyed;
            keyed.clear();
            keyed.extend((0..n).map(|i| (dist(i), i)));
            // (distance, position) is a total order with unique keys, so the
            // first k after partitioning are exactly the first k of a full sort
            keyed.select_nth_unstable_by(k - 1, by_distance_then_position);
            out.extend(keyed[..k].iter().map(|&(_, i)| i));
            out.sort_unstable();
        }
        SelectionRule::Threshold(tau) => {
            out.extend((0..n).filter(|&i| raw_affinity(dist(i), h) >= tau));
        }
    }
}

/// The similar set of `x` within `window`, with distances measured on
/// `selection_img` (the noisy image, or the clean one for oracle selection)
/// under the configured center policy.
pub fn select_similar(
    x: Coord,
    window: &[Coord],
    selection_img: &GrayImage,
    cfg: &DenoiseConfig,
) -> Result<Vec<Coord>> {
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let dists = window
        .iter()
        .map(|&y| patch_distance_sq(selection_img, x, y, &kernel, cfg.center, cfg.border))
        .collect::<Result<Vec<f64>>>()?;
    let mut kept = Vec::new();
    select_positions(
        window.len(),
        |i| dists[i],
        cfg.selection,
        cfg.h,
        &mut SelectScratch::default(),
        &mut kept,
    );
    Ok(kept.into_iter().map(|i| window[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::CenterPolicy;
    use crate::nlm::search_window;

    fn textured(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |c| {
            ((c.row * 37 + c.col * 11 + c.row * c.col) % 97) as f64
        })
        .unwrap()
    }

    #[test]
    fn top_k_keeps_smallest_with_row_major_ties() {
        let d = [5.0, 1.0, 3.0, 1.0, 0.0, 3.0];
        let mut out = Vec::new();
        let mut s = SelectScratch::default();
        select_positions(6, |i| d[i], SelectionRule::TopK(3), 1.0, &mut s, &mut out);
        assert_eq!(out, vec![1, 3, 4]);
        select_positions(6, |i| d[i], SelectionRule::TopK(4), 1.0, &mut s, &mut out);
        assert_eq!(out, vec![1, 2, 3, 4]);
        select_positions(6, |i| d[i], SelectionRule::TopK(10), 1.0, &mut s, &mut out);
        assert_eq!(out, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn threshold_uses_affinity() {
        // affinity exp(-d / 2) with h = 1
        let d = [0.0, 2.0, 4.0];
        let mut out = Vec::new();
        let tau = (-1.0f64).exp();
        select_positions(
            3,
            |i| d[i],
            SelectionRule::Threshold(tau),
            1.0,
            &mut SelectScratch::default(),
            &mut out,
        );
        assert_eq!(out, vec![0, 1]);
    }

    #[test]
    fn top80_is_vacuous_on_small_windows() {
        let img = textured(20, 20);
        let x = Coord::new(10, 10);
        let window = search_window(x, 4, 20, 20);
        assert_eq!(window.len(), 49);
        let cfg = DenoiseConfig {
            selection: SelectionRule::TopK(80),
            ..DenoiseConfig::new(20.0, 4)
        };
        assert_eq!(select_similar(x, &window, &img, &cfg).unwrap(), window);
        let all = DenoiseConfig::new(20.0, 4);
        assert_eq!(select_similar(x, &window, &img, &all).unwrap(), window);
    }

    #[test]
    fn vacuous_threshold_keeps_window() {
        let img = textured(20, 20);
        let x = Coord::new(9, 8);
        let window = search_window(x, 3, 20, 20);
        let mut cfg = DenoiseConfig {
            center: CenterPolicy::Exclude,
            ..DenoiseConfig::new(20.0, 3)
        };
        let kernel = cfg.kernel().unwrap();
        let min_aff = window
            .iter()
            .map(|&y| {
                raw_affinity(
                    patch_distance_sq(&img, x, y, &kernel, cfg.center, cfg.border).unwrap(),
                    cfg.h,
                )
            })
            .fold(1.0, f64::min);
        cfg.selection = SelectionRule::Threshold(min_aff);
        assert_eq!(select_similar(x, &window, &img, &cfg).unwrap(), window);
    }

    #[test]
    fn top_k_on_larger_window_keeps_center() {
        let img = textured(30, 30);
        let x = Coord::new(15, 15);
        let window = search_window(x, 8, 30, 30);
        let cfg = DenoiseConfig {
            selection: SelectionRule::TopK(10),
            ..DenoiseConfig::new(20.0, 8)
        };
        let sel = select_similar(x, &window, &img, &cfg).unwrap();
        assert_eq!(sel.len(), 10);
        assert!(sel.contains(&x));
        assert!(sel.windows(2).all(|p| p[0] < p[1]));
    }
}
