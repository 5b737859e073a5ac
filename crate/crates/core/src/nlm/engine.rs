//! Optimized NL-means evaluation.
//!
//! For each output pixel `x` the squared patch distances to every offset of
//! the `(2 d_max + 1)^2` square around it are accumulated tap by tap: the
//! outer loop walks the patch footprint in row-major order, the inner loop
//! runs along contiguous rows of a mirror-padded copy of the image. Each
//! distance therefore receives exactly the same sequence of
//! `acc += w * (diff * diff)` updates as the reference
//! [`patch_distance_sq`](crate::image::patch_distance_sq), so both paths
//! produce bit-identical distances while the inner loop vectorizes.
//!
//! Distances do not depend on the window radius, so one pass serves every
//! configuration of a batch (several radii, selection rules and variants).
//! Rows are evaluated in parallel; each pixel is computed independently and
//! in a fixed order, so the output does not depend on the thread count.

use std::collections::HashMap;

use rayon::prelude::*;

use super::config::{DenoiseConfig, DistanceSource};
use super::select::{select_positions, SelectScratch};
use super::weights::{normalize_affinities, raw_affinity, WeightRow};
use super::window::disc_offsets;
use crate::error::{Error, Result};
use crate::image::{BorderPolicy, CenterPolicy, Coord, GrayImage, PatchKernel};

/// Mirror-padded copy of an image.
struct Padded {
    data: Vec<f64>,
    stride: usize,
    pad: usize,
}

impl Padded {
    fn new(img: &GrayImage, pad: usize) -> Self {
        let stride = img.width() + 2 * pad;
        let rows = img.height() + 2 * pad;
        let p = pad as isize;
        let mut data = Vec::with_capacity(stride * rows);
        for r in 0..rows as isize {
            for c in 0..stride as isize {
                data.push(img.get_reflected(r - p, c - p));
            }
        }
        Padded { data, stride, pad }
    }

    #[inline]
    fn at(&self, row: isize, col: isize) -> f64 {
        let r = (row + self.pad as isize) as usize;
        let c = (col + self.pad as isize) as usize;
        self.data[r * self.stride + c]
    }

    #[inline]
    fn row(&self, row: isize, col: isize, len: usize) -> &[f64] {
        let r = (row + self.pad as isize) as usize;
        let c = (col + self.pad as isize) as usize;
        &self.data[r * self.stride + c..r * self.stride + c + len]
    }
}

/// One selected pixel set with its normalized weights. Weights may be zero
/// where the affinity underflowed.
pub(crate) struct RowView<'a> {
    pub center: Coord,
    pub coords: &'a [Coord],
    pub weights: &'a [f64],
}

impl RowView<'_> {
    #[inline]
    pub fn apply(&self, img: &GrayImage) -> f64 {
        self.coords
            .iter()
            .zip(self.weights)
            .fold(0.0, |acc, (&y, &w)| acc + w * img.get(y))
    }
}

/// Per-configuration values over the processing domain (row-major).
pub(crate) struct Evaluation<R> {
    pub domain: Vec<Coord>,
    pub values: Vec<Vec<R>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Source {
    Noisy,
    Clean,
}

struct CfgPlan {
    disc: usize,
    sel_dist: usize,
    aff: usize,
    self_index: usize,
}

struct Plan<'a> {
    cfgs: &'a [DenoiseConfig],
    kernel: PatchKernel,
    border: BorderPolicy,
    width: usize,
    height: usize,
    d_max: usize,
    side: usize,
    noisy: Padded,
    clean: Option<Padded>,
    /// Offsets `(dr, dc, square index)` of each distinct disc.
    discs: Vec<Vec<(isize, isize, usize)>>,
    dist_keys: Vec<(Source, CenterPolicy)>,
    /// `(index into dist_keys of the noisy distances, h)`.
    aff_keys: Vec<(usize, f64)>,
    plans: Vec<CfgPlan>,
    max_disc: usize,
}

fn check_shared(cfgs: &[DenoiseConfig]) -> Result<()> {
    let first = cfgs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no configuration given".into()))?;
    for cfg in cfgs {
        cfg.validate()?;
        if cfg.patch_radius != first.patch_radius
            || cfg.kernel_a.to_bits() != first.kernel_a.to_bits()
            || cfg.border != first.border
        {
            return Err(Error::InvalidParameter(
                "batched configurations must share patch radius, kernel std and border policy"
                    .into(),
            ));
        }
    }
    Ok(())
}

impl<'a> Plan<'a> {
    fn new(v: &GrayImage, u: Option<&GrayImage>, cfgs: &'a [DenoiseConfig]) -> Result<Self> {
        check_shared(cfgs)?;
        let needs_clean = cfgs.iter().any(|c| c.source == DistanceSource::Oracle);
        let clean_img = match (needs_clean, u) {
            (false, _) => None,
            (true, None) => return Err(Error::MissingOracle),
            (true, Some(u)) => {
                v.same_shape(u)?;
                Some(u)
            }
        };
        let kernel = cfgs[0].kernel()?;
        let d_max = cfgs.iter().map(|c| c.d).max().unwrap_or(0);
        let side = 2 * d_max + 1;
        let pad = kernel.radius() + d_max;

        let mut disc_index: HashMap<usize, usize> = HashMap::new();
        let mut discs = Vec::new();
        let mut dist_keys: Vec<(Source, CenterPolicy)> = Vec::new();
        let mut aff_keys: Vec<(usize, f64)> = Vec::new();
        let mut plans = Vec::with_capacity(cfgs.len());
        let mut key_of = |k: (Source, CenterPolicy)| match dist_keys.iter().position(|&e| e == k) {
            Some(i) => i,
            None => {
                dist_keys.push(k);
                dist_keys.len() - 1
            }
        };
        for cfg in cfgs {
            let disc = *disc_index.entry(cfg.d).or_insert_with(|| {
                let d = d_max as isize;
                discs.push(
                    disc_offsets(cfg.d)
                        .into_iter()
                        .map(|(dr, dc)| (dr, dc, ((dr + d) as usize) * side + (dc + d) as usize))
                        .collect(),
                );
                discs.len() - 1
            });
            let sel_source = match cfg.source {
                DistanceSource::Noisy => Source::Noisy,
                DistanceSource::Oracle => Source::Clean,
            };
            let sel_dist = key_of((sel_source, cfg.center));
            let noisy_dist = key_of((Source::Noisy, cfg.center));
            let aff = match aff_keys
                .iter()
                .position(|&(k, h)| k == noisy_dist && h.to_bits() == cfg.h.to_bits())
            {
                Some(i) => i,
                None => {
                    aff_keys.push((noisy_dist, cfg.h));
                    aff_keys.len() - 1
                }
            };
            plans.push(CfgPlan {
                disc,
                sel_dist,
                aff,
                self_index: d_max * side + d_max,
            });
        }
        let max_disc = *disc_index
            .get(&d_max)
            .expect("largest radius belongs to some configuration");
        Ok(Plan {
            cfgs,
            border: cfgs[0].border,
            width: v.width(),
            height: v.height(),
            d_max,
            side,
            noisy: Padded::new(v, pad),
            clean: clean_img.map(|u| Padded::new(u, pad)),
            kernel,
            discs,
            dist_keys,
            aff_keys,
            plans,
            max_disc,
        })
    }

    /// Inclusive row and column ranges of the processing domain.
    fn domain_bounds(&self) -> Option<((usize, usize), (usize, usize))> {
        let r = match self.border {
            BorderPolicy::Mirror => 0,
            BorderPolicy::Crop => self.kernel.radius(),
        };
        if self.height < 2 * r + 1 || self.width < 2 * r + 1 {
            return None;
        }
        Some(((r, self.height - 1 - r), (r, self.width - 1 - r)))
    }

    fn padded(&self, src: Source) -> &Padded {
        match src {
            Source::Noisy => &self.noisy,
            Source::Clean => self
                .clean
                .as_ref()
                .expect("clean image present for oracle keys"),
        }
    }

    /// Distances from `x` to every offset of the square whose row offset lies
    /// in `dr_lo..=dr_hi`.
    fn fill_distances(
        &self,
        img: &Padded,
        center: CenterPolicy,
        x: Coord,
        (dr_lo, dr_hi): (isize, isize),
        out: &mut [f64],
    ) {
        let d = self.d_max as isize;
        let side = self.side;
        let (xr, xc) = (x.row as isize, x.col as isize);
        let rows = (dr_lo + d) as usize * side..(dr_hi + d + 1) as usize * side;
        out[rows].fill(0.0);
        for (kr, kc, w) in self.kernel.taps(center) {
            let a = img.at(xr + kr, xc + kc);
            for dr in dr_lo..=dr_hi {
                let src = img.row(xr + dr + kr, xc - d + kc, side);
                let dst = &mut out[(dr + d) as usize * side..][..side];
                for (acc, &b) in dst.iter_mut().zip(src) {
                    let diff = a - b;
                    *acc += w * (diff * diff);
                }
            }
        }
    }

    fn evaluate<R, F>(&self, f: F) -> Evaluation<R>
    where
        R: Send,
        F: Fn(usize, &RowView<'_>) -> R + Sync,
    {
        let Some(((r_lo, r_hi), (c_lo, c_hi))) = self.domain_bounds() else {
            return Evaluation {
                domain: Vec::new(),
                values: self.cfgs.iter().map(|_| Vec::new()).collect(),
            };
        };
        let n_cfg = self.cfgs.len();
        let per_row: Vec<Vec<Vec<R>>> = (r_lo..=r_hi)
            .into_par_iter()
            .map_init(
                || Scratch::new(self),
                |scratch, row| {
                    let mut out: Vec<Vec<R>> = (0..n_cfg)
                        .map(|_| Vec::with_capacity(c_hi - c_lo + 1))
                        .collect();
                    for col in c_lo..=c_hi {
                        self.pixel(
                            Coord::new(row, col),
                            (r_lo, r_hi),
                            (c_lo, c_hi),
                            scratch,
                            &mut out,
                            &f,
                        );
                    }
                    out
                },
            )
            .collect();

        let mut values: Vec<Vec<R>> = (0..n_cfg).map(|_| Vec::new()).collect();
        for row_vals in per_row {
            for (dst, src) in values.iter_mut().zip(row_vals) {
                dst.extend(src);
            }
        }
        let domain = (r_lo..=r_hi)
            .flat_map(|r| (c_lo..=c_hi).map(move |c| Coord::new(r, c)))
            .collect();
        Evaluation { domain, values }
    }

    fn pixel<R, F>(
        &self,
        x: Coord,
        (r_lo, r_hi): (usize, usize),
        (c_lo, c_hi): (usize, usize),
        s: &mut Scratch,
        out: &mut [Vec<R>],
        f: &F,
    ) where
        F: Fn(usize, &RowView<'_>) -> R,
    {
        let d = self.d_max as isize;
        let (xr, xc) = (x.row as isize, x.col as isize);
        let dr_range = ((r_lo as isize - xr).max(-d), (r_hi as isize - xr).min(d));
        let dc_range = ((c_lo as isize - xc).max(-d), (c_hi as isize - xc).min(d));
        let valid = |dr: isize, dc: isize| {
            dr >= dr_range.0 && dr <= dr_range.1 && dc >= dc_range.0 && dc <= dc_range.1
        };

        for (k, &(src, center)) in self.dist_keys.iter().enumerate() {
            let img = self.padded(src);
            self.fill_distances(img, center, x, dr_range, &mut s.dists[k]);
        }
        for (k, &(dist_key, h)) in self.aff_keys.iter().enumerate() {
            let dists = &s.dists[dist_key];
            let aff = &mut s.affs[k];
            for &(dr, dc, sq) in &self.discs[self.max_disc] {
                if valid(dr, dc) {
                    aff[sq] = raw_affinity(dists[sq], h);
                }
            }
        }

        for (i, (cfg, plan)) in self.cfgs.iter().zip(&self.plans).enumerate() {
            s.cand.clear();
            s.cand.extend(
                self.discs[plan.disc]
                    .iter()
                    .filter(|&&(dr, dc, _)| valid(dr, dc))
                    .map(|&(_, _, sq)| sq),
            );
            let sel_dists = &s.dists[plan.sel_dist];
            let cand = &s.cand;
            select_positions(
                cand.len(),
                |j| sel_dists[cand[j]],
                cfg.selection,
                cfg.h,
                &mut s.select,
                &mut s.kept,
            );

            let aff = &s.affs[plan.aff];
            s.weights.clear();
            s.coords.clear();
            let mut self_pos = None;
            for (j, &p) in s.kept.iter().enumerate() {
                let sq = cand[p];
                if sq == plan.self_index {
                    self_pos = Some(j);
                }
                s.weights.push(aff[sq]);
                let dr = (sq / self.side) as isize - d;
                let dc = (sq % self.side) as isize - d;
                s.coords
                    .push(Coord::new((xr + dr) as usize, (xc + dc) as usize));
            }
            normalize_affinities(&mut s.weights, self_pos, cfg.self_weight);
            out[i].push(f(
                i,
                &RowView {
                    center: x,
                    coords: &s.coords,
                    weights: &s.weights,
                },
            ));
        }
    }
}

struct Scratch {
    dists: Vec<Vec<f64>>,
    affs: Vec<Vec<f64>>,
    cand: Vec<usize>,
    kept: Vec<usize>,
    weights: Vec<f64>,
    coords: Vec<Coord>,
    select: SelectScratch,
}

impl Scratch {
    fn new(plan: &Plan<'_>) -> Self {
        let n = plan.side * plan.side;
        Scratch {
            dists: vec![vec![0.0; n]; plan.dist_keys.len()],
            affs: vec![vec![0.0; n]; plan.aff_keys.len()],
            cand: Vec::with_capacity(n),
            kept: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            coords: Vec::with_capacity(n),
            select: SelectScratch::default(),
        }
    }
}

/// Evaluates `f` on the weight row of every domain pixel, for each
/// configuration. The configurations must share patch radius, kernel std and
/// border policy; everything else (radius, selection, source, center policy,
/// `h`, self weight) may differ.
pub(crate) fn evaluate<R, F>(
    v: &GrayImage,
    u: Option<&GrayImage>,
    cfgs: &[DenoiseConfig],
    f: F,
) -> Result<Evaluation<R>>
where
    R: Send,
    F: Fn(usize, &RowView<'_>) -> R + Sync,
{
    Ok(Plan::new(v, u, cfgs)?.evaluate(f))
}

/// NL-means estimate `sum_y w(x, y) v(y)` for every pixel. Under
/// [`BorderPolicy::Crop`] pixels outside the processing domain keep their
/// noisy value.
pub fn denoise(v: &GrayImage, cfg: &DenoiseConfig, u: Option<&GrayImage>) -> Result<GrayImage> {
    let mut out = denoise_batch(v, std::slice::from_ref(cfg), u)?;
    Ok(out.pop().expect("one output per configuration"))
}

/// Denoises `v` once per configuration, sharing the patch-distance work.
pub fn denoise_batch(
    v: &GrayImage,
    cfgs: &[DenoiseConfig],
    u: Option<&GrayImage>,
) -> Result<Vec<GrayImage>> {
    let eval = evaluate(v, u, cfgs, |_, row| row.apply(v))?;
    eval.values
        .into_iter()
        .map(|vals| {
            let mut data = v.data().to_vec();
            for (&c, val) in eval.domain.iter().zip(vals) {
                data[c.row * v.width() + c.col] = val;
            }
            GrayImage::new(v.width(), v.height(), data)
        })
        .collect()
}

/// Weight rows of every pixel of the processing domain, row-major.
pub fn weight_rows(
    v: &GrayImage,
    cfg: &DenoiseConfig,
    u: Option<&GrayImage>,
) -> Result<Vec<WeightRow>> {
    let eval = evaluate(v, u, std::slice::from_ref(cfg), |_, row| {
        let (selected, weights) = row
            .coords
            .iter()
            .zip(row.weights)
            .filter(|&(_, &w)| w > 0.0)
            .map(|(&c, &w)| (c, w))
            .unzip();
        WeightRow {
            center: row.center,
            selected,
            weights,
        }
    })?;
    Ok(eval.values.into_iter().next().unwrap_or_default())
}
