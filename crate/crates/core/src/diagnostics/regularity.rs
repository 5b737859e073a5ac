use super::PatchGeometry;
use crate::error::Result;
use crate::image::{CenterPolicy, GrayImage};
use crate::nlm::{evaluate, DenoiseConfig, DistanceSource, SelectionRule};
use crate::sum::pairwise_mean;

/// One point of the `R(d)` curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityPoint {
    pub d: usize,
    pub r: f64,
}

/// Mean squared deviation `|u(x) - u(y)|^2` between each pixel and the
/// centers of its `k` most similar clean patches (center excluded from the
/// patch distance), averaged over the selected set and then over the domain.
pub fn regularity_curve(
    u: &GrayImage,
    d_values: &[usize],
    k: usize,
    geometry: &PatchGeometry,
) -> Result<Vec<RegularityPoint>> {
    if d_values.is_empty() {
        return Ok(Vec::new());
    }
    let cfgs: Vec<DenoiseConfig> = d_values
        .iter()
        .map(|&d| DenoiseConfig {
            h: 1.0,
            patch_radius: geometry.patch_radius,
            kernel_a: geometry.kernel_a,
            border: geometry.border,
            selection: SelectionRule::TopK(k),
            source: DistanceSource::Oracle,
            center: CenterPolicy::Exclude,
            ..DenoiseConfig::new(0.0, d)
        })
        .collect();
    let eval = evaluate(u, Some(u), &cfgs, |_, row| {
        let ux = u.get(row.center);
        let total = row.coords.iter().fold(0.0, |acc, &y| {
            let diff = ux - u.get(y);
            acc + diff * diff
        });
        total / row.coords.len() as f64
    })?;
    Ok(d_values
        .iter()
        .zip(&eval.values)
        .map(|(&d, per_pixel)| RegularityPoint {
            d,
            r: pairwise_mean(per_pixel),
        })
        .collect())
}
