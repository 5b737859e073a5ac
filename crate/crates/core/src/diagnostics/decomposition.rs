use crate::error::Result;
use crate::image::GrayImage;
use crate::nlm::{denoise_batch, evaluate, DenoiseConfig};
use crate::sum::pairwise_mean;

/// Squared-error split of one estimator configuration, averaged over the
/// processing domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    /// Mean of `(sum_y w(x,y) (u(y) - u(x)))^2`.
    pub bias: f64,
    /// Mean of `(sum_y w(x,y) b(y))^2`.
    pub variance: f64,
    /// Mean of `2 (sum_y w(x,y) b(y)) (sum_y w(x,y) (u(y) - u(x)))`.
    pub covariance: f64,
    /// Mean of `(u_hat(x) - u(x))^2`, computed from the denoised image.
    pub eqm: f64,
    pub d: usize,
    pub variant_label: String,
}

impl DecompositionReport {
    pub fn term_sum(&self) -> f64 {
        self.bias + self.variance + self.covariance
    }

    /// `|eqm - (bias + variance + covariance)| / eqm`.
    pub fn relative_gap(&self) -> f64 {
        let gap = (self.eqm - self.term_sum()).abs();
        if self.eqm == 0.0 {
            gap
        } else {
            gap / self.eqm
        }
    }
}

/// Decomposes the squared error of the estimator on `v = u + b`.
pub fn decompose_eqm(
    u: &GrayImage,
    b: &GrayImage,
    cfg: &DenoiseConfig,
) -> Result<DecompositionReport> {
    let mut reports = decompose_eqm_batch(u, b, std::slice::from_ref(cfg))?;
    Ok(reports.pop().expect("one report per configuration"))
}

/// [`decompose_eqm`] for several configurations sharing patch geometry.
///
/// The three terms come from the weight rows; `eqm` is measured separately on
/// the denoised image, so `eqm = bias + variance + covariance` is a genuine
/// cross-check of unit-sum weights.
pub fn decompose_eqm_batch(
    u: &GrayImage,
    b: &GrayImage,
    cfgs: &[DenoiseConfig],
) -> Result<Vec<DecompositionReport>> {
    let v = u.add(b)?;
    let eval = evaluate(&v, Some(u), cfgs, |_, row| {
        let ux = u.get(row.center);
        let mut along_signal = 0.0;
        let mut along_noise = 0.0;
        for (&y, &w) in row.coords.iter().zip(row.weights) {
            along_signal += w * (u.get(y) - ux);
            along_noise += w * b.get(y);
        }
        (along_signal, along_noise)
    })?;
    let estimates = denoise_batch(&v, cfgs, Some(u))?;

    let mut reports = Vec::with_capacity(cfgs.len());
    for ((cfg, terms), est) in cfgs.iter().zip(&eval.values).zip(&estimates) {
        let bias: Vec<f64> = terms.iter().map(|&(s, _)| s * s).collect();
        let variance: Vec<f64> = terms.iter().map(|&(_, n)| n * n).collect();
        let covariance: Vec<f64> = terms.iter().map(|&(s, n)| 2.0 * n * s).collect();
        let sq_err: Vec<f64> = eval
            .domain
            .iter()
            .map(|&x| {
                let e = est.get(x) - u.get(x);
                e * e
            })
            .collect();
        reports.push(DecompositionReport {
            bias: pairwise_mean(&bias),
            variance: pairwise_mean(&variance),
            covariance: pairwise_mean(&covariance),
            eqm: pairwise_mean(&sq_err),
            d: cfg.d,
            variant_label: cfg.label(),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{add_gaussian_noise, CenterPolicy, NoiseSpec};
    use crate::nlm::{DistanceSource, SelectionRule};

    fn scene(n: usize) -> GrayImage {
        GrayImage::from_fn(n, n, |c| {
            let base = if (c.row / 6 + c.col / 5) % 2 == 0 {
                60.0
            } else {
                170.0
            };
            base + ((c.row * 7 + c.col * 3) % 11) as f64
        })
        .unwrap()
    }

    fn cfg(source: DistanceSource, d: usize) -> DenoiseConfig {
        DenoiseConfig {
            selection: SelectionRule::TopK(20),
            source,
            center: CenterPolicy::Exclude,
            ..DenoiseConfig::new(20.0, d)
        }
    }

    #[test]
    fn noiseless_reduces_to_bias() {
        let u = scene(24);
        let b = GrayImage::filled(24, 24, 0.0).unwrap();
        let r = decompose_eqm(&u, &b, &cfg(DistanceSource::Noisy, 4)).unwrap();
        assert_eq!(r.variance, 0.0);
        assert_eq!(r.covariance, 0.0);
        assert!((r.eqm - r.bias).abs() <= 1e-9 * r.eqm);
        assert!(r.bias > 0.0);
    }

    #[test]
    fn constant_image_reduces_to_variance() {
        let u = GrayImage::filled(24, 24, 90.0).unwrap();
        let (_, b) = add_gaussian_noise(&u, &NoiseSpec::new(20.0, 5)).unwrap();
        let r = decompose_eqm(&u, &b, &cfg(DistanceSource::Oracle, 5)).unwrap();
        assert_eq!(r.bias, 0.0);
        assert_eq!(r.covariance, 0.0);
        assert!((r.eqm - r.variance).abs() <= 1e-9 * r.eqm);
    }

    #[test]
    fn terms_add_up() {
        let u = scene(32);
        let (_, b) = add_gaussian_noise(&u, &NoiseSpec::new(20.0, 11)).unwrap();
        let cfgs = [
            cfg(DistanceSource::Noisy, 3),
            cfg(DistanceSource::Oracle, 8),
        ];
        for r in decompose_eqm_batch(&u, &b, &cfgs).unwrap() {
            assert!(r.relative_gap() < 1e-9, "{r:?}");
            assert!(r.bias >= 0.0 && r.variance >= 0.0);
        }
    }
}
