use super::GrayImage;
use crate::error::Result;

const PEAK: f64 = 255.0;

/// Mean squared difference over all pixels.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_shape(b)?;
    let total: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(total / a.len() as f64)
}

/// `10 log10(255^2 / mse)` in dB; `+inf` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub(crate) fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(PEAK * PEAK / mse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_images() {
        let a = GrayImage::filled(3, 3, 42.0).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn constant_offset_of_sixteen() {
        let a = GrayImage::from_fn(5, 4, |c| (c.row + c.col) as f64).unwrap();
        let b = a.map(|v| v + 16.0).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 256.0);
        assert_eq!(mse(&b, &a).unwrap(), 256.0);
        assert!((psnr(&a, &b).unwrap() - 24.048_403_955_560_61).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let a = GrayImage::filled(3, 3, 0.0).unwrap();
        let b = GrayImage::filled(3, 4, 0.0).unwrap();
        assert!(mse(&a, &b).is_err());
        assert!(psnr(&a, &b).is_err());
    }
}
