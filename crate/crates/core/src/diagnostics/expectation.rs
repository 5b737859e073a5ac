use super::PatchGeometry;
use crate::error::{Error, Result};
use crate::image::{
    add_gaussian_noise, patch_distance_sq, CenterPolicy, Coord, GrayImage, NoiseSpec,
};
use crate::sum::pairwise_mean;

/// Monte-Carlo estimate of `E ||V(x) - V(y)||^2 - ||U(x) - U(y)||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationCheck {
    pub x: Coord,
    pub y: Coord,
    pub sigma: f64,
    pub trials: usize,
    pub empirical_offset: f64,
    pub std_error: f64,
}

impl ExpectationCheck {
    /// The value the offset should converge to, `2 sigma^2`.
    pub fn expected_offset(&self) -> f64 {
        2.0 * self.sigma * self.sigma
    }

    /// Distance between the estimate and `2 sigma^2` in standard errors.
    pub fn z_score(&self) -> f64 {
        let gap = self.empirical_offset - self.expected_offset();
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            gap / self.std_error
        }
    }
}

pub const MIN_TRIALS: usize = 100;

/// Draws `trials` noise realizations (seeds `seed, seed + 1, ...`) and returns
/// the sample mean of the distance offset and its standard error. Distances
/// use the full patch, center included.
pub fn expected_distance_check(
    u: &GrayImage,
    x: Coord,
    y: Coord,
    sigma: f64,
    trials: usize,
    seed: u64,
    geometry: &PatchGeometry,
) -> Result<ExpectationCheck> {
    if x == y {
        return Err(Error::InvalidParameter(
            "expectation check needs two distinct patch centers".into(),
        ));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "expectation check needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let kernel = geometry.kernel()?;
    let distance = |img: &GrayImage| {
        patch_distance_sq(img, x, y, &kernel, CenterPolicy::Include, geometry.border)
    };
    let clean = distance(u)?;
    let offsets = (0..trials as u64)
        .map(|t| {
            let (v, _) = add_gaussian_noise(u, &NoiseSpec::new(sigma, seed.wrapping_add(t)))?;
            Ok(distance(&v)? - clean)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mean = pairwise_mean(&offsets);
    let dev: Vec<f64> = offsets.iter().map(|o| (o - mean) * (o - mean)).collect();
    let n = trials as f64;
    let sample_var = pairwise_mean(&dev) * n / (n - 1.0);
    Ok(ExpectationCheck {
        x,
        y,
        sigma,
        trials,
        empirical_offset: mean,
        std_error: (sample_var / n).sqrt(),
    })
}

/// The two noise-dependent terms of
/// `||V(x)-V(y)||^2 = ||U(x)-U(y)||^2 + ||B(x)-B(y)||^2 + 2 <B(x)-B(y), U(x)-U(y)>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationTerms {
    /// `||B(x) - B(y)||^2`.
    pub noise_term: f64,
    /// `2 <B(x) - B(y), U(x) - U(y)>`, which can be negative.
    pub cross_term: f64,
}

pub fn distance_perturbation_terms(
    u: &GrayImage,
    b: &GrayImage,
    x: Coord,
    y: Coord,
    geometry: &PatchGeometry,
    center: CenterPolicy,
) -> Result<PerturbationTerms> {
    u.same_shape(b)?;
    let kernel = geometry.kernel()?;
    for c in [x, y] {
        if !geometry
            .border
            .in_domain(c, u.width(), u.height(), geometry.patch_radius)
        {
            return Err(Error::OutsideDomain {
                row: c.row,
                col: c.col,
            });
        }
    }
    let (xr, xc) = (x.row as isize, x.col as isize);
    let (yr, yc) = (y.row as isize, y.col as isize);
    let mut noise_term = 0.0;
    let mut inner = 0.0;
    for (dr, dc, w) in kernel.taps(center) {
        let db = b.get_reflected(xr + dr, xc + dc) - b.get_reflected(yr + dr, yc + dc);
        let du = u.get_reflected(xr + dr, xc + dc) - u.get_reflected(yr + dr, yc + dc);
        noise_term += w * (db * db);
        inner += w * (db * du);
    }
    Ok(PerturbationTerms {
        noise_term,
        cross_term: 2.0 * inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(n: usize) -> GrayImage {
        GrayImage::from_fn(n, n, |c| ((c.row * 13 + c.col * 29) % 64) as f64 * 3.0).unwrap()
    }

    #[test]
    fn zero_sigma_gives_exact_zero() {
        let u = clean(24);
        let r = expected_distance_check(
            &u,
            Coord::new(6, 6),
            Coord::new(15, 17),
            0.0,
            100,
            1,
            &PatchGeometry::default(),
        )
        .unwrap();
        assert_eq!(r.empirical_offset, 0.0);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.z_score(), 0.0);
    }

    #[test]
    fn argument_errors() {
        let u = clean(16);
        let g = PatchGeometry::default();
        let x = Coord::new(8, 8);
        assert!(expected_distance_check(&u, x, x, 20.0, 500, 0, &g).is_err());
        assert!(expected_distance_check(&u, x, Coord::new(8, 9), 20.0, 99, 0, &g).is_err());
    }

    #[test]
    fn perturbation_identity() {
        let u = clean(10);
        let (v, b) = add_gaussian_noise(&u, &NoiseSpec::new(20.0, 3)).unwrap();
        let g = PatchGeometry::default();
        let k = g.kernel().unwrap();
        for center in [CenterPolicy::Include, CenterPolicy::Exclude] {
            for (x, y) in [
                (Coord::new(0, 0), Coord::new(9, 9)),
                (Coord::new(4, 5), Coord::new(5, 3)),
            ] {
                let t = distance_perturbation_terms(&u, &b, x, y, &g, center).unwrap();
                let du = patch_distance_sq(&u, x, y, &k, center, g.border).unwrap();
                let dv = patch_distance_sq(&v, x, y, &k, center, g.border).unwrap();
                assert!((du + t.noise_term + t.cross_term - dv).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_inputs() {
        let u = clean(12);
        let zero = GrayImage::filled(12, 12, 0.0).unwrap();
        let g = PatchGeometry::default();
        let t = distance_perturbation_terms(
            &u,
            &zero,
            Coord::new(3, 3),
            Coord::new(8, 7),
            &g,
            CenterPolicy::Include,
        )
        .unwrap();
        assert_eq!((t.noise_term, t.cross_term), (0.0, 0.0));

        let flat = GrayImage::filled(12, 12, 50.0).unwrap();
        let (_, b) = add_gaussian_noise(&flat, &NoiseSpec::new(20.0, 9)).unwrap();
        let t = distance_perturbation_terms(
            &flat,
            &b,
            Coord::new(3, 3),
            Coord::new(8, 7),
            &g,
            CenterPolicy::Include,
        )
        .unwrap();
        assert_eq!(t.cross_term, 0.0);
        assert!(t.noise_term > 0.0);
    }
}
