//! Seeded additive white Gaussian noise.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`),
//! whose output stream is fixed by its specification. Uniforms take the top
//! 53 bits of each 64-bit word, and normals come from the Box-Muller
//! transform evaluated with `libm` so the result does not depend on the host
//! math library. Samples are produced in pairs `(r cos t, r sin t)` and
//! assigned to pixels in row-major order.

use std::f64::consts::TAU;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use super::GrayImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma: 20.0,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Self {
        NoiseSpec { sigma, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Standard normal samples, deterministic for a given seed.
pub(crate) struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub(crate) fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub(crate) fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * INV_2_53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * INV_2_53;
        let r = (-2.0 * libm::log(u1)).sqrt();
        let t = TAU * u2;
        self.spare = Some(r * libm::sin(t));
        r * libm::cos(t)
    }
}

/// Returns `(noisy, noise)` with `noisy = img + noise` and the noise drawn
/// i.i.d. from `N(0, sigma^2)`. Nothing is clamped.
pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<(GrayImage, GrayImage)> {
    spec.validate()?;
    let mut stream = GaussianStream::new(spec.seed);
    let noise_data: Vec<f64> = (0..img.len())
        .map(|_| spec.sigma * stream.next_standard())
        .collect();
    let noise = GrayImage::new(img.width(), img.height(), noise_data)?;
    let noisy = img.add(&noise)?;
    Ok((noisy, noise))
}
