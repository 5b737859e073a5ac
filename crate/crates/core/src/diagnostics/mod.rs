//! Error analysis of the estimator: bias/variance/covariance split of the
//! squared error, the `R(d)` regularity statistic of the clean image, and
//! Monte-Carlo checks of how noise perturbs patch distances.

mod decomposition;
mod expectation;
mod regularity;

pub use decomposition::{decompose_eqm, decompose_eqm_batch, DecompositionReport};
pub use expectation::{
    distance_perturbation_terms, expected_distance_check, ExpectationCheck, PerturbationTerms,
};
pub use regularity::{regularity_curve, RegularityPoint};

use crate::image::{BorderPolicy, PatchKernel};
use crate::nlm::{DenoiseConfig, DEFAULT_KERNEL_A, DEFAULT_PATCH_RADIUS};
use crate::Result;

/// Patch footprint parameters shared by the diagnostics that do not need a
/// full estimator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub patch_radius: usize,
    pub kernel_a: f64,
    pub border: BorderPolicy,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        PatchGeometry {
            patch_radius: DEFAULT_PATCH_RADIUS,
            kernel_a: DEFAULT_KERNEL_A,
            border: BorderPolicy::Mirror,
        }
    }
}

impl PatchGeometry {
    pub fn kernel(&self) -> Result<PatchKernel> {
        PatchKernel::gaussian(self.patch_radius, self.kernel_a)
    }
}

impl From<&DenoiseConfig> for PatchGeometry {
    fn from(cfg: &DenoiseConfig) -> Self {
        PatchGeometry {
            patch_radius: cfg.patch_radius,
            kernel_a: cfg.kernel_a,
            border: cfg.border,
        }
    }
}
