//! Patch-based image denoising with the NL-means estimator.
//!
//! The crate is organised in four layers:
//!
//! - [`image`]: grayscale images, PGM/PNG I/O, patch kernels and distances,
//!   seeded Gaussian noise and fidelity metrics.
//! - [`nlm`]: search windows, similar-patch selection (top-k, thresholding,
//!   oracle selection on the clean image), weight rows and the denoiser itself,
//!   together with a deliberately naive reference implementation.
//! - [`diagnostics`]: the exact bias/variance/covariance split of the squared
//!   error, the `R(d)` regularity statistic and Monte-Carlo checks of the
//!   noisy patch distance.
//! - [`experiment`]: corpus ingestion, parameter sweeps and CSV output used by
//!   the `nlm` binary.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod image;
pub mod nlm;
mod sum;

pub use error::{Error, Result};
pub use image::{
    add_gaussian_noise, gaussian_patch_kernel, load_image, mse, patch_distance_sq, psnr,
    save_image, BorderPolicy, CenterPolicy, Coord, GrayImage, NoiseSpec, PatchKernel,
};
pub use nlm::{
    denoise, naive_reference_denoise, raw_affinity, search_window, select_similar, weight_row,
    DenoiseConfig, DistanceSource, SelectionRule, SelfWeight, WeightRow,
};
