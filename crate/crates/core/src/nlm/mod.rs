//! The NL-means estimator and its patch-selection variants.

mod config;
mod engine;
mod naive;
mod select;
mod weights;
mod window;

pub use config::{
    DenoiseConfig, DistanceSource, SelectionRule, SelfWeight, DEFAULT_KERNEL_A,
    DEFAULT_PATCH_RADIUS, DEFAULT_SIGMA, DEFAULT_TOP_K,
};
pub use engine::{denoise, denoise_batch, weight_rows};
pub use naive::naive_reference_denoise;
pub use select::select_similar;
pub use weights::{raw_affinity, weight_row, WeightRow};
pub use window::search_window;

pub(crate) use engine::evaluate;
