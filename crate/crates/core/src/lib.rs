//! Corruption-overlap auditing for image robustness benchmarks.
//!
//! The crate measures how much robustness to one image corruption
//! transfers to another. For a corruption pair it trains a standard model
//! and one model per corruption (augmented with that corruption), computes
//! robustness scores `R = A_corrupted / A_clean`, and combines them into a
//! normalized overlap score in which 1 means complete overlap and 0 means
//! no correlation. Overlap matrices over a whole benchmark feed balance
//! reports (does one corruption dominate?) and coverage checks (is a
//! candidate corruption already covered?).
//!
//! The numeric core is generic over the [`scalar::Scalar`] float type;
//! the aliases below fix the precision used by the standard pipeline
//! (f32 images and training, f64 scores).

pub mod analysis;
pub mod corruptions;
pub mod data;
pub mod error;
pub mod heatmap;
pub mod image;
pub mod kernel;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod scores;
pub mod trainer;

pub use error::{Error, Result};

/// Pixel/parameter precision of the standard training pipeline.
pub type Image32 = image::Image<f32>;
pub type Image64 = image::Image<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Dataset64 = data::Dataset<f64>;

/// Crate version recorded in manifests and checkpoints.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
