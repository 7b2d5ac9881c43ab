//! Random-convolution time series classification with automatic selection
//! of the input representation and pooling operator.
//!
//! The crate is organised around the training pipeline:
//!
//! - [`data`]: UCR-style dataset loading, normalisation, stratified resampling
//!   and train/validation split generation.
//! - [`transform`]: the fixed 84-kernel dilated convolution transform and the
//!   five pooling operators (PPV, GMP, MPV, MIPV, LSPV) applied to the base
//!   series, its first difference, or both.
//! - [`ridge`]: closed-form ridge classifier with leave-one-out alpha search.
//! - [`selection`]: the voting module that picks one (representation, pooling)
//!   combination from mini-classifier validation accuracies.
//! - [`pipeline`]: the end-to-end estimator, oracle diagnostics and model files.
//! - [`bench`]: the dataset × resample benchmark harness used by the CLI.

pub mod bench;
pub mod cli;
pub mod data;
mod error;
pub mod pipeline;
pub mod ridge;
pub mod seed;
pub mod selection;
pub mod transform;

pub use data::{Delimiter, SplitKind, SplitSpec, TimeSeriesDataset};
pub use error::{Error, Result, Stage};
pub use pipeline::{FitMode, FittedModel, OracleReport};
pub use ridge::RidgeModel;
pub use selection::{PerformanceTable, SelectionConfig, SelectionOutcome};
pub use transform::{ComboId, FeatureSet, Pooling, Representation, RepresentationSet, TransformPlan};

/// Library version string embedded in model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
