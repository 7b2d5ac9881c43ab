//! Dilated random-convolution transform.
//!
//! Features come from the 84 length-9 kernels with weights in {-1, 2}, each
//! applied at several dilations with several bias values per (kernel,
//! dilation) pair. Every biased activation map is summarised by one of five
//! pooling operators, and the transform can run on the raw series (BASE),
//! its first difference (DIFF), or both concatenated (MIX). That gives the
//! 15 [`ComboId`] feature sets a model can select from.

mod combo;
pub mod convolve;
pub mod features;
pub mod kernel;
pub mod plan;
pub mod pooling;

pub use combo::{ComboId, Representation, RepresentationSet};
pub use convolve::{convolve_dilated, first_difference};
pub use features::{transform, transform_combo, transform_with, FeatureBlock, FeatureMatrix, FeatureSet, Plans};
pub use kernel::{Kernel, KERNEL_LENGTH, NUM_KERNELS};
pub use plan::{fit_dilations, fit_plan, FeatureGroup, TransformPlan, DEFAULT_NUM_FEATURES};
pub use pooling::{call_counts, pool, Pooling};
