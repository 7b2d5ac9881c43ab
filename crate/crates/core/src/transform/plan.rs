//! Fitting of the dilation, bias and padding schedule.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::convolve::{convolve_padded_into, first_difference};
use super::kernel::{Kernel, KERNEL_LENGTH, NUM_KERNELS};
use super::Representation;
use crate::seed::{rng_for, SeedPart};
use crate::{Error, Result, TimeSeriesDataset};

/// 119 feature slots per kernel, 9,996 features per representation.
pub const DEFAULT_NUM_FEATURES: usize = 9_996;
/// Upper bound on the number of (pre-deduplication) dilations per kernel.
pub const MAX_DILATIONS_PER_KERNEL: usize = 32;
/// Shortest series (after applying the representation) a plan can be fitted on.
pub const MIN_EFFECTIVE_LENGTH: usize = 10;

/// Golden-ratio conjugate driving the low-discrepancy quantile positions.
const PHI: f64 = 0.618_033_988_749_895;

/// Frozen kernel/dilation/bias/padding schedule for one representation.
///
/// Features are laid out kernel-major, then by dilation, then by bias slot:
/// feature `kernel * Σfpd + Σ_{d' < d} fpd[d'] + slot`, where `fpd` is
/// `features_per_dilation`. Every slot of a (kernel, dilation) group shares
/// one activation map and one padding flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformPlan {
    representation: Representation,
    input_length: usize,
    dilations: Vec<usize>,
    features_per_dilation: Vec<usize>,
    /// One flag per (kernel, dilation) group, kernel-major.
    paddings: Vec<bool>,
    biases: Vec<f64>,
    seed: u64,
}

/// One (kernel, dilation) group of consecutive features.
#[derive(Debug, Clone)]
pub struct FeatureGroup {
    pub kernel: Kernel,
    pub kernel_index: usize,
    pub dilation_index: usize,
    pub dilation: usize,
    pub padding: bool,
    pub features: Range<usize>,
}

impl TransformPlan {
    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Raw series length the plan was fitted for.
    pub fn input_length(&self) -> usize {
        self.input_length
    }

    /// Length of the represented series the kernels run over.
    pub fn effective_length(&self) -> usize {
        self.representation.effective_length(self.input_length)
    }

    pub fn dilations(&self) -> &[usize] {
        &self.dilations
    }

    pub fn features_per_dilation(&self) -> &[usize] {
        &self.features_per_dilation
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_features(&self) -> usize {
        self.biases.len()
    }

    fn slots_per_kernel(&self) -> usize {
        self.features_per_dilation.iter().sum()
    }

    pub fn padding(&self, kernel_index: usize, dilation_index: usize) -> bool {
        self.paddings[kernel_index * self.dilations.len() + dilation_index]
    }

    /// All (kernel, dilation) groups in feature order.
    pub fn groups(&self) -> Vec<FeatureGroup> {
        let kernels = Kernel::all();
        let per_kernel = self.slots_per_kernel();
        let mut out = Vec::with_capacity(NUM_KERNELS * self.dilations.len());
        for (ki, kernel) in kernels.into_iter().enumerate() {
            let mut start = ki * per_kernel;
            for (di, (&dilation, &count)) in self.dilations.iter().zip(&self.features_per_dilation).enumerate() {
                out.push(FeatureGroup {
                    kernel,
                    kernel_index: ki,
                    dilation_index: di,
                    dilation,
                    padding: self.padding(ki, di),
                    features: start..start + count,
                });
                start += count;
            }
        }
        out
    }

    /// Applies the plan's representation to a raw series.
    pub fn represent(&self, x: &[f64]) -> Result<Vec<f64>> {
        apply_representation(self.representation, x)
    }

    /// Checks internal consistency, e.g. after deserialisation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("transform plan: {msg}")));
        let t = self.effective_length();
        if t < MIN_EFFECTIVE_LENGTH {
            return bad(format!("effective length {t} below {MIN_EFFECTIVE_LENGTH}"));
        }
        if self.dilations.is_empty() || self.dilations.len() != self.features_per_dilation.len() {
            return bad("dilation and slot-count lists disagree".into());
        }
        if self.paddings.len() != NUM_KERNELS * self.dilations.len() {
            return bad("padding list has the wrong length".into());
        }
        if self.biases.len() != NUM_KERNELS * self.slots_per_kernel() {
            return bad("bias list has the wrong length".into());
        }
        if let Some(&d) = self.dilations.iter().find(|&&d| d == 0 || (KERNEL_LENGTH - 1) * d > t - 1) {
            return bad(format!("dilation {d} does not fit series length {t}"));
        }
        if self.biases.iter().any(|b| !b.is_finite()) {
            return bad("non-finite bias".into());
        }
        Ok(())
    }
}

pub(crate) fn apply_representation(rep: Representation, x: &[f64]) -> Result<Vec<f64>> {
    match rep {
        Representation::Base => Ok(x.to_vec()),
        Representation::Diff => first_difference(x),
    }
}

/// Exponentially spaced dilations and the number of bias slots at each.
///
/// `MAX_DILATIONS_PER_KERNEL` (or fewer) exponents are spaced evenly on
/// `[0, log2((T - 1) / 8)]`, floored to integers and deduplicated; each
/// distinct dilation receives slots in proportion to how many exponents
/// mapped onto it, and the rounding remainder goes to the smallest dilations.
pub fn fit_dilations(effective_length: usize, num_features: usize) -> (Vec<usize>, Vec<usize>) {
    let per_kernel = num_features / NUM_KERNELS;
    let true_max = per_kernel.min(MAX_DILATIONS_PER_KERNEL);
    let multiplier = per_kernel as f64 / true_max as f64;
    let max_exponent = ((effective_length - 1) as f64 / (KERNEL_LENGTH - 1) as f64).log2();

    let mut dilations: Vec<usize> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for j in 0..true_max {
        let exponent = if true_max == 1 {
            0.0
        } else if j == true_max - 1 {
            max_exponent
        } else {
            j as f64 * (max_exponent / (true_max - 1) as f64)
        };
        let d = (2f64.powf(exponent).floor() as usize).max(1);
        match dilations.last() {
            Some(&last) if last == d => *counts.last_mut().expect("non-empty") += 1,
            _ => {
                dilations.push(d);
                counts.push(1);
            }
        }
    }
    let mut slots: Vec<usize> = counts.iter().map(|&c| (c as f64 * multiplier) as usize).collect();
    let mut remainder = per_kernel - slots.iter().sum::<usize>();
    let mut i = 0;
    while remainder > 0 {
        slots[i] += 1;
        remainder -= 1;
        i = (i + 1) % slots.len();
    }
    (dilations, slots)
}

/// Quantile with linear interpolation between order statistics of `sorted`.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Low-discrepancy quantile position of feature `i`.
pub(crate) fn quantile_position(i: usize) -> f64 {
    ((i + 1) as f64 * PHI) % 1.0
}

/// Fits a plan on `train` for one representation.
///
/// Each (kernel, dilation) group draws one training series uniformly at
/// random, convolves its represented form with zero padding, and takes its
/// biases as quantiles of that activation map. Padding alternates between
/// groups: a group is padded when `kernel_index + dilation_index` is even.
pub fn fit_plan(
    train: &TimeSeriesDataset,
    num_features_target: usize,
    representation: Representation,
    seed: u64,
) -> Result<TransformPlan> {
    if train.is_empty() {
        return Err(Error::EmptyInput("cannot fit a transform plan on an empty training set".into()));
    }
    let input_length = train.series_length();
    let t = representation.effective_length(input_length);
    if t < MIN_EFFECTIVE_LENGTH {
        return Err(Error::SeriesTooShort { len: t, min: MIN_EFFECTIVE_LENGTH });
    }
    if num_features_target < NUM_KERNELS {
        return Err(Error::Config(format!(
            "feature count must be at least {NUM_KERNELS}, got {num_features_target}"
        )));
    }
    let (dilations, features_per_dilation) = fit_dilations(t, num_features_target);
    let n_dil = dilations.len();
    let per_kernel: usize = features_per_dilation.iter().sum();
    let mut paddings = vec![false; NUM_KERNELS * n_dil];
    for ki in 0..NUM_KERNELS {
        for di in 0..n_dil {
            paddings[ki * n_dil + di] = (ki + di) % 2 == 0;
        }
    }

    let kernels = Kernel::all();
    let mut rng = rng_for(seed, &[SeedPart::Str("plan"), SeedPart::Str(representation.name())]);
    let mut biases = vec![0.0; NUM_KERNELS * per_kernel];
    let mut map = Vec::with_capacity(t);
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; train.len()];
    let mut offset = 0;
    for (di, &dilation) in dilations.iter().enumerate() {
        let slots = features_per_dilation[di];
        for (ki, kernel) in kernels.iter().enumerate() {
            let idx = rng.random_range(0..train.len());
            if cache[idx].is_none() {
                cache[idx] = Some(apply_representation(representation, train.row(idx))?);
            }
            let x = cache[idx].as_deref().expect("cached above");
            convolve_padded_into(x, &kernel.weights(), dilation, &mut map);
            map.sort_unstable_by(f64::total_cmp);
            let start = ki * per_kernel + offset;
            for (f, bias) in biases.iter_mut().enumerate().skip(start).take(slots) {
                *bias = quantile(&map, quantile_position(f));
            }
        }
        offset += slots;
    }

    let plan = TransformPlan {
        representation,
        input_length,
        dilations,
        features_per_dilation,
        paddings,
        biases,
        seed,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_dataset, LabelPosition};

    fn random_dataset(n: usize, t: usize, seed: u64) -> TimeSeriesDataset {
        let mut rng = rng_for(seed, &[]);
        let text: String = (0..n)
            .map(|i| {
                let vals: Vec<String> = (0..t).map(|_| rng.random_range(-2.0..2.0f64).to_string()).collect();
                format!("{}\t{}\n", i % 2, vals.join("\t"))
            })
            .collect();
        parse_dataset(&text, "rand", None, LabelPosition::FirstColumn).unwrap()
    }

    #[test]
    fn coffee_length_dilations() {
        // A = log2(285 / 8) = 5.155, so the largest dilation is floor(2^A) = 35.
        let (dilations, slots) = fit_dilations(286, DEFAULT_NUM_FEATURES);
        assert_eq!(*dilations.first().unwrap(), 1);
        assert_eq!(*dilations.last().unwrap(), 35);
        assert!(dilations.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(slots.iter().sum::<usize>(), 119);
        assert!(dilations.iter().all(|&d| 8 * d <= 285));
    }

    #[test]
    fn remainder_goes_to_small_dilations() {
        let (dilations, slots) = fit_dilations(286, DEFAULT_NUM_FEATURES);
        assert_eq!(dilations.len(), slots.len());
        // 119 / 32 = 3.72 slots per exponent, so no dilation gets fewer than 3.
        assert!(slots.iter().all(|&s| s >= 3));
        assert!(slots[0] >= *slots.last().unwrap());
    }

    #[test]
    fn minimal_feature_budget() {
        let (dilations, slots) = fit_dilations(100, 84);
        assert_eq!(dilations, vec![1]);
        assert_eq!(slots, vec![1]);
        let ds = random_dataset(4, 30, 1);
        let plan = fit_plan(&ds, 84, Representation::Base, 0).unwrap();
        assert_eq!(plan.num_features(), 84);
    }

    #[test]
    fn default_plan_has_9996_features_and_is_deterministic() {
        let ds = random_dataset(6, 64, 2);
        let a = fit_plan(&ds, DEFAULT_NUM_FEATURES, Representation::Base, 11).unwrap();
        let b = fit_plan(&ds, DEFAULT_NUM_FEATURES, Representation::Base, 11).unwrap();
        let c = fit_plan(&ds, DEFAULT_NUM_FEATURES, Representation::Base, 12).unwrap();
        assert_eq!(a.num_features(), 9_996);
        assert_eq!(a, b);
        assert_eq!(
            a.biases().iter().map(|b| b.to_bits()).collect::<Vec<_>>(),
            b.biases().iter().map(|b| b.to_bits()).collect::<Vec<_>>()
        );
        assert_ne!(a.biases(), c.biases());
        let max_d = 2f64.powf((63.0f64 / 8.0).log2()).floor() as usize;
        assert!(a.dilations().iter().all(|&d| d <= max_d));
    }

    #[test]
    fn groups_cover_features_in_order() {
        let ds = random_dataset(3, 40, 3);
        let plan = fit_plan(&ds, 840, Representation::Diff, 0).unwrap();
        let groups = plan.groups();
        assert_eq!(groups.len(), NUM_KERNELS * plan.dilations().len());
        let mut next = 0;
        for g in &groups {
            assert_eq!(g.features.start, next);
            next = g.features.end;
            assert_eq!(g.padding, (g.kernel_index + g.dilation_index) % 2 == 0);
        }
        assert_eq!(next, plan.num_features());
    }

    #[test]
    fn short_or_empty_inputs_are_rejected() {
        let ds = random_dataset(3, 10, 4);
        assert!(fit_plan(&ds, 840, Representation::Base, 0).is_ok());
        assert!(matches!(
            fit_plan(&ds, 840, Representation::Diff, 0),
            Err(Error::SeriesTooShort { len: 9, min: 10 })
        ));
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let sorted = [0.0, 1.0, 2.0, 10.0];
        assert_eq!(quantile(&sorted, 0.0), 0.0);
        assert_eq!(quantile(&sorted, 1.0), 10.0);
        assert!((quantile(&sorted, 0.5) - 1.5).abs() < 1e-15);
        assert!((quantile_position(0) - 0.618_033_988_749_895).abs() < 1e-15);
        assert!((0..1000).map(quantile_position).all(|q| (0.0..1.0).contains(&q)));
    }
}
