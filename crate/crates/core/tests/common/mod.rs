//! Shared fixtures for the integration tests: synthetic datasets, dataset
//! discovery and straight-loop reference implementations.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use selfrocket::TimeSeriesDataset;

/// Directory holding the UCR `<name>_TRAIN.tsv` / `<name>_TEST.tsv` files.
/// Overridable with `SELFROCKET_UCR_DIR`.
pub fn ucr_dir() -> PathBuf {
    std::env::var_os("SELFROCKET_UCR_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/ucr")))
}

pub fn has_ucr(name: &str) -> bool {
    ucr_dir().join(format!("{name}_TRAIN.tsv")).is_file() && ucr_dir().join(format!("{name}_TEST.tsv")).is_file()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn build(name: &str, values: Vec<f64>, t: usize, labels: Vec<usize>, n_classes: usize) -> TimeSeriesDataset {
    let names = (0..n_classes).map(|c| format!("c{c}")).collect();
    TimeSeriesDataset::new(name, values, t, labels, names).unwrap()
}

/// Gaussian noise with one spike per series; the classes differ only in the
/// spike's amplitude (`low` vs `high`, each jittered by ±10%). The spike
/// position is uniform over the middle half of the series and the noise
/// scale is drawn per series from `[0.5, 1.5]`, independently of the class.
pub fn spike_amplitude_dataset(n: usize, t: usize, low: f64, high: f64, seed: u64) -> TimeSeriesDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * t);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let amp = if class == 0 { low } else { high } * rng.random_range(0.9..1.1);
        let pos = rng.random_range(t / 4..3 * t / 4);
        let sigma = rng.random_range(0.5..1.5);
        for j in 0..t {
            let spike = if j == pos { amp } else { 0.0 };
            values.push(sigma * gaussian(&mut rng) + spike);
        }
        labels.push(class);
    }
    build("spike-amplitude", values, t, labels, 2)
}

/// Gaussian noise with balanced random labels: no signal at all.
pub fn noise_dataset(n: usize, t: usize, seed: u64) -> TimeSeriesDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * t).map(|_| gaussian(&mut rng)).collect();
    let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    build("noise", values, t, labels, 2)
}

/// Classes differ in the sign pattern of a square wave: class 0 is positive
/// in the first half, class 1 in the second. Amplitude is shared.
pub fn sign_pattern_dataset(n: usize, t: usize, seed: u64) -> TimeSeriesDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * t);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let shift = rng.random_range(0..t / 8);
        for j in 0..t {
            let first_half = (j + shift) % t < t / 2;
            let level = if first_half == (class == 0) { 1.0 } else { -1.0 };
            values.push(level + 0.3 * gaussian(&mut rng));
        }
        labels.push(class);
    }
    build("sign-pattern", values, t, labels, 2)
}

/// Leave-one-out nearest-centroid accuracy on a scalar per-series statistic.
pub fn nearest_centroid_accuracy(ds: &TimeSeriesDataset, stat: impl Fn(&[f64]) -> f64) -> f64 {
    let x: Vec<f64> = ds.rows().map(&stat).collect();
    let y = ds.labels();
    let k = ds.n_classes();
    let mut hits = 0;
    for i in 0..x.len() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in (0..x.len()).filter(|&j| j != i) {
            sums[y[j]] += x[j];
            counts[y[j]] += 1;
        }
        let pred = (0..k)
            .filter(|&c| counts[c] > 0)
            .min_by(|&a, &b| {
                let da = (x[i] - sums[a] / counts[a] as f64).abs();
                let db = (x[i] - sums[b] / counts[b] as f64).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        hits += usize::from(pred == y[i]);
    }
    hits as f64 / x.len() as f64
}

pub fn max_value(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn fraction_positive(x: &[f64]) -> f64 {
    x.iter().filter(|&&v| v > 0.0).count() as f64 / x.len() as f64
}

/// Straight-loop pooling references.
pub mod reference {
    pub fn ppv(z: &[f64]) -> f64 {
        let mut count = 0;
        for &v in z {
            if v > 0.0 {
                count += 1;
            }
        }
        count as f64 / z.len() as f64
    }

    pub fn gmp(z: &[f64]) -> f64 {
        let mut m = z[0];
        for &v in z {
            if v > m {
                m = v;
            }
        }
        m
    }

    pub fn mpv(z: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut count = 0;
        for &v in z {
            if v > 0.0 {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    pub fn mipv(z: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut count = 0;
        for (i, &v) in z.iter().enumerate() {
            if v > 0.0 {
                sum += i as f64;
                count += 1;
            }
        }
        if count == 0 {
            -1.0
        } else {
            sum / count as f64
        }
    }

    pub fn lspv(z: &[f64]) -> f64 {
        let mut best = 0;
        let mut run = 0;
        for &v in z {
            if v > 0.0 {
                run += 1;
                if run > best {
                    best = run;
                }
            } else {
                run = 0;
            }
        }
        best as f64
    }

    /// Direct dilated sum with optional zero padding of `4 * dilation` per side.
    pub fn convolve(x: &[f64], weights: &[f64; 9], dilation: usize, padding: bool) -> Vec<f64> {
        let n = x.len() as isize;
        let d = dilation as isize;
        let (start, end) = if padding { (-4 * d, n - 4 * d) } else { (0, n - 8 * d) };
        let mut out = Vec::new();
        let mut i = start;
        while i < end {
            let mut s = 0.0;
            for (j, &w) in weights.iter().enumerate() {
                let idx = i + j as isize * d;
                if idx >= 0 && idx < n {
                    s += w * x[idx as usize];
                }
            }
            out.push(s);
            i += 1;
        }
        out
    }
}
