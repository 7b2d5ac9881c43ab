//! Pooling operators summarising an activation map into one feature.
//!
//! All operators treat an entry as positive only when it is strictly greater
//! than zero.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pooling {
    /// Proportion of positive values.
    Ppv,
    /// Global max pooling.
    Gmp,
    /// Mean of positive values, 0 when there are none.
    Mpv,
    /// Mean of the 0-based indices of positive values, -1 when there are none.
    Mipv,
    /// Length of the longest run of consecutive positive values.
    Lspv,
}

impl Pooling {
    pub const ALL: [Pooling; 5] = [Pooling::Ppv, Pooling::Gmp, Pooling::Mpv, Pooling::Mipv, Pooling::Lspv];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Pooling::Ppv => "PPV",
            Pooling::Gmp => "GMP",
            Pooling::Mpv => "MPV",
            Pooling::Mipv => "MIPV",
            Pooling::Lspv => "LSPV",
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pooling::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown pooling operator '{s}'")))
    }
}

/// Applies `op` to the activation map `z`.
pub fn pool(z: &[f64], op: Pooling) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Shape("cannot pool an empty activation map".into()));
    }
    Ok(pool_biased(z, 0.0, op))
}

static CALLS: [AtomicU64; 5] = [const { AtomicU64::new(0) }; 5];

/// Number of biased activation maps pooled so far with each operator, in
/// [`Pooling::ALL`] order. Counts are process-wide and only ever increase.
pub fn call_counts() -> [u64; 5] {
    std::array::from_fn(|i| CALLS[i].load(Ordering::Relaxed))
}

fn record(op: Pooling, maps: u64) {
    CALLS[op.index()].fetch_add(maps, Ordering::Relaxed);
}

/// Pools `z - bias` with a single operator.
pub(crate) fn pool_biased(z: &[f64], bias: f64, op: Pooling) -> f64 {
    match op {
        Pooling::Ppv => ppv(z, bias),
        Pooling::Gmp => gmp(z, bias),
        Pooling::Mpv => mpv(z, bias),
        Pooling::Mipv => mipv(z, bias),
        Pooling::Lspv => lspv(z, bias),
    }
}

/// Pools `z - bias` for each bias with `op`, writing one value per bias.
pub(crate) fn pool_slots(z: &[f64], biases: &[f64], op: Pooling, out: &mut [f64]) {
    record(op, biases.len() as u64);
    for (o, &b) in out.iter_mut().zip(biases) {
        *o = pool_biased(z, b, op);
    }
}

/// All five operators of `z - bias` in one pass, in [`Pooling::ALL`] order.
pub(crate) fn pool_all_slots(z: &[f64], biases: &[f64], out: &mut [[f64; 5]]) {
    for op in Pooling::ALL {
        record(op, biases.len() as u64);
    }
    for (o, &b) in out.iter_mut().zip(biases) {
        *o = pool_all(z, b);
    }
}

fn pool_all(z: &[f64], bias: f64) -> [f64; 5] {
    let mut count = 0usize;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut index_sum = 0usize;
    let mut run = 0usize;
    let mut longest = 0usize;
    for (i, &zi) in z.iter().enumerate() {
        let v = zi - bias;
        if v > max {
            max = v;
        }
        if v > 0.0 {
            count += 1;
            sum += v;
            index_sum += i;
            run += 1;
            if run > longest {
                longest = run;
            }
        } else {
            run = 0;
        }
    }
    let n = z.len() as f64;
    [
        count as f64 / n,
        max,
        if count > 0 { sum / count as f64 } else { 0.0 },
        if count > 0 { index_sum as f64 / count as f64 } else { -1.0 },
        longest as f64,
    ]
}

fn ppv(z: &[f64], bias: f64) -> f64 {
    let count = z.iter().filter(|&&zi| zi - bias > 0.0).count();
    count as f64 / z.len() as f64
}

fn gmp(z: &[f64], bias: f64) -> f64 {
    z.iter().fold(f64::NEG_INFINITY, |m, &zi| {
        let v = zi - bias;
        if v > m {
            v
        } else {
            m
        }
    })
}

fn mpv(z: &[f64], bias: f64) -> f64 {
    let mut count = 0usize;
    let mut sum = 0.0;
    for &zi in z {
        let v = zi - bias;
        if v > 0.0 {
            count += 1;
            sum += v;
        }
    }
    if count > 0 {
        sum / count as f64
    } else {
        0.0
    }
}

fn mipv(z: &[f64], bias: f64) -> f64 {
    let mut count = 0usize;
    let mut index_sum = 0usize;
    for (i, &zi) in z.iter().enumerate() {
        if zi - bias > 0.0 {
            count += 1;
            index_sum += i;
        }
    }
    if count > 0 {
        index_sum as f64 / count as f64
    } else {
        -1.0
    }
}

fn lspv(z: &[f64], bias: f64) -> f64 {
    let mut run = 0usize;
    let mut longest = 0usize;
    for &zi in z {
        if zi - bias > 0.0 {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    longest as f64
}
