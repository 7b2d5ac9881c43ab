//! Dilated 1-D convolution with the fixed length-9 kernels.

use super::kernel::{Kernel, KERNEL_LENGTH};
use crate::{Error, Result};

/// `x[t+1] - x[t]` for every `t`.
pub fn first_difference(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::Shape(format!("first difference needs at least 2 samples, got {}", x.len())));
    }
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Convolves `x` with `kernel` at `dilation`.
///
/// Without padding the output has `len(x) - 8 * dilation` entries and
/// `out[i] = sum_j w[j] * x[i + j * dilation]`. With padding, `x` is extended
/// by `4 * dilation` zeros on each side and the output has `len(x)` entries.
pub fn convolve_dilated(x: &[f64], kernel: &Kernel, dilation: usize, padding: bool) -> Result<Vec<f64>> {
    if dilation == 0 {
        return Err(Error::Shape("dilation must be positive".into()));
    }
    let span = (KERNEL_LENGTH - 1) * dilation;
    if !padding && span + 1 > x.len() {
        return Err(Error::Shape(format!(
            "kernel span {} exceeds series length {} without padding",
            span + 1,
            x.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Shape("cannot convolve an empty series".into()));
    }
    let mut padded = Vec::new();
    convolve_padded_into(x, &kernel.weights(), dilation, &mut padded);
    if padding {
        Ok(padded)
    } else {
        let half = span / 2;
        Ok(padded[half..x.len() - half].to_vec())
    }
}

/// Zero-padded ("same") convolution into `out`, resized to `x.len()`.
///
/// Taps are accumulated in kernel order, so each output equals the direct sum
/// `w[0]*x[..] + w[1]*x[..] + ... + w[8]*x[..]` evaluated left to right with the
/// out-of-range terms dropped. The valid (unpadded) map is the slice
/// `out[4d .. len - 4d]`.
pub(crate) fn convolve_padded_into(x: &[f64], weights: &[f64; KERNEL_LENGTH], dilation: usize, out: &mut Vec<f64>) {
    let n = x.len();
    out.clear();
    out.resize(n, 0.0);
    let half = (KERNEL_LENGTH / 2) as isize;
    for (j, &w) in weights.iter().enumerate() {
        let shift = (j as isize - half) * dilation as isize;
        // out[i] += w * x[i + shift] for all i with 0 <= i + shift < n
        let (lo, hi) = if shift >= 0 {
            let s = shift as usize;
            if s >= n {
                continue;
            }
            (0, n - s)
        } else {
            let s = (-shift) as usize;
            if s >= n {
                continue;
            }
            (s, n)
        };
        let src_lo = (lo as isize + shift) as usize;
        let src = &x[src_lo..src_lo + (hi - lo)];
        for (o, &v) in out[lo..hi].iter_mut().zip(src) {
            *o += w * v;
        }
    }
}
