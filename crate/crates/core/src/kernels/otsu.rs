use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OTSU_BINS: usize = 256;

/// Result of Otsu's method over a fixed 256-bin histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtsuResult {
    /// Upper boundary of the last background bin, in input units. Values
    /// `>= tau` fall in foreground bins.
    pub tau: f64,
    /// Between-class variance at the chosen split, in squared input units.
    pub between_class_variance: f64,
    /// Last bin (inclusive) of the background class.
    pub bin_index: usize,
}

/// Bin of `v` among `bins` equal bins spanning `[lo, hi]`. The final bin is
/// closed on the right; out-of-range values clamp into the end bins.
#[inline]
pub fn histogram_bin(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let b = ((v - lo) / (hi - lo) * bins as f64).floor();
    if b.is_nan() || b < 0.0 {
        0
    } else {
        (b as usize).min(bins - 1)
    }
}

/// Between-class variance in squared bin units from exact integer class
/// sums. Depends only on the sums, so any summation order agrees bit for bit.
#[inline]
fn split_variance(n0: u64, s0: u64, n1: u64, s1: u64) -> f64 {
    let total = (n0 + n1) as f64;
    let diff = (n1 as i128 * s0 as i128 - n0 as i128 * s1 as i128) as f64;
    diff * diff / (n0 as f64 * n1 as f64) / (total * total)
}

/// Best split of a histogram: `(bin_index, variance in bin units²)`. Ties go
/// to the lowest bin. `None` when no split leaves both classes non-empty.
pub fn otsu_histogram(hist: &[u64]) -> Option<(usize, f64)> {
    let n: u64 = hist.iter().sum();
    let s: u64 = hist.iter().enumerate().map(|(b, &c)| b as u64 * c).sum();
    let mut n0 = 0u64;
    let mut s0 = 0u64;
    let mut best: Option<(usize, f64)> = None;
    for (t, &count) in hist.iter().enumerate().take(hist.len().saturating_sub(1)) {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let var = split_variance(n0, s0, n1, s - s0);
        if best.is_none_or(|(_, v)| var > v) {
            best = Some((t, var));
        }
    }
    best
}

/// Otsu threshold of `values` binned into 256 equal bins over `range`.
pub fn otsu_threshold(values: &[f64], range: (f64, f64)) -> Result<OtsuResult> {
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::invalid(format!("otsu range needs hi > lo, got ({lo}, {hi})")));
    }
    if values.len() < 2 {
        return Err(Error::DegenerateHistogram(format!(
            "need at least 2 samples, got {}",
            values.len()
        )));
    }
    let mut hist = [0u64; OTSU_BINS];
    for &v in values {
        hist[histogram_bin(v, lo, hi, OTSU_BINS)] += 1;
    }
    let (bin_index, var_bins) = otsu_histogram(&hist).ok_or_else(|| {
        Error::DegenerateHistogram("all samples fall in a single bin; no valid split".into())
    })?;
    let width = (hi - lo) / OTSU_BINS as f64;
    Ok(OtsuResult {
        tau: lo + (bin_index + 1) as f64 * width,
        between_class_variance: var_bins * width * width,
        bin_index,
    })
}
