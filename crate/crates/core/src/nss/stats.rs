//! Moments, normalization and histogram entropy.

/// Stabilizing constant added to the standard deviation when normalizing.
pub const NORMALIZE_EPS: f64 = 1e-6;

/// Default number of histogram bins for entropy.
pub const DEFAULT_BINS: usize = 256;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance.
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    variance(values).sqrt()
}

/// `(F - mean) / (std + C)`.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let m = mean(values);
    let denom = std_dev(values) + NORMALIZE_EPS;
    values.iter().map(|v| (v - m) / denom).collect()
}

/// Shannon entropy in bits of a histogram with `bins` uniform bins over
/// `[min, max]` of the values. Constant (or empty) input gives 0.
pub fn entropy(values: &[f64], bins: usize) -> f64 {
    let bins = bins.max(1);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if values.is_empty() || range.is_nan() || range <= 0.0 {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    let scale = bins as f64 / range;
    for &v in values {
        let idx = (((v - lo) * scale) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}
