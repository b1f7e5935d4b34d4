//! Agreement metrics between predicted and subjective scores.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub plcc: f64,
    pub srcc: f64,
    pub krcc: f64,
    pub rmse: f64,
}

/// PLCC on raw values, SRCC on average ranks, Kendall tau-b and RMSE.
///
/// Fails with [`EvalError::ZeroVariance`] (carrying the RMSE) when either
/// input is constant.
pub fn correlations(pred: &[f64], mos: &[f64]) -> Result<Correlations, EvalError> {
    if pred.len() != mos.len() {
        return Err(EvalError::LengthMismatch(pred.len(), mos.len()));
    }
    if pred.len() < 3 {
        return Err(EvalError::TooFewSamples {
            required: 3,
            got: pred.len(),
        });
    }
    let rmse = rmse(pred, mos);
    let undefined = || EvalError::ZeroVariance { rmse };
    let plcc = pearson(pred, mos).ok_or_else(undefined)?;
    let srcc = spearman(pred, mos).ok_or_else(undefined)?;
    let krcc = kendall_tau_b(pred, mos).ok_or_else(undefined)?;
    Ok(Correlations {
        plcc,
        srcc,
        krcc,
        rmse,
    })
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(1) as f64;
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n).sqrt()
}

/// Pearson correlation; `None` if either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Kendall tau-b in O(n log n) (Knight's merge-sort method).
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(b[i].total_cmp(&b[j])));

    let pairs = |run: u64| run * run.saturating_sub(1) / 2;
    let total = pairs(n as u64);

    // ties in a, and joint ties in (a, b)
    let (mut ties_a, mut ties_ab) = (0u64, 0u64);
    let (mut run_a, mut run_ab) = (1u64, 1u64);
    for w in 1..=n {
        let same_a = w < n && a[idx[w]] == a[idx[w - 1]];
        let same_ab = same_a && b[idx[w]] == b[idx[w - 1]];
        if same_ab {
            run_ab += 1;
        } else {
            ties_ab += pairs(run_ab);
            run_ab = 1;
        }
        if same_a {
            run_a += 1;
        } else {
            ties_a += pairs(run_a);
            run_a = 1;
        }
    }

    let mut ys: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_b = 0u64;
    let mut run = 1u64;
    for w in 1..=n {
        if w < n && ys[w] == ys[w - 1] {
            run += 1;
        } else {
            ties_b += pairs(run);
            run = 1;
        }
    }

    let denom_a = (total - ties_a) as f64;
    let denom_b = (total - ties_b) as f64;
    if denom_a <= 0.0 || denom_b <= 0.0 {
        return None;
    }
    let numer = total as f64 - ties_a as f64 - ties_b as f64 + ties_ab as f64 - 2.0 * swaps as f64;
    Some((numer / (denom_a.sqrt() * denom_b.sqrt())).clamp(-1.0, 1.0))
}

/// Sorts `v` ascending and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        merge_count(lo, blo) + merge_count(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}
