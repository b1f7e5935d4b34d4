//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect()
}

/// k nearest neighbors of `q` by full sort on (squared distance, index),
/// excluding `q` itself.
pub fn brute_knn(points: &[[f64; 3]], q: usize, k: usize) -> Vec<usize> {
    let d2 = |a: &[f64; 3], b: &[f64; 3]| {
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
    };
    let mut all: Vec<(f64, usize)> = (0..points.len())
        .filter(|&i| i != q)
        .map(|i| (d2(&points[q], &points[i]), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Kendall tau-b by enumerating all pairs.
pub fn brute_kendall(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = (a[i] - a[j]).signum() * ((a[i] != a[j]) as i32 as f64);
            let db = (b[i] - b[j]).signum() * ((b[i] != b[j]) as i32 as f64);
            if da == 0.0 && db == 0.0 {
                continue;
            } else if da == 0.0 {
                tie_a += 1;
            } else if db == 0.0 {
                tie_b += 1;
            } else if da == db {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let n1 = (conc + disc + tie_a) as f64;
    let n2 = (conc + disc + tie_b) as f64;
    (conc - disc) as f64 / (n1 * n2).sqrt()
}

/// Ranks by counting smaller and equal elements, ties averaged.
pub fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn brute_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn brute_spearman(a: &[f64], b: &[f64]) -> f64 {
    brute_pearson(&brute_ranks(a), &brute_ranks(b))
}

/// Epsilon-SVR dual in terms of beta = alpha - alpha*:
/// minimize 1/2 beta' K beta + eps |beta|_1 - y' beta
/// subject to sum(beta) = 0, |beta_i| <= C.
pub fn svr_dual_objective(k: &[Vec<f64>], y: &[f64], eps: f64, beta: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * k[i][j] * beta[j];
        }
    }
    0.5 * quad + eps * beta.iter().map(|b| b.abs()).sum::<f64>()
        - y.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
}

/// Projection onto {sum(a) - sum(a*) = 0, 0 <= a, a* <= C} by bisection on
/// the multiplier of the equality constraint.
fn project(u: &[f64], l: usize, c: f64) -> Vec<f64> {
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let at = |mu: f64| -> Vec<f64> {
        (0..2 * l).map(|t| (u[t] - mu * sign(t)).clamp(0.0, c)).collect()
    };
    let g = |mu: f64| {
        let v = at(mu);
        (0..2 * l).map(|t| sign(t) * v[t]).sum::<f64>()
    };
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient on the 2l-variable dual. Returns beta.
pub fn reference_svr_dual(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64, iters: usize) -> Vec<f64> {
    let l = y.len();
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    // Lipschitz constant of the gradient is at most 2 * sum of |K| rows
    let lip = 2.0
        * k.iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let grad = |a: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..l).map(|i| a[i] - a[i + l]).collect();
        let kb: Vec<f64> = (0..l)
            .map(|i| (0..l).map(|j| k[i][j] * beta[j]).sum())
            .collect();
        (0..2 * l)
            .map(|t| sign(t) * kb[t % l] + eps - sign(t) * y[t % l])
            .collect()
    };
    let mut x = vec![0.0; 2 * l];
    let mut z = x.clone();
    let mut theta: f64 = 1.0;
    for _ in 0..iters {
        let g = grad(&z);
        let step: Vec<f64> = (0..2 * l).map(|t| z[t] - g[t] / lip).collect();
        let next = project(&step, l, c);
        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        z = (0..2 * l)
            .map(|t| next[t] + (theta - 1.0) / theta_next * (next[t] - x[t]))
            .collect();
        x = next;
        theta = theta_next;
    }
    (0..l).map(|i| x[i] - x[i + l]).collect()
}

pub fn rbf_matrix(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}
