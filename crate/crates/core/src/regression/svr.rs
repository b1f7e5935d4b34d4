//! Epsilon-SVR with an RBF kernel, trained by SMO on the dual problem.
//!
//! The dual is written over `2l` variables (`alpha` then `alpha*`) with
//! labels `+1`/`-1`, as in the usual LIBSVM formulation, and solved with
//! maximal-violating-pair working-set selection.

use std::borrow::Cow;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scaler::FeatureScaler;
use crate::error::SvrError;
use crate::model::ModelKind;

pub const MODEL_FILE_VERSION: u32 = 1;

/// Problems up to this many rows get a precomputed kernel matrix.
const FULL_KERNEL_MAX_ROWS: usize = 4096;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    /// `1 / (d * mean feature variance)` of the standardized training data.
    Scale,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrConfig {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: KernelWidth,
    /// Stop once the maximal KKT violation falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            gamma: KernelWidth::Scale,
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub version: u32,
    /// Kind of model the feature vectors came from, when known.
    pub kind: Option<ModelKind>,
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub bias: f64,
    /// Predictions are multiplied by this to return native score units.
    pub mos_scale: f64,
    pub scaler: FeatureScaler,
    /// Standardized training rows with nonzero dual coefficients.
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    /// SMO iterations used; not persisted.
    #[serde(skip)]
    pub iterations: usize,
}

#[inline]
fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

struct Kernel<'a> {
    rows: &'a [Vec<f64>],
    gamma: f64,
    full: Option<Vec<f64>>,
}

impl<'a> Kernel<'a> {
    fn new(rows: &'a [Vec<f64>], gamma: f64) -> Self {
        let l = rows.len();
        let full = (l <= FULL_KERNEL_MAX_ROWS).then(|| {
            let mut k = vec![0.0; l * l];
            k.par_chunks_mut(l).enumerate().for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = rbf(gamma, &rows[i], &rows[j]);
                }
            });
            k
        });
        Self { rows, gamma, full }
    }

    fn row(&self, i: usize) -> Cow<'_, [f64]> {
        let l = self.rows.len();
        match &self.full {
            Some(k) => Cow::Borrowed(&k[i * l..(i + 1) * l]),
            None => Cow::Owned(
                self.rows
                    .par_iter()
                    .map(|r| rbf(self.gamma, &self.rows[i], r))
                    .collect(),
            ),
        }
    }
}

fn validate(x: &[Vec<f64>], y: &[f64], config: &SvrConfig) -> Result<usize, SvrError> {
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(SvrError::InvalidParameter(format!("C must be > 0, got {}", config.c)));
    }
    if !(config.epsilon >= 0.0 && config.epsilon.is_finite()) {
        return Err(SvrError::InvalidParameter(format!(
            "epsilon must be >= 0, got {}",
            config.epsilon
        )));
    }
    if let KernelWidth::Fixed(g) = config.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(SvrError::InvalidParameter(format!("gamma must be > 0, got {g}")));
        }
    }
    if config.tolerance.is_nan() || config.tolerance <= 0.0 {
        return Err(SvrError::InvalidParameter("tolerance must be > 0".into()));
    }
    if x.len() != y.len() {
        return Err(SvrError::RowCountMismatch {
            rows: x.len(),
            targets: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(SvrError::TooFewRows(x.len()));
    }
    let d = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(SvrError::DimensionMismatch {
            expected: d,
            got: r.len(),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SvrError::NonFinite("features"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SvrError::NonFinite("targets"));
    }
    Ok(d)
}

/// Trains on raw feature rows; standardization is fitted here and stored in
/// the model. `y` should already be divided by the score scale.
pub fn train_svr(x: &[Vec<f64>], y: &[f64], config: &SvrConfig) -> Result<SvrModel, SvrError> {
    let d = validate(x, y, config)?;
    let scaler = FeatureScaler::fit(x);
    let xs = scaler.transform(x);

    let gamma = match config.gamma {
        KernelWidth::Fixed(g) => g,
        KernelWidth::Scale => {
            let n = xs.len() as f64;
            let mean_var = (0..d)
                .map(|j| {
                    let m = xs.iter().map(|r| r[j]).sum::<f64>() / n;
                    xs.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n
                })
                .sum::<f64>()
                / d.max(1) as f64;
            if mean_var > 0.0 && d > 0 {
                1.0 / (d as f64 * mean_var)
            } else {
                1.0
            }
        }
    };

    let kernel = Kernel::new(&xs, gamma);
    let solution = solve(&kernel, y, config)?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &coef) in solution.coefs.iter().enumerate() {
        if coef != 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(coef);
        }
    }
    Ok(SvrModel {
        version: MODEL_FILE_VERSION,
        kind: None,
        c: config.c,
        epsilon: config.epsilon,
        gamma,
        bias: solution.bias,
        mos_scale: 1.0,
        scaler,
        support_vectors,
        dual_coefs,
        iterations: solution.iterations,
    })
}

struct Solution {
    coefs: Vec<f64>,
    bias: f64,
    iterations: usize,
}

fn solve(kernel: &Kernel, y: &[f64], config: &SvrConfig) -> Result<Solution, SvrError> {
    let l = y.len();
    let c = config.c;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let mut alpha = vec![0.0; 2 * l];
    let mut grad: Vec<f64> = (0..2 * l)
        .map(|t| {
            if t < l {
                config.epsilon - y[t]
            } else {
                config.epsilon + y[t - l]
            }
        })
        .collect();
    let in_up = |t: usize, a: f64| if t < l { a < c } else { a > 0.0 };
    let in_low = |t: usize, a: f64| if t < l { a > 0.0 } else { a < c };

    let mut iterations = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..2 * l {
            let v = -sign(t) * grad[t];
            if in_up(t, alpha[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(t, alpha[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < config.tolerance {
            break;
        }
        if iterations >= config.max_iterations {
            return Err(SvrError::NonConvergence(config.max_iterations));
        }
        iterations += 1;

        let (yi, yj) = (sign(i), sign(j));
        let ki = kernel.row(i % l);
        let kj = kernel.row(j % l);
        let kij = ki[j % l];
        let q_ij = yi * yj * kij;
        let (qd_i, qd_j) = (ki[i % l], kj[j % l]);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if yi != yj {
            let quad = (qd_i + qd_j + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd_i + qd_j - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (da_i, da_j) = (alpha[i] - old_i, alpha[j] - old_j);
        // G_t += Q_ti da_i + Q_tj da_j with Q_ts = y_t y_s K
        for t in 0..2 * l {
            let yt = sign(t);
            grad[t] += yt * (yi * ki[t % l] * da_i + yj * kj[t % l] * da_j);
        }
    }

    // bias from free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..2 * l {
        let yg = sign(t) * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_n += 1;
            free_sum += yg;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(Solution {
        coefs: (0..l).map(|t| alpha[t] - alpha[t + l]).collect(),
        bias: -rho,
        iterations,
    })
}

impl SvrModel {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn with_mos_scale(mut self, mos_scale: f64) -> Self {
        self.mos_scale = mos_scale;
        self
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = Some(kind);
        self
    }

    /// Decision value on the training target scale (before `mos_scale`).
    pub fn decision(&self, x: &[f64]) -> Result<f64, SvrError> {
        if x.len() != self.dim() {
            return Err(SvrError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let xs = self.scaler.transform_row(x);
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * rbf(self.gamma, &xs, sv))
            .sum::<f64>()
            + self.bias)
    }

    /// Prediction in native score units.
    pub fn predict(&self, x: &[f64]) -> Result<f64, SvrError> {
        Ok(self.decision(x)? * self.mos_scale)
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, SvrError> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SvrError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SvrError::Corrupt(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| SvrError::Corrupt("missing `version`".into()))?;
        if version != MODEL_FILE_VERSION as u64 {
            return Err(SvrError::Version {
                found: version.min(u32::MAX as u64) as u32,
                expected: MODEL_FILE_VERSION,
            });
        }
        let model: SvrModel =
            serde_json::from_value(value).map_err(|e| SvrError::Corrupt(e.to_string()))?;
        model.check_consistency()?;
        Ok(model)
    }

    fn check_consistency(&self) -> Result<(), SvrError> {
        let d = self.dim();
        let corrupt = |m: &str| Err(SvrError::Corrupt(m.to_string()));
        if self.scaler.stds.len() != d {
            return corrupt("scaler means and stds differ in length");
        }
        if self.support_vectors.len() != self.dual_coefs.len() {
            return corrupt("support vector and coefficient counts differ");
        }
        if self.support_vectors.iter().any(|sv| sv.len() != d) {
            return corrupt("support vector dimension does not match scaler");
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), SvrError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SvrError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
