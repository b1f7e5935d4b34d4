//! Moment-matching estimators for GGD, AGGD and Gamma distributions.

use serde::{Deserialize, Serialize};

use super::special::{invert_moment_ratio, ln_gamma};
use super::stats::{mean, variance};
use crate::error::FitError;

/// Minimum sample count for any of the fits.
pub const MIN_FIT_SAMPLES: usize = 16;

/// Offset keeping shifted samples strictly positive for the Gamma fit.
pub const GAMMA_SHIFT: f64 = 1e-6;

const GAMMA_MIN_VARIANCE: f64 = 1e-12;

fn check(values: &[f64]) -> Result<(), FitError> {
    if values.len() < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples {
            required: MIN_FIT_SAMPLES,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GgdParams {
    pub shape: f64,
    pub variance: f64,
}

/// Generalized Gaussian fit: shape from the moment ratio
/// `(E|x|)^2 / E[x^2]` of the mean-centered samples, variance as the
/// population variance.
pub fn fit_ggd(values: &[f64]) -> Result<GgdParams, FitError> {
    check(values)?;
    let m = mean(values);
    let n = values.len() as f64;
    let abs_mean = values.iter().map(|v| (v - m).abs()).sum::<f64>() / n;
    let sq_mean = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    if sq_mean <= 0.0 {
        return Err(FitError::Degenerate("all centered values are zero"));
    }
    Ok(GgdParams {
        shape: invert_moment_ratio(abs_mean * abs_mean / sq_mean),
        variance: sq_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AggdParams {
    /// `beta_r - beta_l`.
    pub eta: f64,
    pub shape: f64,
    pub left_variance: f64,
    pub right_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggdFit {
    pub params: AggdParams,
    /// One side of zero had no samples; its variance was set to 0.
    pub one_sided: bool,
}

/// Asymmetric generalized Gaussian fit by moment matching. Samples below
/// zero feed the left scale, samples at or above zero the right scale.
pub fn fit_aggd(values: &[f64]) -> Result<AggdFit, FitError> {
    check(values)?;
    let (mut left_sq, mut left_n, mut right_sq, mut right_n) = (0.0, 0usize, 0.0, 0usize);
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &x in values {
        if x < 0.0 {
            left_sq += x * x;
            left_n += 1;
        } else {
            right_sq += x * x;
            right_n += 1;
        }
        abs_sum += x.abs();
        sq_sum += x * x;
    }
    if sq_sum <= 0.0 {
        return Err(FitError::Degenerate("all values are zero"));
    }
    let n = values.len() as f64;
    let left_variance = if left_n > 0 { left_sq / left_n as f64 } else { 0.0 };
    let right_variance = if right_n > 0 { right_sq / right_n as f64 } else { 0.0 };
    let one_sided = left_n == 0 || right_n == 0;

    let abs_mean = abs_sum / n;
    let r_hat = abs_mean * abs_mean / (sq_sum / n);
    let big_r = if left_variance > 0.0 && right_variance > 0.0 {
        let g = (left_variance / right_variance).sqrt();
        r_hat * (g.powi(3) + 1.0) * (g + 1.0) / (g * g + 1.0).powi(2)
    } else {
        // limit of the correction factor as the ratio goes to 0 or infinity
        r_hat
    };
    let shape = invert_moment_ratio(big_r);
    let scale = (0.5 * (ln_gamma(1.0 / shape) - ln_gamma(3.0 / shape))).exp();
    let beta_l = left_variance.sqrt() * scale;
    let beta_r = right_variance.sqrt() * scale;
    Ok(AggdFit {
        params: AggdParams {
            eta: beta_r - beta_l,
            shape,
            left_variance,
            right_variance,
        },
        one_sided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

/// Shape-rate Gamma fit by the method of moments on
/// `x - min(x) + GAMMA_SHIFT`.
pub fn fit_gamma(values: &[f64]) -> Result<GammaParams, FitError> {
    check(values)?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = values.iter().map(|v| v - lo + GAMMA_SHIFT).collect();
    let m = mean(&shifted);
    let var = variance(&shifted);
    if var < GAMMA_MIN_VARIANCE {
        return Err(FitError::Degenerate("variance below 1e-12"));
    }
    Ok(GammaParams {
        shape: m * m / var,
        rate: m / var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_samples() {
        assert_eq!(
            fit_ggd(&[1.0; 15]),
            Err(FitError::TooFewSamples {
                required: 16,
                got: 15
            })
        );
    }

    #[test]
    fn constant_input_is_degenerate() {
        assert!(matches!(fit_ggd(&[2.0; 32]), Err(FitError::Degenerate(_))));
        assert!(matches!(fit_aggd(&[0.0; 32]), Err(FitError::Degenerate(_))));
        assert!(matches!(fit_gamma(&[2.0; 32]), Err(FitError::Degenerate(_))));
    }

    #[test]
    fn one_sided_aggd_is_flagged() {
        let v: Vec<f64> = (1..=32).map(|i| i as f64 / 10.0).collect();
        let fit = fit_aggd(&v).unwrap();
        assert!(fit.one_sided);
        assert_eq!(fit.params.left_variance, 0.0);
        assert!(fit.params.eta > 0.0);
    }

    #[test]
    fn gamma_moment_identities() {
        let v: Vec<f64> = (0..100).map(|i| ((i * 37) % 101) as f64 * 0.01).collect();
        let g = fit_gamma(&v).unwrap();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let shifted: Vec<f64> = v.iter().map(|x| x - lo + GAMMA_SHIFT).collect();
        let (m, var) = (mean(&shifted), variance(&shifted));
        assert!((g.shape / g.rate - m).abs() < 1e-12 * m);
        assert!((g.shape / (g.rate * g.rate) - var).abs() < 1e-12 * var);
    }

    #[test]
    fn mirror_swaps_sides() {
        let v: Vec<f64> = (0..64)
            .map(|i| ((i * 7919) % 64) as f64 / 10.0 - 2.0 + (i % 5) as f64 * 0.37)
            .filter(|x| *x != 0.0)
            .collect();
        let m: Vec<f64> = v.iter().map(|x| -x).collect();
        let a = fit_aggd(&v).unwrap().params;
        let b = fit_aggd(&m).unwrap().params;
        assert_eq!(a.shape, b.shape);
        assert_eq!(a.left_variance, b.right_variance);
        assert_eq!(a.right_variance, b.left_variance);
        assert_eq!(a.eta, -b.eta);
    }
}
