//! Statistical summaries of feature domains and the fixed-layout quality
//! feature vector.
//!
//! Each domain is reduced to 11 parameters: mean and standard deviation
//! (raw values), histogram entropy (normalized values), GGD shape and
//! variance (raw values), AGGD `(eta, shape, left variance, right variance)`
//! and Gamma `(shape, rate)` (normalized values).
//!
//! The vector is laid out parameter-block first: all `(mean, std)` pairs in
//! domain order, then all entropies, then all GGD pairs, all AGGD
//! quadruples and all Gamma pairs. Point clouds use the domain order
//! `Cur, Ani, Lin, Pla, Sph, L, A, B` (88 values) and meshes
//! `Cur, Dih, Far, Fan, L, A, B` (77 values).

mod fit;
pub mod layout;
mod special;
mod stats;

pub use fit::{
    fit_aggd, fit_gamma, fit_ggd, AggdFit, AggdParams, GammaParams, GgdParams, GAMMA_SHIFT,
    MIN_FIT_SAMPLES,
};
pub use special::{gamma, ggd_moment_ratio, invert_moment_ratio, ln_gamma};
pub use stats::{entropy, mean, normalize, std_dev, variance, DEFAULT_BINS, NORMALIZE_EPS};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::model::ModelKind;

/// Parameters per domain.
pub const PARAMS_PER_DOMAIN: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainName {
    Cur,
    Ani,
    Lin,
    Pla,
    Sph,
    Dih,
    Far,
    Fan,
    L,
    A,
    B,
}

impl DomainName {
    pub fn is_color(self) -> bool {
        matches!(self, DomainName::L | DomainName::A | DomainName::B)
    }

    /// Domains of a model kind, in feature-vector order.
    pub fn for_kind(kind: ModelKind) -> &'static [DomainName] {
        use DomainName::*;
        match kind {
            ModelKind::PointCloud => &[Cur, Ani, Lin, Pla, Sph, L, A, B],
            ModelKind::Mesh => &[Cur, Dih, Far, Fan, L, A, B],
        }
    }
}

impl fmt::Display for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A named vector of finite per-element feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDomain {
    name: DomainName,
    values: Vec<f64>,
}

impl FeatureDomain {
    pub fn new(name: DomainName, values: Vec<f64>) -> Result<Self, FitError> {
        if values.len() < 2 {
            return Err(FitError::TooFewSamples {
                required: 2,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FitError::NonFinite);
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> DomainName {
        self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalized(&self) -> FeatureDomain {
        FeatureDomain {
            name: self.name,
            values: normalize(&self.values),
        }
    }
}

/// Bits set in [`DomainSummary::degenerate`] when a fit could not be made
/// and its parameters were encoded as 0.
pub mod degenerate {
    pub const GGD: u8 = 1;
    pub const AGGD: u8 = 2;
    pub const GAMMA: u8 = 4;
    pub const ALL: u8 = GGD | AGGD | GAMMA;
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainSummary {
    pub mean: f64,
    pub std: f64,
    pub entropy: f64,
    pub ggd: GgdParams,
    pub aggd: AggdParams,
    pub gamma: GammaParams,
    /// See [`degenerate`].
    pub degenerate: u8,
}

impl DomainSummary {
    /// The 11 parameters in vector order.
    pub fn to_array(&self) -> [f64; PARAMS_PER_DOMAIN] {
        [
            self.mean,
            self.std,
            self.entropy,
            self.ggd.shape,
            self.ggd.variance,
            self.aggd.eta,
            self.aggd.shape,
            self.aggd.left_variance,
            self.aggd.right_variance,
            self.gamma.shape,
            self.gamma.rate,
        ]
    }
}

pub fn summarize_domain(domain: &FeatureDomain, bins: usize) -> DomainSummary {
    summarize_values(domain.values(), bins)
}

/// Like [`summarize_domain`] but tolerates fewer than two values (all
/// parameters 0, every fit flagged).
pub fn summarize_values(values: &[f64], bins: usize) -> DomainSummary {
    if values.len() < 2 {
        return DomainSummary {
            mean: values.first().copied().unwrap_or(0.0),
            degenerate: degenerate::ALL,
            ..Default::default()
        };
    }
    let normalized = normalize(values);
    let mut summary = DomainSummary {
        mean: mean(values),
        std: std_dev(values),
        entropy: entropy(&normalized, bins),
        ..Default::default()
    };
    match fit_ggd(values) {
        Ok(p) => summary.ggd = p,
        Err(_) => summary.degenerate |= degenerate::GGD,
    }
    match fit_aggd(&normalized) {
        Ok(fit) if !fit.one_sided => summary.aggd = fit.params,
        _ => summary.degenerate |= degenerate::AGGD,
    }
    match fit_gamma(&normalized) {
        Ok(p) => summary.gamma = p,
        Err(_) => summary.degenerate |= degenerate::GAMMA,
    }
    summary
}

/// Fixed-length feature vector of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityFeatureVector {
    pub kind: ModelKind,
    pub values: Vec<f64>,
    /// Three bits per domain in domain order (`degenerate` flags shifted by
    /// `3 * domain_index`).
    pub degeneracy: u32,
}

impl QualityFeatureVector {
    pub fn from_summaries(kind: ModelKind, summaries: &[DomainSummary]) -> Self {
        let d = summaries.len();
        debug_assert_eq!(d, DomainName::for_kind(kind).len());
        let mut values = vec![0.0; d * PARAMS_PER_DOMAIN];
        let mut degeneracy = 0u32;
        for (i, s) in summaries.iter().enumerate() {
            let p = s.to_array();
            values[layout::offset(layout::Block::MeanStd, d) + 2 * i] = p[0];
            values[layout::offset(layout::Block::MeanStd, d) + 2 * i + 1] = p[1];
            values[layout::offset(layout::Block::Entropy, d) + i] = p[2];
            for k in 0..2 {
                values[layout::offset(layout::Block::Ggd, d) + 2 * i + k] = p[3 + k];
            }
            for k in 0..4 {
                values[layout::offset(layout::Block::Aggd, d) + 4 * i + k] = p[5 + k];
            }
            for k in 0..2 {
                values[layout::offset(layout::Block::Gamma, d) + 2 * i + k] = p[9 + k];
            }
            degeneracy |= (s.degenerate as u32) << (3 * i);
        }
        Self {
            kind,
            values,
            degeneracy,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
