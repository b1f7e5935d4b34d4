//! Ablation feature groups.
//!
//! `F1`..`F4` cover the geometry domains and `F5`..`F8` the color domains:
//! mean/std/entropy, GGD, AGGD and Gamma parameters respectively.

use std::fmt;
use std::str::FromStr;

use crate::error::EvalError;
use crate::model::ModelKind;
use crate::nss::layout::{indices, Block};
use crate::nss::{DomainName, QualityFeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureGroup(u8);

impl FeatureGroup {
    pub fn new(number: u8) -> Result<Self, EvalError> {
        if (1..=8).contains(&number) {
            Ok(Self(number))
        } else {
            Err(EvalError::UnknownFeatureGroup(format!("F{number}")))
        }
    }

    pub fn all() -> Vec<FeatureGroup> {
        (1..=8).map(FeatureGroup).collect()
    }

    fn is_color(self) -> bool {
        self.0 >= 5
    }

    fn blocks(self) -> &'static [Block] {
        match (self.0 - 1) % 4 {
            0 => &[Block::MeanStd, Block::Entropy],
            1 => &[Block::Ggd],
            2 => &[Block::Aggd],
            _ => &[Block::Gamma],
        }
    }
}

impl FromStr for FeatureGroup {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        t.strip_prefix(['F', 'f'])
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(|n| FeatureGroup::new(n).ok())
            .ok_or_else(|| EvalError::UnknownFeatureGroup(t.to_string()))
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

/// Sorted vector indices covered by `groups` for a model kind.
pub fn feature_group_indices(
    kind: ModelKind,
    groups: &[FeatureGroup],
) -> Result<Vec<usize>, EvalError> {
    if groups.is_empty() {
        return Err(EvalError::EmptyGroupSelection);
    }
    let domains = DomainName::for_kind(kind);
    let mut out = Vec::new();
    for g in groups {
        for (di, d) in domains.iter().enumerate() {
            if d.is_color() != g.is_color() {
                continue;
            }
            for &b in g.blocks() {
                out.extend(indices(b, di, domains.len()));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn select_feature_groups(
    vector: &QualityFeatureVector,
    groups: &[FeatureGroup],
) -> Result<Vec<f64>, EvalError> {
    Ok(feature_group_indices(vector.kind, groups)?
        .into_iter()
        .map(|i| vector.values[i])
        .collect())
}

/// Parses a comma-separated list such as `F1,F5`.
pub fn parse_feature_groups(list: &str) -> Result<Vec<FeatureGroup>, EvalError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}
