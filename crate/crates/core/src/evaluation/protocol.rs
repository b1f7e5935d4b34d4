//! Group-level cross-validation and training-fraction sweeps.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{correlations, rmse};
use super::manifest::DatasetManifest;
use crate::error::{EvalError, ExtractError, ModelFailure};
use crate::features::{assemble_features_timed, ExtractConfig};
use crate::io::read_model;
use crate::model::ModelKind;
use crate::regression::{train_svr, SvrConfig};

/// Feature rows with scores and content groups, ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub mos: Vec<f64>,
    pub groups: Vec<String>,
    pub mos_scale: f64,
    pub kind: Option<ModelKind>,
    pub extraction: Vec<ExtractionTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionTiming {
    pub model: String,
    pub millis: f64,
}

impl LabeledSet {
    pub fn new(
        ids: Vec<String>,
        features: Vec<Vec<f64>>,
        mos: Vec<f64>,
        groups: Vec<String>,
        mos_scale: f64,
    ) -> Result<Self, EvalError> {
        if features.len() != mos.len() {
            return Err(EvalError::LengthMismatch(features.len(), mos.len()));
        }
        if groups.len() != mos.len() || ids.len() != mos.len() {
            return Err(EvalError::Manifest("ids, groups and scores differ in length".into()));
        }
        if let Some(first) = features.first() {
            if let Some((i, r)) = features.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
                return Err(EvalError::Manifest(format!(
                    "row {} has {} features, expected {}",
                    i + 1,
                    r.len(),
                    first.len()
                )));
            }
        }
        Ok(Self {
            ids,
            features,
            mos,
            groups,
            mos_scale,
            kind: None,
            extraction: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.mos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mos.is_empty()
    }

    pub fn distinct_groups(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.groups.iter().map(String::as_str).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Copy with the features reduced to the given column indices.
    pub fn with_columns(&self, columns: &[usize]) -> Self {
        let mut out = self.clone();
        out.features = self
            .features
            .iter()
            .map(|r| columns.iter().map(|&c| r[c]).collect())
            .collect();
        out
    }
}

/// Extracts features for every manifest row in parallel. All failures are
/// collected and returned together.
pub fn extract_labeled_set(
    manifest: &DatasetManifest,
    config: &ExtractConfig,
) -> Result<LabeledSet, EvalError> {
    let results: Vec<_> = manifest
        .rows
        .par_iter()
        .map(|row| {
            let run = || -> Result<_, ExtractError> {
                let model = read_model(&row.path)?;
                assemble_features_timed(&model, config)
            };
            run().map_err(|source| ModelFailure {
                path: row.path.clone(),
                source,
            })
        })
        .collect();
    let mut failures = Vec::new();
    let mut features = Vec::new();
    let mut extraction = Vec::new();
    let mut kinds = BTreeSet::new();
    for (row, res) in manifest.rows.iter().zip(results) {
        match res {
            Ok((v, elapsed)) => {
                let model = row.path.display().to_string();
                log::info!("{model}: {:.1} ms", elapsed.as_secs_f64() * 1e3);
                extraction.push(ExtractionTiming {
                    model,
                    millis: elapsed.as_secs_f64() * 1e3,
                });
                kinds.insert(v.kind.as_str());
                features.push(v.values);
            }
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        return Err(EvalError::Extraction(failures));
    }
    let ids = manifest.rows.iter().map(|r| r.path.display().to_string()).collect();
    let mos = manifest.rows.iter().map(|r| r.mos).collect();
    let groups = manifest.rows.iter().map(|r| r.group.clone()).collect();
    if kinds.len() > 1 {
        return Err(EvalError::Manifest(
            "manifest mixes point clouds and meshes".into(),
        ));
    }
    let mut set = LabeledSet::new(ids, features, mos, groups, manifest.mos_scale)?;
    set.kind = kinds.into_iter().next().and_then(|k| k.parse().ok());
    set.extraction = extraction;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_groups: Vec<String>,
    pub test_groups: Vec<String>,
}

/// One fold per group, holding that group out.
pub fn loocv_folds(groups: &[String]) -> Result<Vec<Fold>, EvalError> {
    let set: BTreeSet<&String> = groups.iter().collect();
    if set.len() < 2 {
        return Err(EvalError::TooFewGroups(set.len()));
    }
    Ok(set
        .iter()
        .map(|&test| Fold {
            train_groups: set.iter().filter(|&&g| g != test).map(|g| g.to_string()).collect(),
            test_groups: vec![test.clone()],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub index: usize,
    pub train_groups: Vec<String>,
    pub test_groups: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the test split is too small or constant.
    pub plcc: Option<f64>,
    pub srcc: Option<f64>,
    pub krcc: Option<f64>,
    pub rmse: f64,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub plcc: Option<f64>,
    pub srcc: Option<f64>,
    pub krcc: Option<f64>,
    pub rmse: f64,
    pub folds: Vec<FoldReport>,
    /// Per-model extraction wall-clock times; omitted from JSON when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extraction: Vec<ExtractionTiming>,
}

impl EvalReport {
    fn from_folds(folds: Vec<FoldReport>, extraction: Vec<ExtractionTiming>) -> Self {
        let avg = |f: fn(&FoldReport) -> Option<f64>| {
            let vals: Vec<f64> = folds.iter().filter_map(f).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        Self {
            plcc: avg(|f| f.plcc),
            srcc: avg(|f| f.srcc),
            krcc: avg(|f| f.krcc),
            rmse: folds.iter().map(|f| f.rmse).sum::<f64>() / folds.len().max(1) as f64,
            folds,
            extraction,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table of per-fold and average metrics.
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut out = format!(
            "{:<6} {:<24} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8}\n",
            "fold", "test", "n_train", "n_test", "PLCC", "SRCC", "KRCC", "RMSE"
        );
        for f in &self.folds {
            let mut test = f.test_groups.join(",");
            if test.len() > 24 {
                test.truncate(21);
                test.push_str("...");
            }
            out.push_str(&format!(
                "{:<6} {:<24} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8.4}\n",
                f.index,
                test,
                f.n_train,
                f.n_test,
                cell(f.plcc),
                cell(f.srcc),
                cell(f.krcc),
                f.rmse
            ));
        }
        out.push_str(&format!(
            "{:<6} {:<24} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8.4}\n",
            "mean",
            "",
            "",
            "",
            cell(self.plcc),
            cell(self.srcc),
            cell(self.krcc),
            self.rmse
        ));
        if !self.extraction.is_empty() {
            let ms: f64 = self.extraction.iter().map(|t| t.millis).sum::<f64>()
                / self.extraction.len() as f64;
            out.push_str(&format!("mean extraction time: {ms:.1} ms/model\n"));
        }
        out
    }
}

fn run_split(
    data: &LabeledSet,
    index: usize,
    fold: &Fold,
    config: &SvrConfig,
) -> Result<FoldReport, EvalError> {
    let is_test = |g: &String| fold.test_groups.contains(g);
    let is_train = |g: &String| fold.train_groups.contains(g);
    let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..data.len() {
        if is_test(&data.groups[i]) {
            xte.push(data.features[i].clone());
            yte.push(data.mos[i]);
        } else if is_train(&data.groups[i]) {
            xtr.push(data.features[i].clone());
            ytr.push(data.mos[i] / data.mos_scale);
        }
    }
    let model = train_svr(&xtr, &ytr, config)?.with_mos_scale(data.mos_scale);
    let predictions = model.predict_batch(&xte)?;
    let (plcc, srcc, krcc, err) = match correlations(&predictions, &yte) {
        Ok(c) => (Some(c.plcc), Some(c.srcc), Some(c.krcc), c.rmse),
        Err(EvalError::ZeroVariance { rmse }) => (None, None, None, rmse),
        Err(EvalError::TooFewSamples { .. }) => (None, None, None, rmse(&predictions, &yte)),
        Err(e) => return Err(e),
    };
    Ok(FoldReport {
        index,
        train_groups: fold.train_groups.clone(),
        test_groups: fold.test_groups.clone(),
        n_train: xtr.len(),
        n_test: xte.len(),
        plcc,
        srcc,
        krcc,
        rmse: err,
        predictions,
    })
}

fn run_splits(data: &LabeledSet, folds: &[Fold], config: &SvrConfig) -> Result<Vec<FoldReport>, EvalError> {
    folds
        .par_iter()
        .enumerate()
        .map(|(i, f)| run_split(data, i, f, config))
        .collect()
}

/// Leave-one-group-out cross-validation with unweighted fold averaging.
pub fn run_cv(data: &LabeledSet, config: &SvrConfig) -> Result<EvalReport, EvalError> {
    let folds = loocv_folds(&data.groups)?;
    let reports = run_splits(data, &folds, config)?;
    Ok(EvalReport::from_folds(reports, data.extraction.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub fraction: f64,
    pub train_group_count: usize,
    pub report: EvalReport,
}

/// Number of training groups for a fraction of `groups` groups.
pub fn training_group_count(fraction: f64, groups: usize) -> Result<usize, EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::InvalidFraction(
            fraction,
            "must lie strictly between 0 and 1".into(),
        ));
    }
    let n = (fraction * groups as f64).round() as usize;
    if n == 0 {
        return Err(EvalError::InvalidFraction(fraction, "no training groups".into()));
    }
    if n >= groups {
        return Err(EvalError::InvalidFraction(fraction, "no test groups".into()));
    }
    Ok(n)
}

/// For each fraction, `repeats` seeded random group splits are trained and
/// tested; metrics are averaged over the splits.
pub fn data_sensitivity_sweep(
    data: &LabeledSet,
    fractions: &[f64],
    config: &SvrConfig,
    seed: u64,
    repeats: usize,
) -> Result<Vec<SweepEntry>, EvalError> {
    let groups = data.distinct_groups();
    if groups.len() < 2 {
        return Err(EvalError::TooFewGroups(groups.len()));
    }
    let counts = fractions
        .iter()
        .map(|&f| training_group_count(f, groups.len()))
        .collect::<Result<Vec<_>, _>>()?;
    fractions
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(fi, (&fraction, n_train))| {
            let folds: Vec<Fold> = (0..repeats.max(1))
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        seed ^ ((fi as u64) << 32) ^ r as u64,
                    );
                    let mut shuffled = groups.clone();
                    shuffled.shuffle(&mut rng);
                    let mut train = shuffled[..n_train].to_vec();
                    let mut test = shuffled[n_train..].to_vec();
                    train.sort();
                    test.sort();
                    Fold {
                        train_groups: train,
                        test_groups: test,
                    }
                })
                .collect();
            let reports = run_splits(data, &folds, config)?;
            Ok(SweepEntry {
                fraction,
                train_group_count: n_train,
                report: EvalReport::from_folds(reports, Vec::new()),
            })
        })
        .collect()
}

pub fn sweep_table(entries: &[SweepEntry]) -> String {
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let mut out = format!(
        "{:>8} {:>7} {:>8} {:>8} {:>8} {:>8}\n",
        "fraction", "groups", "PLCC", "SRCC", "KRCC", "RMSE"
    );
    for e in entries {
        out.push_str(&format!(
            "{:>8.2} {:>7} {:>8} {:>8} {:>8} {:>8.4}\n",
            e.fraction,
            e.train_group_count,
            cell(e.report.plcc),
            cell(e.report.srcc),
            cell(e.report.krcc),
            e.report.rmse
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn folds_partition_groups() {
        let folds = loocv_folds(&names(9)).unwrap();
        assert_eq!(folds.len(), 9);
        let mut seen = BTreeSet::new();
        for f in &folds {
            assert_eq!(f.test_groups.len(), 1);
            assert!(!f.train_groups.contains(&f.test_groups[0]));
            assert_eq!(f.train_groups.len(), 8);
            seen.insert(f.test_groups[0].clone());
        }
        assert_eq!(seen.len(), 9);
        assert!(matches!(loocv_folds(&names(1)), Err(EvalError::TooFewGroups(1))));
    }

    #[test]
    fn fraction_rounding() {
        assert_eq!(training_group_count(0.8, 9).unwrap(), 7);
        assert_eq!(training_group_count(0.2, 9).unwrap(), 2);
        assert!(training_group_count(1.0, 9).is_err());
        assert!(training_group_count(0.01, 9).is_err());
        assert!(training_group_count(0.99, 9).is_err());
    }

    #[test]
    fn cv_on_one_feature_function() {
        let mut ids = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut g = Vec::new();
        for grp in 0..3 {
            for i in 0..12 {
                let s = i as f64 / 11.0 + grp as f64 * 0.013;
                ids.push(format!("{grp}-{i}"));
                x.push(vec![s, (grp as f64).sin()]);
                y.push(9.0 - 6.0 * s);
                g.push(format!("g{grp}"));
            }
        }
        let data = LabeledSet::new(ids, x, y, g, 10.0).unwrap();
        let report = run_cv(&data, &SvrConfig::default()).unwrap();
        assert_eq!(report.folds.len(), 3);
        assert!(report.srcc.unwrap() > 0.95, "{}", report.to_table());
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["folds"].as_array().unwrap().len(), 3);
    }
}
