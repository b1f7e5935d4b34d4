//! Correlation metrics, group-level cross-validation, ablation feature
//! groups and training-fraction sweeps.

mod correlation;
mod groups;
mod manifest;
mod protocol;

pub use correlation::{average_ranks, correlations, kendall_tau_b, pearson, rmse, spearman, Correlations};
pub use groups::{feature_group_indices, parse_feature_groups, select_feature_groups, FeatureGroup};
pub use manifest::{DatasetManifest, ManifestRow};
pub use protocol::{
    data_sensitivity_sweep, extract_labeled_set, loocv_folds, run_cv, sweep_table,
    training_group_count, EvalReport, ExtractionTiming, Fold, FoldReport, LabeledSet, SweepEntry,
};
