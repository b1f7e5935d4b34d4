//! Whole-model feature extraction and the feature CSV format.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::color::rgb_to_lab;
use crate::error::{EvalError, ExtractError};
use crate::mesh::{project_mesh_geometry, CurvatureConfig};
use crate::model::{ModelHandle, ModelKind};
use crate::nss::{summarize_values, DomainSummary, QualityFeatureVector, DEFAULT_BINS};
use crate::pointcloud::{project_pc_geometry, NeighborhoodConfig};

/// Length of the widest feature vector; CSV rows always carry this many
/// feature cells.
pub const MAX_FEATURES: usize = 88;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    pub neighborhood: NeighborhoodConfig,
    pub curvature: CurvatureConfig,
    pub entropy_bins: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            neighborhood: NeighborhoodConfig::default(),
            curvature: CurvatureConfig::default(),
            entropy_bins: DEFAULT_BINS,
        }
    }
}

/// Raw per-element domains of a model, in feature-vector domain order.
pub fn project_domains(
    model: &ModelHandle,
    config: &ExtractConfig,
) -> Result<Vec<Vec<f64>>, ExtractError> {
    let lab = rgb_to_lab(model.colors());
    let mut domains = match model {
        ModelHandle::PointCloud(cloud) => {
            let g = project_pc_geometry(cloud, config.neighborhood)?;
            vec![g.curvature, g.anisotropy, g.linearity, g.planarity, g.sphericity]
        }
        ModelHandle::Mesh(mesh) => {
            let g = project_mesh_geometry(mesh, &config.curvature)?;
            vec![g.curvature, g.dihedral, g.face_area, g.face_angle]
        }
    };
    domains.extend([lab.l, lab.a, lab.b]);
    Ok(domains)
}

/// Projects a model into its feature domains and summarizes each one.
pub fn assemble_features(
    model: &ModelHandle,
    config: &ExtractConfig,
) -> Result<QualityFeatureVector, ExtractError> {
    let domains = project_domains(model, config)?;
    let summaries: Vec<DomainSummary> = domains
        .par_iter()
        .map(|values| summarize_values(values, config.entropy_bins))
        .collect();
    Ok(QualityFeatureVector::from_summaries(model.kind(), &summaries))
}

/// [`assemble_features`] plus the wall-clock time it took.
pub fn assemble_features_timed(
    model: &ModelHandle,
    config: &ExtractConfig,
) -> Result<(QualityFeatureVector, Duration), ExtractError> {
    let start = Instant::now();
    let v = assemble_features(model, config)?;
    Ok((v, start.elapsed()))
}

/// One row of a feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub model_id: String,
    pub features: QualityFeatureVector,
}

/// Writes `model_id,kind,f1..f88`; mesh rows leave `f78..f88` empty.
pub fn write_feature_csv<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["model_id".to_string(), "kind".to_string()];
    header.extend((1..=MAX_FEATURES).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for row in rows {
        let mut record = Vec::with_capacity(MAX_FEATURES + 2);
        record.push(row.model_id.clone());
        record.push(row.features.kind.as_str().to_string());
        record.extend(row.features.values.iter().map(|v| v.to_string()));
        record.resize(MAX_FEATURES + 2, String::new());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureRow>, EvalError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("model_id") || headers.get(1) != Some("kind") {
        return Err(EvalError::Manifest(
            "feature CSV must start with `model_id,kind`".into(),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |msg: String| EvalError::Manifest(format!("feature row {}: {msg}", i + 1));
        let model_id = rec.get(0).unwrap_or_default().to_string();
        let kind: ModelKind = rec
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e: String| bad(e))?;
        let expected = match kind {
            ModelKind::PointCloud => 88,
            ModelKind::Mesh => 77,
        };
        let mut values = Vec::with_capacity(expected);
        for cell in rec.iter().skip(2) {
            if cell.is_empty() {
                continue;
            }
            values.push(
                cell.parse::<f64>()
                    .map_err(|_| bad(format!("`{cell}` is not a number")))?,
            );
        }
        if values.len() != expected {
            return Err(bad(format!(
                "{kind} rows need {expected} features, found {}",
                values.len()
            )));
        }
        rows.push(FeatureRow {
            model_id,
            features: QualityFeatureVector {
                kind,
                values,
                degeneracy: 0,
            },
        });
    }
    Ok(rows)
}
