use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub mos: f64,
    pub group: String,
}

/// Model paths with subjective scores and content groups.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
    /// Divisor applied to MOS before training.
    pub mos_scale: f64,
}

impl DatasetManifest {
    /// Parses a `path,mos,group` CSV. Relative paths are resolved against
    /// `base_dir` when given. Lines starting with `#` are skipped.
    pub fn from_reader<R: Read>(
        reader: R,
        base_dir: Option<&Path>,
        mos_scale: f64,
    ) -> Result<Self, EvalError> {
        if !(mos_scale > 0.0 && mos_scale.is_finite()) {
            return Err(EvalError::Manifest(format!("invalid MOS scale {mos_scale}")));
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| EvalError::Manifest(format!("missing `{name}` column")))
        };
        let (pc, mc, gc) = (col("path")?, col("mos")?, col("group")?);
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let cell = |c: usize| rec.get(c).unwrap_or_default();
            let mos: f64 = cell(mc).parse().map_err(|_| {
                EvalError::Manifest(format!("row {}: MOS `{}` is not a number", i + 1, cell(mc)))
            })?;
            if !mos.is_finite() {
                return Err(EvalError::Manifest(format!("row {}: MOS is not finite", i + 1)));
            }
            let group = cell(gc).to_string();
            if group.is_empty() {
                return Err(EvalError::Manifest(format!("row {}: empty group", i + 1)));
            }
            let raw = PathBuf::from(cell(pc));
            let path = match base_dir {
                Some(dir) if raw.is_relative() => dir.join(raw),
                _ => raw,
            };
            rows.push(ManifestRow { path, mos, group });
        }
        Ok(Self { rows, mos_scale })
    }

    pub fn read(path: &Path, mos_scale: f64) -> Result<Self, EvalError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, path.parent(), mos_scale)
    }

    /// Writes the manifest, preceded by `comment` lines prefixed with `#`.
    pub fn write<W: Write>(&self, mut writer: W, comment: &str) -> Result<(), EvalError> {
        for line in comment.lines() {
            writeln!(writer, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["path", "mos", "group"])?;
        for row in &self.rows {
            w.write_record([
                row.path.to_string_lossy().as_ref(),
                &row.mos.to_string(),
                &row.group,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Distinct groups in sorted order.
    pub fn groups(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.group.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }
}
