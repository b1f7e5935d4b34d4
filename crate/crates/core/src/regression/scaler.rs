use serde::{Deserialize, Serialize};

/// Per-feature standardization fitted on training data. Features with zero
/// spread map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl FeatureScaler {
    /// Population mean and standard deviation of each column.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in stds.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
        }
        Self { means, stds }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_column() {
        let rows = vec![vec![1.0, 7.0], vec![2.0, 7.0], vec![3.0, 7.0]];
        let s = FeatureScaler::fit(&rows);
        let t = s.transform(&rows);
        let want = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((t[0][0] + want).abs() < 1e-12);
        assert_eq!(t[1][0], 0.0);
        assert!((t[2][0] - want).abs() < 1e-12);
        assert!((t[2][0] - 1.2247).abs() < 1e-4);
        assert!(t.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn refit_on_standardized_is_identity() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i * i) as f64, (i as f64).sin() * 3.0 + 1.0])
            .collect();
        let t = FeatureScaler::fit(&rows).transform(&rows);
        let t2 = FeatureScaler::fit(&t).transform(&t);
        for (a, b) in t.iter().flatten().zip(t2.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
