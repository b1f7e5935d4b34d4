//! Point-cloud geometry feature domains: curvature, anisotropy, linearity,
//! planarity and sphericity of each point's kNN covariance.

mod eigen;
mod kdtree;

pub use eigen::{covariance, covariance_eigen, symmetric_eigenvalues, EigenTriple, Sym3};
pub use kdtree::NeighborhoodIndex;

use rayon::prelude::*;

use crate::error::GeometryError;
use crate::model::ColoredPointCloud;

/// Neighborhood size used when none is given.
pub const DEFAULT_K: usize = 10;

/// Eigenvalue sums (and `l1` for the ratio features) below this are treated
/// as a degenerate neighborhood whose features are all zero.
pub const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenfeatures {
    pub curvature: f64,
    pub anisotropy: f64,
    pub linearity: f64,
    pub planarity: f64,
    pub sphericity: f64,
}

impl Eigenfeatures {
    const ZERO: Self = Self {
        curvature: 0.0,
        anisotropy: 0.0,
        linearity: 0.0,
        planarity: 0.0,
        sphericity: 0.0,
    };
}

pub fn eigenfeatures(e: &EigenTriple) -> Eigenfeatures {
    let sum = e.sum();
    if sum < DEGENERATE_EPS || e.l1 < DEGENERATE_EPS {
        return Eigenfeatures::ZERO;
    }
    Eigenfeatures {
        curvature: e.l3 / sum,
        anisotropy: (e.l1 - e.l3) / e.l1,
        linearity: (e.l1 - e.l2) / e.l1,
        planarity: (e.l2 - e.l3) / e.l1,
        sphericity: e.l3 / e.l1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodConfig {
    pub k: usize,
    /// Put the query point itself into its neighborhood, as the first of
    /// `k` members, instead of using `k` other points.
    pub include_self: bool,
}

impl Default for NeighborhoodConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            include_self: false,
        }
    }
}

/// The five per-point geometry domains of a point cloud.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcGeometryDomains {
    pub curvature: Vec<f64>,
    pub anisotropy: Vec<f64>,
    pub linearity: Vec<f64>,
    pub planarity: Vec<f64>,
    pub sphericity: Vec<f64>,
}

pub fn project_pc_geometry(
    cloud: &ColoredPointCloud,
    config: NeighborhoodConfig,
) -> Result<PcGeometryDomains, GeometryError> {
    let points = cloud.positions();
    let index = NeighborhoodIndex::build(points, config.k)?;
    let per_point: Vec<Eigenfeatures> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let neighbors = if config.include_self {
                let mut nb = index.query_k(i, config.k - 1);
                nb.insert(0, i);
                nb
            } else {
                index.query(i)
            };
            let eig = symmetric_eigenvalues(&covariance(neighbors.iter().map(|&j| &points[j])));
            eigenfeatures(&eig)
        })
        .collect();

    let mut out = PcGeometryDomains::default();
    for f in per_point {
        out.curvature.push(f.curvature);
        out.anisotropy.push(f.anisotropy);
        out.linearity.push(f.linearity);
        out.planarity.push(f.planarity);
        out.sphericity.push(f.sphericity);
    }
    Ok(out)
}
