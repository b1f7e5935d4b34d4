//! No-reference quality assessment of colored 3D point clouds and meshes
//! from natural scene statistics of geometry and color feature domains.
//!
//! The pipeline is: parse a model ([`io`]), project it into per-element
//! feature domains ([`pointcloud`], [`mesh`], [`color`]), summarize each
//! domain ([`nss`]) into a fixed-layout vector ([`features`]), and regress
//! quality scores with an RBF support vector regressor ([`regression`]).

pub mod color;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod io;
pub mod mesh;
pub mod model;
pub mod nss;
pub mod pointcloud;
pub mod regression;
pub mod synth;

pub use error::{
    EvalError, ExtractError, FitError, GeometryError, ModelError, ModelFailure, SvrError,
    SynthError,
};
pub use features::{assemble_features, ExtractConfig};
pub use model::{ColoredMesh, ColoredPointCloud, ModelHandle, ModelKind, Rgb};
pub use nss::QualityFeatureVector;
