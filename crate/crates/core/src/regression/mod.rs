//! Feature standardization and RBF epsilon-SVR.

mod scaler;
mod svr;

pub use scaler::FeatureScaler;
pub use svr::{train_svr, KernelWidth, SvrConfig, SvrModel, MODEL_FILE_VERSION};
