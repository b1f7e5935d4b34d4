//! Model file formats.

mod obj;
mod ply;

use std::path::Path;

pub use obj::parse_obj;
pub use ply::{parse_ply, write_ply, PlyEncoding};

use crate::error::ModelError;
use crate::model::ModelHandle;

/// Loads a `.ply` or `.obj` file, dispatching on the extension.
pub fn read_model(path: &Path) -> Result<ModelHandle, ModelError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("ply") => parse_ply(&std::fs::read(path)?),
        Some("obj") => Ok(ModelHandle::Mesh(parse_obj(&std::fs::read(path)?)?)),
        _ => Err(ModelError::UnknownExtension(path.display().to_string())),
    }
}

pub fn write_model(
    path: &Path,
    model: &ModelHandle,
    encoding: PlyEncoding,
) -> Result<(), ModelError> {
    std::fs::write(path, write_ply(model, encoding))?;
    Ok(())
}
