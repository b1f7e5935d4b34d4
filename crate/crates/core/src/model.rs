//! In-memory colored point clouds and meshes.

use crate::error::ModelError;

/// RGB triple with 8-bit channels.
pub type Rgb = [u8; 3];

/// A colored point cloud. Always holds at least one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredPointCloud {
    positions: Vec<[f64; 3]>,
    colors: Vec<Rgb>,
}

impl ColoredPointCloud {
    pub fn new(positions: Vec<[f64; 3]>, colors: Vec<Rgb>) -> Result<Self, ModelError> {
        if positions.is_empty() {
            return Err(ModelError::Empty);
        }
        if positions.len() != colors.len() {
            return Err(ModelError::LengthMismatch {
                positions: positions.len(),
                colors: colors.len(),
            });
        }
        check_finite(&positions)?;
        Ok(Self { positions, colors })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }
}

/// A colored triangle mesh with per-vertex colors.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredMesh {
    vertices: Vec<[f64; 3]>,
    vertex_colors: Vec<Rgb>,
    faces: Vec<[u32; 3]>,
}

impl ColoredMesh {
    pub fn new(
        vertices: Vec<[f64; 3]>,
        vertex_colors: Vec<Rgb>,
        faces: Vec<[u32; 3]>,
    ) -> Result<Self, ModelError> {
        if vertices.is_empty() {
            return Err(ModelError::Empty);
        }
        if vertices.len() != vertex_colors.len() {
            return Err(ModelError::LengthMismatch {
                positions: vertices.len(),
                colors: vertex_colors.len(),
            });
        }
        check_finite(&vertices)?;
        if faces.is_empty() {
            return Err(ModelError::NoFaces);
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx as usize >= n {
                    return Err(ModelError::IndexOutOfRange {
                        face: fi,
                        index: idx as i64,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(ModelError::RepeatedFaceIndex { face: fi });
            }
        }
        Ok(Self {
            vertices,
            vertex_colors,
            faces,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex_colors(&self) -> &[Rgb] {
        &self.vertex_colors
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Applies `f` to every vertex position, keeping colors and connectivity.
    pub fn map_positions(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self, ModelError> {
        Self::new(
            self.vertices.iter().map(|&p| f(p)).collect(),
            self.vertex_colors.clone(),
            self.faces.clone(),
        )
    }
}

/// Either kind of model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelHandle {
    PointCloud(ColoredPointCloud),
    Mesh(ColoredMesh),
}

/// Discriminant of [`ModelHandle`], also used to tag feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PointCloud,
    Mesh,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::PointCloud => "point_cloud",
            ModelKind::Mesh => "mesh",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "point_cloud" => Ok(ModelKind::PointCloud),
            "mesh" => Ok(ModelKind::Mesh),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl ModelHandle {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelHandle::PointCloud(_) => ModelKind::PointCloud,
            ModelHandle::Mesh(_) => ModelKind::Mesh,
        }
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        match self {
            ModelHandle::PointCloud(c) => c.positions(),
            ModelHandle::Mesh(m) => m.vertices(),
        }
    }

    pub fn colors(&self) -> &[Rgb] {
        match self {
            ModelHandle::PointCloud(c) => c.colors(),
            ModelHandle::Mesh(m) => m.vertex_colors(),
        }
    }

    pub fn as_point_cloud(&self) -> Option<&ColoredPointCloud> {
        match self {
            ModelHandle::PointCloud(c) => Some(c),
            ModelHandle::Mesh(_) => None,
        }
    }

    pub fn as_mesh(&self) -> Option<&ColoredMesh> {
        match self {
            ModelHandle::Mesh(m) => Some(m),
            ModelHandle::PointCloud(_) => None,
        }
    }
}

impl From<ColoredPointCloud> for ModelHandle {
    fn from(c: ColoredPointCloud) -> Self {
        ModelHandle::PointCloud(c)
    }
}

impl From<ColoredMesh> for ModelHandle {
    fn from(m: ColoredMesh) -> Self {
        ModelHandle::Mesh(m)
    }
}

fn check_finite(points: &[[f64; 3]]) -> Result<(), ModelError> {
    match points
        .iter()
        .position(|p| p.iter().any(|c| !c.is_finite()))
    {
        Some(index) => Err(ModelError::NonFiniteCoordinate { index }),
        None => Ok(()),
    }
}
