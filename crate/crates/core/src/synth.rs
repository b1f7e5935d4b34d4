//! Seeded generators of simple colored shapes and controllable distortions.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::SynthError;
use crate::evaluation::{DatasetManifest, ManifestRow};
use crate::io::{write_model, PlyEncoding};
use crate::model::{ColoredMesh, ColoredPointCloud, ModelHandle, Rgb};

/// Smallest model any generator or distortion may produce.
pub const MIN_ELEMENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Random points in the unit square at `z = 0`.
    Plane,
    /// Random points on the unit segment of the x axis.
    Line,
    /// Random points on a sphere about the origin.
    Sphere { radius: f64 },
    /// Triangulated square grid in the `z = 0` plane with about `count`
    /// vertices.
    GridMesh,
    /// Regular icosahedron with unit circumradius; `count` is ignored.
    Icosahedron,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorPattern {
    Uniform(Rgb),
    /// Red and green follow x and y across the bounding box.
    Gradient,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub shape: Shape,
    pub count: usize,
    pub colors: ColorPattern,
    pub seed: u64,
}

pub fn generate(spec: &SynthSpec) -> Result<ModelHandle, SynthError> {
    if spec.count < MIN_ELEMENTS && spec.shape != Shape::Icosahedron {
        return Err(SynthError::InvalidParameter(format!(
            "count must be at least {MIN_ELEMENTS}, got {}",
            spec.count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.count;
    let (positions, faces) = match spec.shape {
        Shape::Plane => (
            (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>(), 0.0]).collect(),
            None,
        ),
        Shape::Line => (
            (0..n).map(|_| [rng.random::<f64>(), 0.0, 0.0]).collect(),
            None,
        ),
        Shape::Sphere { radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(SynthError::InvalidParameter(format!("radius {radius}")));
            }
            let pts = (0..n)
                .map(|_| loop {
                    let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    if len > 1e-6 {
                        break v.map(|c| c / len * radius);
                    }
                })
                .collect();
            (pts, None)
        }
        Shape::GridMesh => {
            let side = ((n as f64).sqrt().ceil() as usize).max(2);
            let (v, f) = grid_mesh(side);
            (v, Some(f))
        }
        Shape::Icosahedron => {
            let (v, f) = icosahedron();
            (v, Some(f))
        }
    };
    let colors = paint(&positions, spec.colors, &mut rng);
    Ok(match faces {
        Some(f) => ColoredMesh::new(positions, colors, f)?.into(),
        None => ColoredPointCloud::new(positions, colors)?.into(),
    })
}

/// `side x side` vertices over the unit square, two triangles per cell.
pub fn grid_mesh(side: usize) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let step = 1.0 / (side - 1) as f64;
    let mut v = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            v.push([i as f64 * step, j as f64 * step, 0.0]);
        }
    }
    let id = |i: usize, j: usize| (j * side + i) as u32;
    let mut f = Vec::with_capacity(2 * (side - 1) * (side - 1));
    for j in 0..side - 1 {
        for i in 0..side - 1 {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (v, f)
}

/// Icosahedron with unit circumradius and outward (counter-clockwise) faces.
pub fn icosahedron() -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let r = (1.0 + t * t).sqrt();
    let v = raw.iter().map(|p: &[f64; 3]| p.map(|c| c / r)).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

fn paint(positions: &[[f64; 3]], pattern: ColorPattern, rng: &mut ChaCha8Rng) -> Vec<Rgb> {
    match pattern {
        ColorPattern::Uniform(c) => vec![c; positions.len()],
        ColorPattern::Random => (0..positions.len()).map(|_| rng.random::<[u8; 3]>()).collect(),
        ColorPattern::Gradient => {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for p in positions {
                for a in 0..3 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            let unit = |p: &[f64; 3], a: usize| {
                let span = hi[a] - lo[a];
                if span > 0.0 {
                    (p[a] - lo[a]) / span
                } else {
                    0.5
                }
            };
            positions
                .iter()
                .map(|p| {
                    let (u, v) = (unit(p, 0), unit(p, 1));
                    [
                        (u * 255.0).round() as u8,
                        (v * 255.0).round() as u8,
                        ((1.0 - u) * 255.0).round() as u8,
                    ]
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distortion {
    /// i.i.d. Gaussian offsets with standard deviation `sigma` per axis.
    GaussianNoise { sigma: f64 },
    /// Keeps a random `floor(ratio * N)` subset of points, in original
    /// order. Meshes keep the faces whose vertices all survive.
    Downsample { ratio: f64 },
    /// Rounds every channel to `bits`-bit resolution.
    ColorQuantize { bits: u8 },
}

pub fn distort(model: &ModelHandle, distortion: Distortion, seed: u64) -> Result<ModelHandle, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match distortion {
        Distortion::GaussianNoise { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(SynthError::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
            }
            let normal = Normal::new(0.0, sigma).expect("valid sigma");
            let mut jitter = |p: [f64; 3]| p.map(|c| c + normal.sample(&mut rng));
            Ok(match model {
                ModelHandle::PointCloud(c) => ColoredPointCloud::new(
                    c.positions().iter().map(|&p| jitter(p)).collect(),
                    c.colors().to_vec(),
                )?
                .into(),
                ModelHandle::Mesh(m) => ColoredMesh::new(
                    m.vertices().iter().map(|&p| jitter(p)).collect(),
                    m.vertex_colors().to_vec(),
                    m.faces().to_vec(),
                )?
                .into(),
            })
        }
        Distortion::Downsample { ratio } => {
            if !(ratio > 0.0 && ratio <= 1.0) {
                return Err(SynthError::InvalidParameter(format!(
                    "ratio must lie in (0, 1], got {ratio}"
                )));
            }
            let n = model.positions().len();
            let kept = (ratio * n as f64).floor() as usize;
            if kept < MIN_ELEMENTS {
                return Err(SynthError::TooFewElements {
                    kept,
                    min: MIN_ELEMENTS,
                });
            }
            let mut keep = rand::seq::index::sample(&mut rng, n, kept).into_vec();
            keep.sort_unstable();
            let positions = keep.iter().map(|&i| model.positions()[i]).collect();
            let colors = keep.iter().map(|&i| model.colors()[i]).collect();
            Ok(match model {
                ModelHandle::PointCloud(_) => ColoredPointCloud::new(positions, colors)?.into(),
                ModelHandle::Mesh(m) => {
                    let mut remap = vec![u32::MAX; n];
                    for (new, &old) in keep.iter().enumerate() {
                        remap[old] = new as u32;
                    }
                    let faces: Vec<[u32; 3]> = m
                        .faces()
                        .iter()
                        .map(|f| f.map(|i| remap[i as usize]))
                        .filter(|f| f.iter().all(|&i| i != u32::MAX))
                        .collect();
                    if faces.is_empty() {
                        return Err(SynthError::TooFewElements {
                            kept: 0,
                            min: 1,
                        });
                    }
                    ColoredMesh::new(positions, colors, faces)?.into()
                }
            })
        }
        Distortion::ColorQuantize { bits } => {
            if !(1..=8).contains(&bits) {
                return Err(SynthError::InvalidParameter(format!(
                    "bits must lie in 1..=8, got {bits}"
                )));
            }
            let colors: Vec<Rgb> = model
                .colors()
                .iter()
                .map(|c| c.map(|v| quantize_channel(v, bits)))
                .collect();
            Ok(match model {
                ModelHandle::PointCloud(c) => {
                    ColoredPointCloud::new(c.positions().to_vec(), colors)?.into()
                }
                ModelHandle::Mesh(m) => {
                    ColoredMesh::new(m.vertices().to_vec(), colors, m.faces().to_vec())?.into()
                }
            })
        }
    }
}

/// Uniform rounding of an 8-bit value to one of `2^bits` levels spanning
/// `0..=255`.
pub fn quantize_channel(value: u8, bits: u8) -> u8 {
    let levels = ((1u32 << bits) - 1) as f64;
    let q = (value as f64 / 255.0 * levels).round();
    (q / levels * 255.0).round() as u8
}

/// Layout of a generated quality dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub groups: usize,
    pub points: usize,
    /// Distortion levels per group, including the undistorted reference.
    pub levels: usize,
    pub seed: u64,
    pub base_mos: f64,
    pub mos_slope: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            groups: 5,
            points: 1500,
            levels: 12,
            seed: 0,
            base_mos: 9.0,
            mos_slope: 8.0,
        }
    }
}

impl DatasetSpec {
    /// Strength in `[0, 1]` of a distortion level.
    pub fn strength(&self, level: usize) -> f64 {
        level as f64 / (self.levels - 1) as f64
    }

    pub fn mos(&self, level: usize) -> f64 {
        self.base_mos - self.mos_slope * self.strength(level)
    }

    /// Text for the manifest header comment.
    pub fn formula(&self) -> String {
        format!(
            "synthetic MOS = {} - {} * s, s = level / {}\n\
             distortion at strength s: gaussian noise sigma = {NOISE_SCALE} * s * radius, \
             colors quantized to 8 - round({QUANT_SPAN} * s) bits",
            self.base_mos,
            self.mos_slope,
            self.levels - 1
        )
    }
}

const NOISE_SCALE: f64 = 0.1;
const QUANT_SPAN: f64 = 6.0;

/// Reference content of group `g`: alternating spheres and planes, with
/// gradient or random coloring in pairs of groups.
fn group_reference(spec: &DatasetSpec, g: usize) -> Result<(ModelHandle, f64), SynthError> {
    let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add(g as u64);
    let colors = if (g / 2).is_multiple_of(2) {
        ColorPattern::Gradient
    } else {
        ColorPattern::Random
    };
    let (shape, radius) = if g.is_multiple_of(2) {
        let r = 1.0 + 0.5 * g as f64;
        (Shape::Sphere { radius: r }, r)
    } else {
        (Shape::Plane, 0.5)
    };
    let model = generate(&SynthSpec {
        shape,
        count: spec.points,
        colors,
        seed,
    })?;
    Ok((model, radius))
}

/// Distorted model at a level of a group reference.
fn distorted(
    spec: &DatasetSpec,
    reference: &ModelHandle,
    radius: f64,
    g: usize,
    level: usize,
) -> Result<ModelHandle, SynthError> {
    let s = spec.strength(level);
    if level == 0 {
        return Ok(reference.clone());
    }
    let seed = spec.seed ^ ((g as u64) << 20) ^ level as u64;
    let noisy = distort(
        reference,
        Distortion::GaussianNoise {
            sigma: NOISE_SCALE * s * radius,
        },
        seed,
    )?;
    let bits = 8 - (QUANT_SPAN * s).round() as u8;
    distort(&noisy, Distortion::ColorQuantize { bits }, seed)
}

/// Writes `groups x levels` PLY files to `dir` and returns their manifest
/// (paths joined onto `dir`, MOS scale 10). The manifest is also written to
/// `dir/manifest.csv` with paths relative to `dir`.
pub fn generate_dataset(dir: &Path, spec: &DatasetSpec) -> Result<DatasetManifest, SynthError> {
    if spec.groups < 1 || spec.levels < 2 {
        return Err(SynthError::InvalidParameter(
            "need at least 1 group and 2 levels".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(crate::error::ModelError::Io)?;
    let mut rows = Vec::new();
    for g in 0..spec.groups {
        let (reference, radius) = group_reference(spec, g)?;
        for level in 0..spec.levels {
            let model = distorted(spec, &reference, radius, g, level)?;
            let name = format!("g{g:02}_l{level:02}.ply");
            write_model(&dir.join(&name), &model, PlyEncoding::BinaryLittleEndian)?;
            rows.push(ManifestRow {
                path: name.into(),
                mos: spec.mos(level),
                group: format!("g{g:02}"),
            });
        }
    }
    let manifest = DatasetManifest {
        rows,
        mos_scale: 10.0,
    };
    let file = std::fs::File::create(dir.join("manifest.csv")).map_err(crate::error::ModelError::Io)?;
    manifest.write(std::io::BufWriter::new(file), &spec.formula())?;
    let mut manifest = manifest;
    for row in &mut manifest.rows {
        row.path = dir.join(&row.path);
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(shape: Shape) -> SynthSpec {
        SynthSpec {
            shape,
            count: 1000,
            colors: ColorPattern::Random,
            seed: 7,
        }
    }

    #[test]
    fn plane_and_sphere() {
        let p = generate(&spec(Shape::Plane)).unwrap();
        assert!(p.positions().iter().all(|q| q[2] == 0.0));
        let s = generate(&spec(Shape::Sphere { radius: 1.0 })).unwrap();
        for q in s.positions() {
            let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-9);
        }
        assert_eq!(s, generate(&spec(Shape::Sphere { radius: 1.0 })).unwrap());
    }

    #[test]
    fn meshes() {
        let ico = generate(&spec(Shape::Icosahedron)).unwrap();
        let m = ico.as_mesh().unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (12, 20));
        let grid = generate(&spec(Shape::GridMesh)).unwrap();
        let g = grid.as_mesh().unwrap();
        assert_eq!(g.vertex_count(), 32 * 32);
        assert_eq!(g.face_count(), 2 * 31 * 31);
    }

    #[test]
    fn downsample_subset() {
        let p = generate(&spec(Shape::Plane)).unwrap();
        let d = distort(&p, Distortion::Downsample { ratio: 0.5 }, 1).unwrap();
        assert_eq!(d.positions().len(), 500);
        assert!(d.positions().iter().all(|q| p.positions().contains(q)));
        assert!(matches!(
            distort(&p, Distortion::Downsample { ratio: 0.005 }, 1),
            Err(SynthError::TooFewElements { kept: 5, .. })
        ));
    }

    #[test]
    fn quantize_levels() {
        let p = generate(&spec(Shape::Plane)).unwrap();
        let q = distort(&p, Distortion::ColorQuantize { bits: 3 }, 0).unwrap();
        for ch in 0..3 {
            let mut vals: Vec<u8> = q.colors().iter().map(|c| c[ch]).collect();
            vals.sort_unstable();
            vals.dedup();
            assert!(vals.len() <= 8);
        }
        assert!((0..=255).all(|v| quantize_channel(v, 8) == v));
        assert_eq!(quantize_channel(255, 1), 255);
        assert_eq!(quantize_channel(0, 1), 0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        let p = generate(&spec(Shape::Plane)).unwrap();
        for d in [
            Distortion::GaussianNoise { sigma: 0.0 },
            Distortion::Downsample { ratio: 1.5 },
            Distortion::ColorQuantize { bits: 0 },
            Distortion::ColorQuantize { bits: 9 },
        ] {
            assert!(matches!(distort(&p, d, 0), Err(SynthError::InvalidParameter(_))));
        }
    }
}
