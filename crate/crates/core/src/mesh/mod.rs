//! Mesh geometry feature domains: weighted average curvature per vertex,
//! oriented dihedral angle per interior edge, face area and face angles.

mod geometry;

pub use geometry::{segment_ball_length, triangle_ball_area};

use std::collections::{BTreeMap, HashSet, VecDeque};

use rayon::prelude::*;

use crate::error::GeometryError;
use crate::model::ColoredMesh;
use geometry::{angle_between, cross, dot, norm, scale, sub, Vec3};

/// Default curvature ball radius as a fraction of the bounding-box scale.
pub const DEFAULT_RADIUS_FRACTION: f64 = 0.01;

/// Faces whose cross-product norm is below this fraction of the product of
/// their two edge lengths are treated as zero-area.
const DEGENERATE_FACE_RATIO: f64 = 1e-12;

/// Which bounding-box length the curvature radius is a fraction of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusBasis {
    /// Axis-aligned bounding-box diagonal.
    #[default]
    Diagonal,
    /// Longest axis-aligned bounding-box side.
    MaxExtent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureConfig {
    pub radius_fraction: f64,
    pub basis: RadiusBasis,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            radius_fraction: DEFAULT_RADIUS_FRACTION,
            basis: RadiusBasis::Diagonal,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Face {
    /// Unit normal following the stored winding; zero for degenerate faces.
    normal: Vec3,
    degenerate: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    a: u32,
    b: u32,
    /// (face index, vertex of that face opposite the edge)
    faces: Vec<(usize, u32)>,
}

/// Connectivity shared by the per-edge and per-vertex computations.
#[derive(Debug)]
struct Topology<'m> {
    mesh: &'m ColoredMesh,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    /// Per vertex: (neighbor vertex, edge id).
    adjacency: Vec<Vec<(u32, usize)>>,
}

impl<'m> Topology<'m> {
    fn build(mesh: &'m ColoredMesh) -> Self {
        let v = mesh.vertices();
        let faces = mesh
            .faces()
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| v[i as usize]);
                let ab = sub(&b, &a);
                let ac = sub(&c, &a);
                let n = cross(&ab, &ac);
                let nn = norm(&n);
                let degenerate = nn <= DEGENERATE_FACE_RATIO * norm(&ab) * norm(&ac);
                Face {
                    normal: if nn > 0.0 { scale(&n, 1.0 / nn) } else { [0.0; 3] },
                    degenerate,
                }
            })
            .collect();

        let mut map: BTreeMap<(u32, u32), Vec<(usize, u32)>> = BTreeMap::new();
        for (fi, f) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let (a, b, apex) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push((fi, apex));
            }
        }
        let mut adjacency = vec![Vec::new(); v.len()];
        let edges: Vec<Edge> = map
            .into_iter()
            .enumerate()
            .map(|(id, ((a, b), faces))| {
                adjacency[a as usize].push((b, id));
                adjacency[b as usize].push((a, id));
                Edge { a, b, faces }
            })
            .collect();
        Self {
            mesh,
            faces,
            edges,
            adjacency,
        }
    }

    fn check_manifold(&self) -> Result<(), GeometryError> {
        match self.edges.iter().find(|e| e.faces.len() > 2) {
            Some(e) => Err(GeometryError::NonManifoldEdge(e.a, e.b, e.faces.len())),
            None => Ok(()),
        }
    }

    /// Signed dihedral angle of an interior edge, `None` for boundary edges
    /// and edges next to a zero-area face.
    fn dihedral(&self, edge: &Edge) -> Option<f64> {
        let [(f1, apex1), (f2, apex2)] = edge.faces[..] else {
            return None;
        };
        let (face1, face2) = (&self.faces[f1], &self.faces[f2]);
        if face1.degenerate || face2.degenerate {
            return None;
        }
        let v = self.mesh.vertices();
        let angle = angle_between(&face1.normal, &face2.normal);
        let side = dot(&face1.normal, &sub(&v[apex2 as usize], &v[apex1 as usize]));
        let sign = if side > 0.0 {
            1.0
        } else if side < 0.0 {
            -1.0
        } else {
            0.0
        };
        Some(angle * sign)
    }
}

/// Oriented dihedral angle of one interior edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDihedral {
    pub edge: (u32, u32),
    pub angle: f64,
}

/// Dihedral angles of all interior edges, ordered by edge `(min, max)`
/// vertex index. Boundary edges are skipped.
pub fn dihedral_angles(mesh: &ColoredMesh) -> Result<Vec<EdgeDihedral>, GeometryError> {
    let topo = Topology::build(mesh);
    topo.check_manifold()?;
    Ok(collect_dihedrals(&topo))
}

fn collect_dihedrals(topo: &Topology) -> Vec<EdgeDihedral> {
    topo.edges
        .iter()
        .filter_map(|e| {
            topo.dihedral(e).map(|angle| EdgeDihedral {
                edge: (e.a, e.b),
                angle,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaceMeasures {
    /// One area per face; zero for collinear faces.
    pub areas: Vec<f64>,
    /// Three corner angles per non-degenerate face.
    pub angles: Vec<f64>,
    pub degenerate_faces: usize,
}

pub fn face_area_angles(mesh: &ColoredMesh) -> FaceMeasures {
    let v = mesh.vertices();
    let mut out = FaceMeasures {
        areas: Vec::with_capacity(mesh.face_count()),
        angles: Vec::with_capacity(3 * mesh.face_count()),
        degenerate_faces: 0,
    };
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| v[i as usize]);
        let (ab, ac, bc) = (sub(&b, &a), sub(&c, &a), sub(&c, &b));
        let nn = norm(&cross(&ab, &ac));
        if nn <= DEGENERATE_FACE_RATIO * norm(&ab) * norm(&ac) {
            out.areas.push(0.0);
            out.degenerate_faces += 1;
            continue;
        }
        out.areas.push(0.5 * nn);
        out.angles.push(angle_between(&ab, &ac));
        out.angles.push(angle_between(&scale(&ab, -1.0), &bc));
        out.angles.push(angle_between(&ac, &bc));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvatureResult {
    pub values: Vec<f64>,
    /// Vertices without incident faces; their curvature is 0.
    pub isolated_vertices: usize,
}

fn curvature_radius(mesh: &ColoredMesh, config: &CurvatureConfig) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in mesh.vertices() {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let ext = sub(&hi, &lo);
    let size = match config.basis {
        RadiusBasis::Diagonal => norm(&ext),
        RadiusBasis::MaxExtent => ext[0].max(ext[1]).max(ext[2]),
    };
    config.radius_fraction * size
}

pub fn weighted_average_curvature(
    mesh: &ColoredMesh,
    config: &CurvatureConfig,
) -> Result<CurvatureResult, GeometryError> {
    let topo = Topology::build(mesh);
    topo.check_manifold()?;
    curvature_with(&topo, config)
}

fn curvature_with(topo: &Topology, config: &CurvatureConfig) -> Result<CurvatureResult, GeometryError> {
    if !(config.radius_fraction > 0.0 && config.radius_fraction.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!(
            "curvature radius fraction must be positive, got {}",
            config.radius_fraction
        )));
    }
    let radius = curvature_radius(topo.mesh, config);
    let contribution: Vec<f64> = topo
        .edges
        .iter()
        .map(|e| topo.dihedral(e).unwrap_or(0.0))
        .collect();

    let n = topo.mesh.vertex_count();
    let isolated = topo.adjacency.iter().filter(|a| a.is_empty()).count();
    if isolated > 0 {
        log::warn!("{isolated} isolated vertices get zero curvature");
    }
    if radius <= 0.0 {
        return Ok(CurvatureResult {
            values: vec![0.0; n],
            isolated_vertices: isolated,
        });
    }

    let values = (0..n)
        .into_par_iter()
        .map(|vi| vertex_curvature(topo, &contribution, vi, radius))
        .collect();
    Ok(CurvatureResult {
        values,
        isolated_vertices: isolated,
    })
}

/// Sum of `C(e) |e ∩ B|` over the edges meeting the ball around `vi`,
/// divided by the area of the surface inside the ball. Edges are gathered
/// by walking outward from `vi` through edges that meet the ball.
fn vertex_curvature(topo: &Topology, contribution: &[f64], vi: usize, radius: f64) -> f64 {
    let v = topo.mesh.vertices();
    let faces = topo.mesh.faces();
    let center = v[vi];

    let mut seen_vertices: HashSet<u32> = HashSet::from([vi as u32]);
    let mut seen_edges: HashSet<usize> = HashSet::new();
    let mut touched_faces: Vec<usize> = Vec::new();
    let mut queue = VecDeque::from([vi as u32]);
    let mut weighted = 0.0;

    while let Some(u) = queue.pop_front() {
        for &(w, eid) in &topo.adjacency[u as usize] {
            if !seen_edges.insert(eid) {
                continue;
            }
            let len = segment_ball_length(&v[u as usize], &v[w as usize], &center, radius);
            if len <= 0.0 {
                continue;
            }
            weighted += contribution[eid] * len;
            touched_faces.extend(topo.edges[eid].faces.iter().map(|&(f, _)| f));
            if seen_vertices.insert(w) {
                queue.push_back(w);
            }
        }
    }

    touched_faces.sort_unstable();
    touched_faces.dedup();
    let area: f64 = touched_faces
        .iter()
        .filter(|&&f| !topo.faces[f].degenerate)
        .map(|&f| {
            let [a, b, c] = faces[f].map(|i| v[i as usize]);
            triangle_ball_area(&a, &b, &c, &center, radius)
        })
        .sum();
    if area > 0.0 {
        weighted / area
    } else {
        0.0
    }
}

/// The four geometry domains of a mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshGeometryDomains {
    /// Per vertex.
    pub curvature: Vec<f64>,
    /// Per interior edge, radians in `[-pi, pi]`.
    pub dihedral: Vec<f64>,
    /// Per face.
    pub face_area: Vec<f64>,
    /// Per face corner, three per non-degenerate face.
    pub face_angle: Vec<f64>,
    pub isolated_vertices: usize,
    pub degenerate_faces: usize,
}

pub fn project_mesh_geometry(
    mesh: &ColoredMesh,
    config: &CurvatureConfig,
) -> Result<MeshGeometryDomains, GeometryError> {
    if mesh.face_count() == 0 {
        return Err(GeometryError::NoFaces);
    }
    let topo = Topology::build(mesh);
    topo.check_manifold()?;
    let curvature = curvature_with(&topo, config)?;
    let dihedral = collect_dihedrals(&topo).into_iter().map(|d| d.angle).collect();
    let measures = face_area_angles(mesh);
    Ok(MeshGeometryDomains {
        curvature: curvature.values,
        dihedral,
        face_area: measures.areas,
        face_angle: measures.angles,
        isolated_vertices: curvature.isolated_vertices,
        degenerate_faces: measures.degenerate_faces,
    })
}
