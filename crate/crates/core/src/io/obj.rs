//! Wavefront OBJ reader using the per-vertex color extension
//! (`v x y z r g b`, channels in `[0, 1]`).

use crate::error::ModelError;
use crate::model::{ColoredMesh, Rgb};

/// Scales a unit-range channel to 8 bits by rounding.
fn unit_to_u8(c: f64) -> u8 {
    (c * 255.0).round() as u8
}

pub fn parse_obj(bytes: &[u8]) -> Result<ColoredMesh, ModelError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ModelError::InvalidValue {
        line: 0,
        message: format!("file is not UTF-8: {e}"),
    })?;

    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut colors: Vec<Option<Rgb>> = Vec::new();
    // (1-based source line, raw indices)
    let mut raw_faces: Vec<(usize, [i64; 3])> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let invalid = |message: String| ModelError::InvalidValue {
            line: lineno,
            message,
        };
        match tokens.next() {
            Some("v") => {
                let nums = tokens
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| invalid(format!("`{t}` is not a number")))
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                if nums.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonFiniteCoordinate {
                        index: vertices.len(),
                    });
                }
                match nums.len() {
                    3 => colors.push(None),
                    6 => {
                        if nums[3..].iter().any(|c| !(0.0..=1.0).contains(c)) {
                            return Err(invalid("vertex color outside [0, 1]".into()));
                        }
                        colors.push(Some([
                            unit_to_u8(nums[3]),
                            unit_to_u8(nums[4]),
                            unit_to_u8(nums[5]),
                        ]));
                    }
                    n => return Err(invalid(format!("vertex line has {n} numbers"))),
                }
                vertices.push([nums[0], nums[1], nums[2]]);
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(ModelError::NonTriangleFace {
                        face: raw_faces.len(),
                        vertices: refs.len(),
                    });
                }
                let mut tri = [0i64; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    *slot = head
                        .parse::<i64>()
                        .map_err(|_| invalid(format!("bad face index `{r}`")))?;
                }
                raw_faces.push((lineno, tri));
            }
            _ => {}
        }
    }

    let any_colored = colors.iter().any(Option::is_some);
    let vertex_colors = if any_colored {
        // Report the source line of the first uncolored vertex.
        if let Some(missing) = colors.iter().position(Option::is_none) {
            let line = text
                .lines()
                .enumerate()
                .filter(|(_, l)| l.split_whitespace().next() == Some("v"))
                .nth(missing)
                .map(|(i, _)| i + 1)
                .unwrap_or(0);
            return Err(ModelError::MixedVertexColors { line });
        }
        colors.into_iter().flatten().collect()
    } else {
        vec![[255, 255, 255]; vertices.len()]
    };

    let n = vertices.len();
    let mut faces = Vec::with_capacity(raw_faces.len());
    for (fi, (_, tri)) in raw_faces.iter().enumerate() {
        let mut face = [0u32; 3];
        for (slot, &idx) in face.iter_mut().zip(tri) {
            // OBJ indices are 1-based; negative values count back from the end.
            let resolved = if idx > 0 {
                idx - 1
            } else if idx < 0 {
                n as i64 + idx
            } else {
                -1
            };
            if resolved < 0 || resolved >= n as i64 {
                return Err(ModelError::IndexOutOfRange {
                    face: fi,
                    index: idx,
                    vertex_count: n,
                });
            }
            *slot = resolved as u32;
        }
        faces.push(face);
    }

    ColoredMesh::new(vertices, vertex_colors, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colored_triangle() {
        let src = "# tri\nv 0 0 0 1 0 0\nv 1 0 0 1 0 0\nv 0 1 0 1 0 0\nf 1 2 3\n";
        let mesh = parse_obj(src.as_bytes()).unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.face_count(), 1);
        assert!(mesh.vertex_colors().iter().all(|&c| c == [255, 0, 0]));
    }

    #[test]
    fn face_index_out_of_range() {
        let src = "v 0 0 0 1 0 0\nv 1 0 0 1 0 0\nv 0 1 0 1 0 0\nf 1 2 5\n";
        assert!(matches!(
            parse_obj(src.as_bytes()),
            Err(ModelError::IndexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn half_gray_rounds_up() {
        let src = "v 0 0 0 0.5 0.5 0.5\nv 1 0 0 0 0 0\nv 0 1 0 1 1 1\nf 1 2 3\n";
        let mesh = parse_obj(src.as_bytes()).unwrap();
        // 0.5 * 255 = 127.5 rounds half away from zero
        assert_eq!(mesh.vertex_colors()[0], [128, 128, 128]);
    }

    #[test]
    fn uncolored_mesh_defaults_to_white() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n";
        let mesh = parse_obj(src.as_bytes()).unwrap();
        assert!(mesh.vertex_colors().iter().all(|&c| c == [255, 255, 255]));
    }

    #[test]
    fn mixed_colors_rejected() {
        let src = "v 0 0 0 1 0 0\nv 1 0 0\nv 0 1 0 1 0 0\nf 1 2 3\n";
        assert!(matches!(
            parse_obj(src.as_bytes()),
            Err(ModelError::MixedVertexColors { line: 2 })
        ));
    }

    #[test]
    fn quad_rejected() {
        let src = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(
            parse_obj(src.as_bytes()),
            Err(ModelError::NonTriangleFace { vertices: 4, .. })
        ));
    }

    #[test]
    fn negative_indices_resolve_from_end() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        assert_eq!(parse_obj(src.as_bytes()).unwrap().faces(), &[[0, 1, 2]]);
    }
}
