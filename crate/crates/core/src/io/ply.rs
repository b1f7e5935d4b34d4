//! PLY reader and writer for colored point clouds and triangle meshes.
//!
//! Accepts `ascii 1.0` and `binary_little_endian 1.0` bodies. The vertex
//! element must carry `x`, `y`, `z` (float or double) and `red`, `green`,
//! `blue` (uchar). Unknown properties and elements are skipped.

use std::fmt::Write as _;
use std::io::Write as _;

use crate::error::ModelError;
use crate::model::{ColoredMesh, ColoredPointCloud, ModelHandle, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, ModelError> {
    let malformed = |msg: &str| ModelError::MalformedHeader(msg.to_string());
    let mut pos = 0usize;
    let mut next_line = || -> Option<&[u8]> {
        if pos >= bytes.len() {
            return None;
        }
        let rest = &bytes[pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        pos += (end + 1).min(rest.len());
        let mut line = &rest[..end];
        if line.last() == Some(&b'\r') {
            line = &line[..line.len() - 1];
        }
        Some(line)
    };

    match next_line() {
        Some(b"ply") => {}
        _ => return Err(malformed("missing `ply` magic line")),
    }

    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line().ok_or_else(|| malformed("missing `end_header`"))?;
        let line = std::str::from_utf8(line).map_err(|_| malformed("header is not UTF-8"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            None => continue,
            Some("end_header") => break,
            Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                if tokens.len() != 3 {
                    return Err(malformed("format line needs a format and a version"));
                }
                if tokens[2] != "1.0" {
                    return Err(ModelError::UnsupportedFormat(format!(
                        "{} {}",
                        tokens[1], tokens[2]
                    )));
                }
                encoding = Some(match tokens[1] {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => return Err(ModelError::UnsupportedFormat(other.to_string())),
                });
            }
            Some("element") => {
                if tokens.len() != 3 {
                    return Err(malformed("element line needs a name and a count"));
                }
                let count = tokens[2]
                    .parse::<usize>()
                    .map_err(|_| malformed(&format!("bad element count `{}`", tokens[2])))?;
                elements.push(Element {
                    name: tokens[1].to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed("property declared before any element"))?;
                let property = match tokens.get(1).copied() {
                    Some("list") => {
                        if tokens.len() != 5 {
                            return Err(malformed("list property needs two types and a name"));
                        }
                        let count = Scalar::parse(tokens[2])
                            .ok_or_else(|| malformed(&format!("unknown type `{}`", tokens[2])))?;
                        let item = Scalar::parse(tokens[3])
                            .ok_or_else(|| malformed(&format!("unknown type `{}`", tokens[3])))?;
                        if !count.is_integer() {
                            return Err(malformed("list count type must be an integer"));
                        }
                        Property {
                            name: tokens[4].to_string(),
                            kind: PropertyKind::List { count, item },
                        }
                    }
                    Some(ty) => {
                        if tokens.len() != 3 {
                            return Err(malformed("property line needs a type and a name"));
                        }
                        let scalar = Scalar::parse(ty)
                            .ok_or_else(|| malformed(&format!("unknown type `{ty}`")))?;
                        Property {
                            name: tokens[2].to_string(),
                            kind: PropertyKind::Scalar(scalar),
                        }
                    }
                    None => return Err(malformed("empty property line")),
                };
                element.properties.push(property);
            }
            Some(other) => return Err(malformed(&format!("unexpected keyword `{other}`"))),
        }
    }

    let encoding = encoding.ok_or_else(|| malformed("missing `format` line"))?;
    Ok(Header {
        encoding,
        elements,
        body_start: pos,
    })
}

/// Source of scalar values for either body encoding.
trait ValueReader {
    /// `None` at end of input.
    fn read(&mut self, ty: Scalar) -> Result<Option<f64>, ModelError>;
}

struct BinaryReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl ValueReader for BinaryReader<'_> {
    fn read(&mut self, ty: Scalar) -> Result<Option<f64>, ModelError> {
        let n = ty.size();
        let Some(raw) = self.data.get(self.pos..self.pos + n) else {
            return Ok(None);
        };
        self.pos += n;
        let v = match ty {
            Scalar::I8 => raw[0] as i8 as f64,
            Scalar::U8 => raw[0] as f64,
            Scalar::I16 => i16::from_le_bytes([raw[0], raw[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([raw[0], raw[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(raw.try_into().expect("8-byte slice")),
        };
        Ok(Some(v))
    }
}

struct AsciiReader<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> AsciiReader<'a> {
    fn next_token(&mut self) -> Option<&'a [u8]> {
        while let Some(&b) = self.data.get(self.pos) {
            if !b.is_ascii_whitespace() {
                break;
            }
            if b == b'\n' {
                self.line += 1;
            }
            self.pos += 1;
        }
        let start = self.pos;
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }
}

impl ValueReader for AsciiReader<'_> {
    fn read(&mut self, ty: Scalar) -> Result<Option<f64>, ModelError> {
        let Some(token) = self.next_token() else {
            return Ok(None);
        };
        let line = self.line;
        let invalid = |message: String| ModelError::InvalidValue { line, message };
        let text = std::str::from_utf8(token).map_err(|_| invalid("non-UTF-8 token".into()))?;
        let v = match ty {
            Scalar::F32 => text
                .parse::<f32>()
                .map(f64::from)
                .map_err(|_| invalid(format!("`{text}` is not a float")))?,
            Scalar::F64 => text
                .parse::<f64>()
                .map_err(|_| invalid(format!("`{text}` is not a double")))?,
            _ => {
                let v = text
                    .parse::<i64>()
                    .map_err(|_| invalid(format!("`{text}` is not an integer")))?;
                let (lo, hi) = match ty {
                    Scalar::I8 => (i8::MIN as i64, i8::MAX as i64),
                    Scalar::U8 => (0, u8::MAX as i64),
                    Scalar::I16 => (i16::MIN as i64, i16::MAX as i64),
                    Scalar::U16 => (0, u16::MAX as i64),
                    Scalar::I32 => (i32::MIN as i64, i32::MAX as i64),
                    _ => (0, u32::MAX as i64),
                };
                if v < lo || v > hi {
                    return Err(invalid(format!("`{text}` out of range for its type")));
                }
                v as f64
            }
        };
        Ok(Some(v))
    }
}

struct VertexLayout {
    xyz: [usize; 3],
    rgb: [usize; 3],
}

fn vertex_layout(element: &Element) -> Result<VertexLayout, ModelError> {
    let find = |name: &'static str, float: bool| -> Result<usize, ModelError> {
        let (i, p) = element
            .properties
            .iter()
            .enumerate()
            .find(|(_, p)| p.name == name)
            .ok_or(ModelError::MissingProperty(name))?;
        let ok = match p.kind {
            PropertyKind::Scalar(s) if float => matches!(s, Scalar::F32 | Scalar::F64),
            PropertyKind::Scalar(s) => s == Scalar::U8,
            PropertyKind::List { .. } => false,
        };
        if !ok {
            return Err(ModelError::UnsupportedPropertyType {
                property: name.to_string(),
                ty: format!("{:?}", p.kind),
            });
        }
        Ok(i)
    };
    Ok(VertexLayout {
        xyz: [find("x", true)?, find("y", true)?, find("z", true)?],
        rgb: [
            find("red", false)?,
            find("green", false)?,
            find("blue", false)?,
        ],
    })
}

fn truncated(element: &Element, found: usize) -> ModelError {
    ModelError::TruncatedBody {
        element: element.name.clone(),
        expected: element.count,
        found,
    }
}

/// Parses a PLY byte stream. Returns a mesh when the file has at least one
/// face, otherwise a point cloud.
pub fn parse_ply(bytes: &[u8]) -> Result<ModelHandle, ModelError> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_start..];
    match header.encoding {
        PlyEncoding::Ascii => read_body(
            &header,
            &mut AsciiReader {
                data: body,
                pos: 0,
                line: 0,
            },
            body.len(),
        ),
        PlyEncoding::BinaryLittleEndian => {
            read_body(&header, &mut BinaryReader { data: body, pos: 0 }, body.len())
        }
    }
}

fn read_body<R: ValueReader>(
    header: &Header,
    reader: &mut R,
    body_len: usize,
) -> Result<ModelHandle, ModelError> {
    let vertex_element = header
        .elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| ModelError::MalformedHeader("no `vertex` element".into()))?;
    let layout = vertex_layout(vertex_element)?;

    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut colors: Vec<Rgb> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();

    for element in &header.elements {
        // Never trust the declared count for preallocation.
        let cap = element.count.min(body_len);
        match element.name.as_str() {
            "vertex" => {
                positions.reserve(cap);
                colors.reserve(cap);
                let mut record = vec![0.0f64; element.properties.len()];
                for i in 0..element.count {
                    for (slot, prop) in record.iter_mut().zip(&element.properties) {
                        *slot = match read_property(reader, &prop.kind)? {
                            Some(v) => v,
                            None => return Err(truncated(element, i)),
                        };
                    }
                    let p = layout.xyz.map(|k| record[k]);
                    if p.iter().any(|c| !c.is_finite()) {
                        return Err(ModelError::NonFiniteCoordinate { index: i });
                    }
                    positions.push(p);
                    colors.push(layout.rgb.map(|k| record[k] as u8));
                }
            }
            "face" => {
                let list_idx = element
                    .properties
                    .iter()
                    .position(|p| {
                        matches!(p.kind, PropertyKind::List { .. })
                            && (p.name == "vertex_indices" || p.name == "vertex_index")
                    })
                    .ok_or_else(|| {
                        ModelError::MalformedHeader(
                            "face element lacks a `vertex_indices` list".into(),
                        )
                    })?;
                faces.reserve(cap);
                for fi in 0..element.count {
                    let mut face = None;
                    for (pi, prop) in element.properties.iter().enumerate() {
                        if pi == list_idx {
                            let PropertyKind::List { count, item } = prop.kind else {
                                unreachable!()
                            };
                            let n = reader
                                .read(count)?
                                .ok_or_else(|| truncated(element, fi))?;
                            if n != 3.0 {
                                return Err(ModelError::NonTriangleFace {
                                    face: fi,
                                    vertices: n as usize,
                                });
                            }
                            let mut tri = [0u32; 3];
                            for slot in &mut tri {
                                let v = reader.read(item)?.ok_or_else(|| truncated(element, fi))?;
                                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                                    return Err(ModelError::IndexOutOfRange {
                                        face: fi,
                                        index: v as i64,
                                        vertex_count: vertex_element.count,
                                    });
                                }
                                *slot = v as u32;
                            }
                            face = Some(tri);
                        } else if read_property(reader, &prop.kind)?.is_none() {
                            return Err(truncated(element, fi));
                        }
                    }
                    faces.push(face.expect("list property visited"));
                }
            }
            _ => {
                for i in 0..element.count {
                    for prop in &element.properties {
                        if read_property(reader, &prop.kind)?.is_none() {
                            return Err(truncated(element, i));
                        }
                    }
                }
            }
        }
    }

    if faces.is_empty() {
        Ok(ModelHandle::PointCloud(ColoredPointCloud::new(
            positions, colors,
        )?))
    } else {
        Ok(ModelHandle::Mesh(ColoredMesh::new(positions, colors, faces)?))
    }
}

/// Reads one property; list properties are consumed and yield their count.
fn read_property<R: ValueReader>(
    reader: &mut R,
    kind: &PropertyKind,
) -> Result<Option<f64>, ModelError> {
    match *kind {
        PropertyKind::Scalar(s) => reader.read(s),
        PropertyKind::List { count, item } => {
            let Some(n) = reader.read(count)? else {
                return Ok(None);
            };
            if n < 0.0 {
                return Err(ModelError::MalformedHeader("negative list length".into()));
            }
            for _ in 0..n as u64 {
                if reader.read(item)?.is_none() {
                    return Ok(None);
                }
            }
            Ok(Some(n))
        }
    }
}

/// Serializes a model as PLY. Coordinates are written as 32-bit floats.
pub fn write_ply(model: &ModelHandle, encoding: PlyEncoding) -> Vec<u8> {
    let positions = model.positions();
    let colors = model.colors();
    let faces = model.as_mesh().map(|m| m.faces()).unwrap_or(&[]);

    let mut header = String::from("ply\n");
    header.push_str(match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", positions.len());
    for name in ["x", "y", "z"] {
        let _ = writeln!(header, "property float {name}");
    }
    for name in ["red", "green", "blue"] {
        let _ = writeln!(header, "property uchar {name}");
    }
    if !faces.is_empty() {
        let _ = writeln!(header, "element face {}", faces.len());
        header.push_str("property list uchar int vertex_indices\n");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    match encoding {
        PlyEncoding::Ascii => {
            let mut line = String::new();
            for (p, c) in positions.iter().zip(colors) {
                line.clear();
                let _ = writeln!(
                    line,
                    "{} {} {} {} {} {}",
                    p[0] as f32, p[1] as f32, p[2] as f32, c[0], c[1], c[2]
                );
                out.extend_from_slice(line.as_bytes());
            }
            for f in faces {
                let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            out.reserve(positions.len() * 15 + faces.len() * 13);
            for (p, c) in positions.iter().zip(colors) {
                for &x in p {
                    out.extend_from_slice(&(x as f32).to_le_bytes());
                }
                out.extend_from_slice(c);
            }
            for f in faces {
                out.push(3);
                for &i in f {
                    out.extend_from_slice(&(i as i32).to_le_bytes());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(format: &str, n: usize) -> String {
        format!(
            "ply\nformat {format} 1.0\nelement vertex {n}\nproperty float x\nproperty float y\n\
             property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
        )
    }

    #[test]
    fn single_vertex_ascii() {
        let text = header("ascii", 1) + "0 0 0 255 0 0\n";
        let model = parse_ply(text.as_bytes()).unwrap();
        let cloud = model.as_point_cloud().expect("point cloud");
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.colors()[0], [255, 0, 0]);
        assert_eq!(cloud.positions()[0], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn truncated_ascii_body() {
        let mut text = header("ascii", 10);
        for i in 0..9 {
            text += &format!("{i} 0 0 1 2 3\n");
        }
        let err = parse_ply(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, ModelError::TruncatedBody { expected: 10, found: 9, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn truncated_binary_body() {
        let mut bytes = header("binary_little_endian", 2).into_bytes();
        bytes.extend_from_slice(&[0u8; 15 + 7]);
        let err = parse_ply(&bytes).unwrap_err();
        assert!(matches!(err, ModelError::TruncatedBody { found: 1, .. }), "{err:?}");
    }

    #[test]
    fn big_endian_rejected() {
        let text = header("binary_big_endian", 1);
        assert!(matches!(
            parse_ply(text.as_bytes()),
            Err(ModelError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn missing_color_rejected() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
                    property float z\nend_header\n0 0 0\n";
        assert!(matches!(
            parse_ply(text.as_bytes()),
            Err(ModelError::MissingProperty("red"))
        ));
    }

    #[test]
    fn malformed_header_rejected() {
        assert!(matches!(
            parse_ply(b"plx\nformat ascii 1.0\nend_header\n"),
            Err(ModelError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_ply(b"ply\nformat ascii 1.0\nelement vertex 1\n"),
            Err(ModelError::MalformedHeader(_))
        ));
    }

    #[test]
    fn quad_face_rejected() {
        let text = "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\n\
                    property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
                    element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                    0 0 0 1 1 1\n1 0 0 1 1 1\n1 1 0 1 1 1\n0 1 0 1 1 1\n4 0 1 2 3\n";
        assert!(matches!(
            parse_ply(text.as_bytes()),
            Err(ModelError::NonTriangleFace { face: 0, vertices: 4 })
        ));
    }

    #[test]
    fn skips_unknown_properties_and_elements() {
        let text = "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 3\n\
                    property float x\nproperty float nx\nproperty float y\nproperty float z\n\
                    property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n\
                    element face 1\nproperty uchar flags\nproperty list uchar int vertex_indices\n\
                    element material 1\nproperty list uchar float params\nend_header\n\
                    0 9 0 0 10 20 30 255\n1 9 0 0 10 20 30 255\n0 9 1 0 10 20 30 255\n\
                    7 3 0 1 2\n2 0.5 0.25\n";
        let model = parse_ply(text.as_bytes()).unwrap();
        let mesh = model.as_mesh().expect("mesh");
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
        assert_eq!(mesh.vertices()[2], [0.0, 1.0, 0.0]);
        assert_eq!(mesh.vertex_colors()[1], [10, 20, 30]);
    }

    #[test]
    fn huge_declared_count_does_not_allocate() {
        let text = header("binary_little_endian", usize::MAX / 2);
        assert!(matches!(
            parse_ply(text.as_bytes()),
            Err(ModelError::TruncatedBody { found: 0, .. })
        ));
    }

    #[test]
    fn mesh_round_trip_both_encodings() {
        let mesh = ColoredMesh::new(
            vec![[0.0, 0.0, 0.0], [1.5, 0.0, -2.25], [0.0, 1.0, 0.125]],
            vec![[1, 2, 3], [4, 5, 6], [7, 8, 9]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let model = ModelHandle::Mesh(mesh);
        for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
            assert_eq!(parse_ply(&write_ply(&model, enc)).unwrap(), model);
        }
    }
}
