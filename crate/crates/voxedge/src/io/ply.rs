//! PLY point-cloud serialization.
//!
//! The writer emits `element vertex` with `float x/y/z` and, when the cloud
//! carries colors, `uchar red/green/blue`, in ascii or binary-little-endian
//! form. The reader handles both formats, skips unknown properties and
//! non-vertex elements, and accepts the common scalar type aliases
//! (`uchar`/`uint8` and friends). Binary round-trips are bit-exact; ascii
//! coordinates print in shortest round-trip form, so re-reading reproduces
//! the written f32 values exactly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::PointCloud;

/// On-disk PLY flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Write a cloud as a PLY file. Coordinates are stored as f32.
pub fn write_ply(cloud: &PointCloud, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    let format_line = match format {
        PlyFormat::Ascii => "format ascii 1.0",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0",
    };
    let mut header = String::new();
    let _ = writeln!(header, "ply");
    let _ = writeln!(header, "{format_line}");
    let _ = writeln!(header, "element vertex {}", cloud.len());
    let _ = writeln!(header, "property float x");
    let _ = writeln!(header, "property float y");
    let _ = writeln!(header, "property float z");
    if cloud.colors().is_some() {
        let _ = writeln!(header, "property uchar red");
        let _ = writeln!(header, "property uchar green");
        let _ = writeln!(header, "property uchar blue");
    }
    let _ = writeln!(header, "end_header");
    w.write_all(header.as_bytes())?;

    match format {
        PlyFormat::Ascii => {
            let mut body = String::new();
            for (i, p) in cloud.points().iter().enumerate() {
                let _ = write!(body, "{} {} {}", p[0] as f32, p[1] as f32, p[2] as f32);
                if let Some(colors) = cloud.colors() {
                    let c = colors[i];
                    let _ = write!(body, " {} {} {}", c[0], c[1], c[2]);
                }
                body.push('\n');
            }
            w.write_all(body.as_bytes())?;
        }
        PlyFormat::BinaryLittleEndian => {
            for (i, p) in cloud.points().iter().enumerate() {
                for &c in p {
                    w.write_all(&(c as f32).to_le_bytes())?;
                }
                if let Some(colors) = cloud.colors() {
                    w.write_all(&colors[i])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
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
    fn parse(token: &str) -> Option<Scalar> {
        Some(match token {
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

    /// Decode one binary value as f64 (lossless for every type but wide u32/i32
    /// values, which f64 holds exactly anyway).
    fn decode(self, bytes: &[u8]) -> f64 {
        match self {
            Scalar::I8 => bytes[0] as i8 as f64,
            Scalar::U8 => bytes[0] as f64,
            Scalar::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes([
                bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6], bytes[7],
            ]),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar(Scalar, String),
    List(Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct HeaderInfo {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedPly {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<HeaderInfo> {
    let mut offset = 0;
    let mut next_line = || -> Result<String> {
        if offset >= bytes.len() {
            return Err(malformed(path, "header ended before end_header"));
        }
        let rest = &bytes[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| malformed(path, "header ended before end_header"))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| malformed(path, "non-UTF-8 header line"))?;
        offset += end + 1;
        Ok(line.trim_end_matches('\r').to_string())
    };

    if next_line()? != "ply" {
        return Err(malformed(path, "missing \"ply\" signature"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line()?;
        let mut tokens = line.split_ascii_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                format = Some(match tokens.next() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    Some(other) => {
                        return Err(malformed(path, format!("unsupported format \"{other}\"")))
                    }
                    None => return Err(malformed(path, "format line without a format")),
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| malformed(path, "element line without a name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(path, "element line without a valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed(path, "property before any element"))?;
                let kind = tokens
                    .next()
                    .ok_or_else(|| malformed(path, "property line without a type"))?;
                if kind == "list" {
                    let count_type = tokens
                        .next()
                        .and_then(Scalar::parse)
                        .ok_or_else(|| malformed(path, "bad list count type"))?;
                    let item_type = tokens
                        .next()
                        .and_then(Scalar::parse)
                        .ok_or_else(|| malformed(path, "bad list item type"))?;
                    if tokens.next().is_none() {
                        return Err(malformed(path, "list property without a name"));
                    }
                    element.props.push(Property::List(count_type, item_type));
                } else {
                    let scalar = Scalar::parse(kind)
                        .ok_or_else(|| malformed(path, format!("unknown type \"{kind}\"")))?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| malformed(path, "property without a name"))?;
                    element
                        .props
                        .push(Property::Scalar(scalar, name.to_string()));
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(malformed(
                    path,
                    format!("unexpected header line \"{other}\""),
                ))
            }
        }
    }
    let format = format.ok_or_else(|| malformed(path, "missing format line"))?;
    Ok(HeaderInfo {
        format,
        elements,
        body_offset: offset,
    })
}

/// Column positions of the recognized vertex properties.
struct VertexLayout {
    x: usize,
    y: usize,
    z: usize,
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(element: &Element, path: &Path) -> Result<VertexLayout> {
    let mut x = None;
    let mut y = None;
    let mut z = None;
    let mut red = None;
    let mut green = None;
    let mut blue = None;
    for (i, prop) in element.props.iter().enumerate() {
        if let Property::Scalar(scalar, name) = prop {
            match (name.as_str(), scalar) {
                ("x", Scalar::F32 | Scalar::F64) => x = Some(i),
                ("y", Scalar::F32 | Scalar::F64) => y = Some(i),
                ("z", Scalar::F32 | Scalar::F64) => z = Some(i),
                ("red", Scalar::U8) => red = Some(i),
                ("green", Scalar::U8) => green = Some(i),
                ("blue", Scalar::U8) => blue = Some(i),
                _ => {}
            }
        }
    }
    let (x, y, z) = match (x, y, z) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(malformed(path, "vertex element lacks float x/y/z")),
    };
    let rgb = match (red, green, blue) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(VertexLayout { x, y, z, rgb })
}

/// Read a PLY point cloud, in either supported format.
pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let header = parse_header(&bytes, path)?;
    let body = &bytes[header.body_offset..];
    match header.format {
        PlyFormat::Ascii => read_ascii_body(body, &header.elements, path),
        PlyFormat::BinaryLittleEndian => read_binary_body(body, &header.elements, path),
    }
}

fn read_ascii_body(body: &[u8], elements: &[Element], path: &Path) -> Result<PointCloud> {
    let text = std::str::from_utf8(body).map_err(|_| malformed(path, "non-UTF-8 ascii body"))?;
    let mut lines = text.lines();
    let mut cloud: Option<PointCloud> = None;

    for element in elements {
        let is_vertex = element.name == "vertex";
        let layout = if is_vertex {
            Some(vertex_layout(element, path)?)
        } else {
            None
        };
        let mut points = Vec::with_capacity(if is_vertex { element.count } else { 0 });
        let mut colors = Vec::new();

        for row in 0..element.count {
            let line = lines.next().ok_or_else(|| {
                malformed(
                    path,
                    format!(
                        "element \"{}\" declares {} rows but the body ends at row {}",
                        element.name, element.count, row
                    ),
                )
            })?;
            let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
            let mut cursor = 0;
            let mut values = Vec::with_capacity(element.props.len());
            for prop in &element.props {
                match prop {
                    Property::Scalar(scalar, _) => {
                        let token = tokens.get(cursor).ok_or_else(|| {
                            malformed(path, format!("short row in element \"{}\"", element.name))
                        })?;
                        // Parse at the declared width: an f32 written with the
                        // shortest round-trip representation re-reads bit-exact
                        // only when decoded as f32.
                        let v: f64 = if *scalar == Scalar::F32 {
                            token.parse::<f32>().map(f64::from).map_err(|_| {
                                malformed(path, format!("non-numeric token \"{token}\""))
                            })?
                        } else {
                            token.parse().map_err(|_| {
                                malformed(path, format!("non-numeric token \"{token}\""))
                            })?
                        };
                        values.push(v);
                        cursor += 1;
                    }
                    Property::List(_, _) => {
                        let n: usize = tokens
                            .get(cursor)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| malformed(path, "bad list count"))?;
                        values.push(f64::NAN);
                        cursor += 1 + n;
                        if cursor > tokens.len() {
                            return Err(malformed(path, "list runs past end of row"));
                        }
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push([values[layout.x], values[layout.y], values[layout.z]]);
                if let Some([r, g, b]) = layout.rgb {
                    colors.push([values[r] as u8, values[g] as u8, values[b] as u8]);
                }
            }
        }
        if is_vertex {
            let has_rgb = layout.as_ref().is_some_and(|l| l.rgb.is_some());
            cloud = Some(PointCloud::new(points, has_rgb.then_some(colors))?);
        }
    }
    cloud.ok_or_else(|| malformed(path, "no vertex element"))
}

fn read_binary_body(body: &[u8], elements: &[Element], path: &Path) -> Result<PointCloud> {
    let mut offset = 0usize;
    let mut cloud: Option<PointCloud> = None;

    for element in elements {
        let is_vertex = element.name == "vertex";
        let layout = if is_vertex {
            Some(vertex_layout(element, path)?)
        } else {
            None
        };
        let mut points = Vec::with_capacity(if is_vertex { element.count } else { 0 });
        let mut colors = Vec::new();

        for row in 0..element.count {
            let mut values = Vec::with_capacity(element.props.len());
            for prop in &element.props {
                match prop {
                    Property::Scalar(scalar, _) => {
                        let size = scalar.size();
                        let slice = body.get(offset..offset + size).ok_or_else(|| {
                            malformed(
                                path,
                                format!(
                                    "element \"{}\" declares {} rows but the body ends at row {}",
                                    element.name, element.count, row
                                ),
                            )
                        })?;
                        values.push(scalar.decode(slice));
                        offset += size;
                    }
                    Property::List(count_type, item_type) => {
                        let csize = count_type.size();
                        let slice = body
                            .get(offset..offset + csize)
                            .ok_or_else(|| malformed(path, "list count past end of body"))?;
                        let n = count_type.decode(slice) as usize;
                        offset += csize;
                        let skip = n * item_type.size();
                        if body.len() < offset + skip {
                            return Err(malformed(path, "list items past end of body"));
                        }
                        offset += skip;
                        values.push(f64::NAN);
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push([values[layout.x], values[layout.y], values[layout.z]]);
                if let Some([r, g, b]) = layout.rgb {
                    colors.push([values[r] as u8, values[g] as u8, values[b] as u8]);
                }
            }
        }
        if is_vertex {
            let has_rgb = layout.as_ref().is_some_and(|l| l.rgb.is_some());
            cloud = Some(PointCloud::new(points, has_rgb.then_some(colors))?);
        }
    }
    cloud.ok_or_else(|| malformed(path, "no vertex element"))
}
