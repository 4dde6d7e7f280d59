use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;

use super::Aabb3;

/// Indexed triangle mesh with per-triangle geometric normals.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Unit normals, counter-clockwise winding faces outward.
    pub normals: Vec<Vec3>,
}

impl TriMesh {
    /// Builds a mesh, dropping zero-area triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<TriMesh> {
        let n = vertices.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::InvalidArgument(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        let mut mesh = TriMesh {
            vertices,
            triangles: Vec::with_capacity(triangles.len()),
            normals: Vec::with_capacity(triangles.len()),
        };
        for tri in triangles {
            let [a, b, c] = tri.map(|i| mesh.vertices[i as usize]);
            let n = (b - a).cross(c - a);
            let len = n.length();
            if len > 0.0 && len.is_finite() {
                mesh.triangles.push(tri);
                mesh.normals.push(n / len);
            }
        }
        if mesh.triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(mesh)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    #[inline]
    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        self.triangles[tri].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_bounds(&self, tri: usize) -> Aabb3 {
        let [a, b, c] = self.corners(tri);
        Aabb3::new(a.min(b).min(c), a.max(b).max(c))
    }

    pub fn bounds(&self) -> Aabb3 {
        (0..self.triangles.len()).fold(Aabb3::EMPTY, |acc, i| acc.union(&self.triangle_bounds(i)))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.corners(i);
                0.5 * (b - a).cross(c - a).length()
            })
            .sum()
    }

    /// Recenters on the bounding-box center and scales so the farthest
    /// vertex sits at distance 1.
    pub fn normalized(&self) -> TriMesh {
        let b = self.bounds();
        let center = (b.min + b.max) * 0.5;
        let radius = self
            .vertices
            .iter()
            .map(|v| v.distance(center))
            .fold(0.0, f64::max);
        let scale = if radius > 0.0 { 1.0 / radius } else { 1.0 };
        TriMesh {
            vertices: self.vertices.iter().map(|v| (*v - center) * scale).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.clone(),
        }
    }
}

/// Parses the `v` and `f` records of Wavefront OBJ text. Polygons are fan
/// triangulated, `v/vt/vn` references keep only the vertex index, negative
/// indices count back from the last vertex, and other records are ignored.
pub fn load_mesh(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::MeshParse {
                        line: line_no,
                        message: format!("bad vertex coordinate: {e}"),
                    })?;
                if coords.len() != 3 {
                    return Err(Error::MeshParse {
                        line: line_no,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let indices = tokens
                    .map(|t| resolve_index(t, vertices.len(), line_no))
                    .collect::<Result<Vec<u32>>>()?;
                if indices.len() < 3 {
                    return Err(Error::MeshParse {
                        line: line_no,
                        message: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..indices.len() - 1 {
                    triangles.push([indices[0], indices[k], indices[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles)
}

fn resolve_index(token: &str, vertex_count: usize, line: usize) -> Result<u32> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| Error::MeshParse {
        line,
        message: format!("bad face index {token:?}"),
    })?;
    let index = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        vertex_count as i64 + raw
    } else {
        -1
    };
    if index < 0 || index >= vertex_count as i64 {
        return Err(Error::MeshParse {
            line,
            message: format!("face index {raw} out of range ({vertex_count} vertices defined)"),
        });
    }
    Ok(index as u32)
}

pub fn load_mesh_file(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_mesh(&text).map_err(|e| match e {
        Error::MeshParse { line, message } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        Error::EmptyMesh => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "mesh has no triangles".into(),
        },
        other => other,
    })
}
