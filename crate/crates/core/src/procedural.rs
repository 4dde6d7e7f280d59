//! Procedural meshes and background videos for demos and tests: a small
//! object catalog of primitive shapes and a corpus of animated patterns.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::math::Vec3;
use crate::pnm::{self, RgbImage};
use crate::seqplan::{BackgroundCorpus, BackgroundEntry, CatalogEntry, ObjectCatalog, Volume};

fn build(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> TriMesh {
    TriMesh::new(vertices, triangles).expect("procedural meshes are non-degenerate")
}

/// Axis-aligned box centred on the origin with edge lengths `size`.
pub fn box_mesh(size: Vec3) -> TriMesh {
    let h = size * 0.5;
    let vertices = (0..8)
        .map(|i| {
            let x = if matches!(i & 3, 1 | 2) { h.x } else { -h.x };
            let y = if i & 2 == 2 { h.y } else { -h.y };
            let z = if i & 4 == 4 { h.z } else { -h.z };
            Vec3::new(x, y, z)
        })
        .collect();
    // corners 0..4 go counter-clockwise around the bottom face, 4..8 the top
    let faces = [
        [0, 3, 2, 1],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ];
    let triangles = faces
        .iter()
        .flat_map(|f| [[f[0], f[1], f[2]], [f[0], f[2], f[3]]])
        .collect();
    build(vertices, triangles)
}

/// Unit sphere with poles on the z axis.
pub fn uv_sphere(segments: u32, rings: u32) -> TriMesh {
    let (segments, rings) = (segments.max(3), rings.max(2));
    let mut vertices = vec![Vec3::Z];
    for i in 1..rings {
        let theta = PI * i as f64 / rings as f64;
        for j in 0..segments {
            let phi = TAU * j as f64 / segments as f64;
            vertices.push(Vec3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ));
        }
    }
    vertices.push(-Vec3::Z);
    let south = vertices.len() as u32 - 1;
    let ring = |i: u32, j: u32| 1 + (i - 1) * segments + j % segments;
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
        for i in 1..rings - 1 {
            let (u0, u1, l0, l1) = (ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1));
            triangles.push([u0, l0, l1]);
            triangles.push([u0, l1, u1]);
        }
        triangles.push([south, ring(rings - 1, j + 1), ring(rings - 1, j)]);
    }
    build(vertices, triangles)
}

/// Closed cylinder of radius 1 along z, spanning `-height/2..height/2`.
pub fn cylinder(segments: u32, height: f64) -> TriMesh {
    let segments = segments.max(3);
    let mut vertices = Vec::new();
    for z in [0.5 * height, -0.5 * height] {
        for j in 0..segments {
            let phi = TAU * j as f64 / segments as f64;
            vertices.push(Vec3::new(phi.cos(), phi.sin(), z));
        }
    }
    vertices.push(Vec3::new(0.0, 0.0, 0.5 * height));
    vertices.push(Vec3::new(0.0, 0.0, -0.5 * height));
    let (top_c, bot_c) = (2 * segments, 2 * segments + 1);
    let top = |j: u32| j % segments;
    let bot = |j: u32| segments + j % segments;
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([top(j), bot(j), bot(j + 1)]);
        triangles.push([top(j), bot(j + 1), top(j + 1)]);
        triangles.push([top_c, top(j), top(j + 1)]);
        triangles.push([bot_c, bot(j + 1), bot(j)]);
    }
    build(vertices, triangles)
}

/// Cone with a unit-radius base at `-height/2` and its apex at `height/2`.
pub fn cone(segments: u32, height: f64) -> TriMesh {
    let segments = segments.max(3);
    let mut vertices: Vec<Vec3> = (0..segments)
        .map(|j| {
            let phi = TAU * j as f64 / segments as f64;
            Vec3::new(phi.cos(), phi.sin(), -0.5 * height)
        })
        .collect();
    vertices.push(Vec3::new(0.0, 0.0, 0.5 * height));
    vertices.push(Vec3::new(0.0, 0.0, -0.5 * height));
    let (apex, base_c) = (segments, segments + 1);
    let mut triangles = Vec::new();
    for j in 0..segments {
        let (a, b) = (j, (j + 1) % segments);
        triangles.push([apex, a, b]);
        triangles.push([base_c, b, a]);
    }
    build(vertices, triangles)
}

/// Torus around the z axis.
pub fn torus(major: f64, minor: f64, segments: u32, sides: u32) -> TriMesh {
    let (segments, sides) = (segments.max(3), sides.max(3));
    let mut vertices = Vec::new();
    for i in 0..segments {
        let u = TAU * i as f64 / segments as f64;
        for j in 0..sides {
            let v = TAU * j as f64 / sides as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: u32, j: u32| (i % segments) * sides + j % sides;
    let mut triangles = Vec::new();
    for i in 0..segments {
        for j in 0..sides {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    build(vertices, triangles)
}

/// Wavefront OBJ text with `v` and `f` records.
pub fn to_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Checkerboard with `cell`-pixel squares scrolling one pixel per frame.
pub fn checker_frame(width: u32, height: u32, frame: usize, cell: u32) -> RgbImage {
    let cell = cell.max(1);
    let mut img = RgbImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let on = ((x + frame as u32) / cell + y / cell).is_multiple_of(2);
            let g = (40 + 180 * y / height.max(1)) as u8;
            img.set(x, y, if on { [220, g, 60] } else { [30, g, 200] });
        }
    }
    img
}

/// Frame `frame` of animated pattern `variant`: drifting sine bands over a
/// checkerboard, with colours that depend on the variant.
pub fn pattern_frame(variant: usize, width: u32, height: u32, frame: usize) -> RgbImage {
    let mut img = RgbImage::new(width, height);
    let phase = variant as f64 * 1.7;
    let freq = 0.05 + 0.02 * (variant % 5) as f64;
    let cell = 6 + (variant % 4) as u32 * 3;
    let shift = (frame * (1 + variant % 3)) as u32;
    for y in 0..height {
        for x in 0..width {
            let band = ((x as f64 + 2.0 * frame as f64) * freq + phase).sin();
            let check = ((x + shift) / cell + y / cell).is_multiple_of(2);
            let r = 128.0 + 100.0 * band;
            let g = if check { 190.0 } else { 70.0 } + 30.0 * (phase + y as f64 * 0.03).cos();
            let b = 40.0 + 170.0 * y as f64 / height.max(1) as f64;
            img.set(x, y, [r as u8, g.clamp(0.0, 255.0) as u8, b as u8]);
        }
    }
    img
}

/// Sizes of a demo asset set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoSpec {
    pub backgrounds: usize,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
}

impl Default for DemoSpec {
    fn default() -> Self {
        DemoSpec {
            backgrounds: 12,
            frames: 51,
            width: 320,
            height: 180,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoAssets {
    pub corpus: PathBuf,
    pub catalog: PathBuf,
}

/// Five object types with two instances each.
pub fn demo_meshes() -> Vec<(&'static str, &'static str, TriMesh)> {
    vec![
        ("sphere", "sphere-smooth", uv_sphere(32, 16)),
        ("sphere", "sphere-faceted", uv_sphere(10, 6)),
        ("box", "box-cube", box_mesh(Vec3::splat(1.0))),
        ("box", "box-slab", box_mesh(Vec3::new(1.6, 1.0, 0.5))),
        ("cylinder", "cylinder-tall", cylinder(32, 2.2)),
        ("cylinder", "cylinder-puck", cylinder(32, 0.7)),
        ("torus", "torus-thin", torus(1.0, 0.3, 32, 12)),
        ("torus", "torus-thick", torus(1.0, 0.5, 32, 16)),
        ("cone", "cone-tall", cone(32, 2.0)),
        ("cone", "cone-squat", cone(32, 1.0)),
    ]
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes the demo mesh catalog (`meshes/*.obj`, `catalog.json`) and a
/// background corpus (`backgrounds/bg_*/%06d.ppm`, `corpus.json`) under `dir`.
pub fn write_demo_assets(dir: &Path, spec: &DemoSpec) -> Result<DemoAssets> {
    let mesh_dir = dir.join("meshes");
    create_dir(&mesh_dir)?;
    let mut instances = Vec::new();
    for (type_id, instance_id, mesh) in demo_meshes() {
        let file = format!("{instance_id}.obj");
        let path = mesh_dir.join(&file);
        std::fs::write(&path, to_obj(&mesh)).map_err(|e| Error::io(&path, e))?;
        instances.push(CatalogEntry {
            instance_id: instance_id.to_string(),
            type_id: type_id.to_string(),
            mesh: PathBuf::from("meshes").join(file),
            volume: Volume::Full,
            material: None,
        });
    }
    let catalog = ObjectCatalog {
        version: "demo-1".into(),
        instances,
        root: dir.to_path_buf(),
        source: None,
    };
    let catalog_path = dir.join("catalog.json");
    catalog.save(&catalog_path)?;

    let mut sequences = Vec::new();
    for b in 0..spec.backgrounds {
        let id = format!("bg_{b:03}");
        let rel = PathBuf::from("backgrounds").join(&id);
        let seq_dir = dir.join(&rel);
        create_dir(&seq_dir)?;
        for k in 0..spec.frames {
            let img = pattern_frame(b, spec.width, spec.height, k);
            pnm::write_ppm(&seq_dir.join(format!("{k:06}.ppm")), &img)?;
        }
        sequences.push(BackgroundEntry {
            id,
            path: rel,
            frames: spec.frames,
        });
    }
    let corpus = BackgroundCorpus {
        version: "demo-1".into(),
        sequences,
        root: dir.to_path_buf(),
        source: None,
    };
    let corpus_path = dir.join("corpus.json");
    corpus.save(&corpus_path)?;
    Ok(DemoAssets {
        corpus: corpus_path,
        catalog: catalog_path,
    })
}
