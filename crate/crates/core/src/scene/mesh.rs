//! Triangle meshes and ASCII Wavefront OBJ input/output.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Isometry3, Point3, Vector3};

use crate::error::{Error, Result};

/// Triangles with area below this are dropped at construction.
const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Builds a mesh, rejecting out-of-range indices and dropping zero-area
    /// triangles.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::Invalid(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        let triangles = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                (b - a).cross(&(c - a)).norm() * 0.5 > DEGENERATE_AREA
            })
            .collect();
        Ok(TriMesh {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() || self.triangles.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Vector3<f64>; 3] {
        self.triangles[i].map(|k| self.vertices[k as usize])
    }

    /// Appends `other`, re-indexing its triangles.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| iso.transform_point(&Point3::from(*v)).coords)
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| v * s).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Axis-aligned bounds in the mesh's own frame.
    pub fn bounds(&self) -> Option<(Vector3<f64>, Vector3<f64>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    /// Closed box between two corners.
    pub fn cuboid(min: Vector3<f64>, max: Vector3<f64>) -> TriMesh {
        Self::box_faces(min, max, true)
    }

    /// Box without its +Z face. Used where a support surface polygon closes
    /// the top so the two never fight for the same depth.
    pub fn cuboid_open_top(min: Vector3<f64>, max: Vector3<f64>) -> TriMesh {
        Self::box_faces(min, max, false)
    }

    fn box_faces(min: Vector3<f64>, max: Vector3<f64>, top: bool) -> TriMesh {
        let c = |i: usize| {
            Vector3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        };
        let vertices = (0..8).map(c).collect();
        let mut quads: Vec<[u32; 4]> = vec![
            [0, 2, 3, 1], // -z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        if top {
            quads.push([4, 5, 7, 6]);
        }
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Closed cylinder along +Z from `z0` to `z1`.
    pub fn cylinder(radius: f64, z0: f64, z1: f64, segments: usize) -> TriMesh {
        Self::frustum(radius, radius, z0, z1, segments, true)
    }

    /// Truncated cone with optional top cap. Radii may differ.
    pub fn frustum(
        r_bottom: f64,
        r_top: f64,
        z0: f64,
        z1: f64,
        segments: usize,
        cap_top: bool,
    ) -> TriMesh {
        let n = segments.max(3);
        let mut vertices = Vec::with_capacity(2 * n + 2);
        for k in 0..n {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            vertices.push(Vector3::new(r_bottom * a.cos(), r_bottom * a.sin(), z0));
        }
        for k in 0..n {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            vertices.push(Vector3::new(r_top * a.cos(), r_top * a.sin(), z1));
        }
        let bottom_c = vertices.len() as u32;
        vertices.push(Vector3::new(0.0, 0.0, z0));
        let top_c = vertices.len() as u32;
        vertices.push(Vector3::new(0.0, 0.0, z1));
        let n32 = n as u32;
        let mut triangles = Vec::with_capacity(4 * n);
        for k in 0..n32 {
            let k1 = (k + 1) % n32;
            triangles.push([k, k1, n32 + k1]);
            triangles.push([k, n32 + k1, n32 + k]);
            triangles.push([bottom_c, k1, k]);
            if cap_top {
                triangles.push([top_c, n32 + k, n32 + k1]);
            }
        }
        TriMesh::new(vertices, triangles).expect("frustum indices in range")
    }

    /// UV sphere centered at `center`.
    pub fn sphere(center: Vector3<f64>, radius: f64, segments: usize, rings: usize) -> TriMesh {
        let (n, m) = (segments.max(3), rings.max(2));
        let mut vertices = vec![center + Vector3::new(0.0, 0.0, -radius)];
        for j in 1..m {
            let phi = std::f64::consts::PI * j as f64 / m as f64 - std::f64::consts::FRAC_PI_2;
            for k in 0..n {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                vertices.push(
                    center
                        + radius * Vector3::new(phi.cos() * th.cos(), phi.cos() * th.sin(), phi.sin()),
                );
            }
        }
        vertices.push(center + Vector3::new(0.0, 0.0, radius));
        let top = (vertices.len() - 1) as u32;
        let ring = |j: usize, k: usize| (1 + (j - 1) * n + k % n) as u32;
        let mut triangles = Vec::new();
        for k in 0..n {
            triangles.push([0, ring(1, k + 1), ring(1, k)]);
            triangles.push([top, ring(m - 1, k), ring(m - 1, k + 1)]);
        }
        for j in 1..m - 1 {
            for k in 0..n {
                triangles.push([ring(j, k), ring(j, k + 1), ring(j + 1, k + 1)]);
                triangles.push([ring(j, k), ring(j + 1, k + 1), ring(j + 1, k)]);
            }
        }
        TriMesh::new(vertices, triangles).expect("sphere indices in range")
    }

    /// Parses the `v` and `f` records of an OBJ document. Polygonal faces are
    /// fan-triangulated; texture and normal indices are ignored.
    pub fn from_obj_str(src: &str, origin: &Path) -> Result<TriMesh> {
        let err = |line: usize, msg: &str| Error::MeshParse {
            path: origin.to_path_buf(),
            line,
            msg: msg.to_string(),
        };
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, raw) in src.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let xyz: Vec<f64> = parts
                        .take(3)
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(lineno, "bad vertex coordinate"))?;
                    if xyz.len() != 3 {
                        return Err(err(lineno, "vertex needs 3 coordinates"));
                    }
                    vertices.push(Vector3::new(xyz[0], xyz[1], xyz[2]));
                }
                Some("f") => {
                    let mut idx = Vec::new();
                    for tok in parts {
                        let first = tok.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| err(lineno, "bad face index"))?;
                        let resolved = if i > 0 {
                            i - 1
                        } else if i < 0 {
                            vertices.len() as i64 + i
                        } else {
                            return Err(err(lineno, "face index 0"));
                        };
                        if resolved < 0 || resolved >= vertices.len() as i64 {
                            return Err(err(lineno, "face index out of range"));
                        }
                        idx.push(resolved as u32);
                    }
                    if idx.len() < 3 {
                        return Err(err(lineno, "face needs at least 3 vertices"));
                    }
                    for k in 1..idx.len() - 1 {
                        triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        TriMesh::new(vertices, triangles)
    }

    pub fn load_obj(path: &Path) -> Result<TriMesh> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_obj_str(&src, path)
    }

    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}
