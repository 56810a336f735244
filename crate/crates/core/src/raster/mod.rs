//! Z-buffered software rasterization into instance-id, depth and flat-shaded
//! color buffers, plus pinhole projection helpers.

mod camera;
mod mask;

use nalgebra::Vector3;
use rayon::prelude::*;

pub use camera::{deproject, project, Camera};
pub use mask::{Mask, PixelRect};

use crate::error::{Error, Result};
use crate::scene::{EntityId, Pose, Scene, TriMesh, BACKGROUND};

/// Geometry closer than this to the camera plane is clipped away.
pub const NEAR_PLANE: f64 = 1e-3;

pub const BACKGROUND_RGB: [u8; 3] = [24, 24, 28];

/// Rows per parallel work unit.
const BAND_ROWS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffers {
    pub width: u32,
    pub height: u32,
    pub instance_map: Vec<EntityId>,
    /// camera-frame z in meters, 0 where nothing was hit
    pub depth_map: Vec<f64>,
    pub rgb: Option<Vec<[u8; 3]>>,
}

impl FrameBuffers {
    pub fn empty(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        FrameBuffers {
            width,
            height,
            instance_map: vec![BACKGROUND; n],
            depth_map: vec![0.0; n],
            rgb: Some(vec![BACKGROUND_RGB; n]),
        }
    }

    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn id_at(&self, x: u32, y: u32) -> EntityId {
        self.instance_map[self.idx(x, y)]
    }

    pub fn depth_at(&self, x: u32, y: u32) -> f64 {
        self.depth_map[self.idx(x, y)]
    }

    /// Pixel count per entity id, background excluded, sorted by id.
    pub fn pixel_counts(&self) -> Vec<(EntityId, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for &id in &self.instance_map {
            if id != BACKGROUND {
                *counts.entry(id).or_insert(0usize) += 1;
            }
        }
        counts.into_iter().collect()
    }
}

/// One world-space triangle tagged with the entity that owns it.
#[derive(Debug, Clone, Copy)]
pub struct WorldTriangle {
    pub vertices: [Vector3<f64>; 3],
    pub id: EntityId,
}

fn push_mesh(out: &mut Vec<WorldTriangle>, mesh: &TriMesh, pose: &Pose, id: EntityId) {
    let world: Vec<Vector3<f64>> = mesh.vertices().iter().map(|v| pose.transform_point(v)).collect();
    out.extend(mesh.triangles().iter().map(|t| WorldTriangle {
        vertices: t.map(|i| world[i as usize]),
        id,
    }));
}

/// Every triangle drawn for a scene: fixtures, surfaces, then objects.
pub fn scene_triangles(scene: &Scene) -> Vec<WorldTriangle> {
    let mut out = Vec::new();
    for f in &scene.fixtures {
        push_mesh(&mut out, &f.mesh, &f.pose, f.id);
    }
    for s in &scene.surfaces {
        push_mesh(&mut out, &s.mesh(), &Pose::identity(), s.id);
    }
    for o in &scene.objects {
        push_mesh(&mut out, &o.mesh, &o.pose, o.id);
    }
    out
}

/// Stable per-entity color.
pub fn entity_color(id: EntityId) -> [u8; 3] {
    let mut z = (id as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    [
        64 + (z & 0xBF) as u8,
        64 + ((z >> 8) & 0xBF) as u8,
        64 + ((z >> 16) & 0xBF) as u8,
    ]
}

struct ScreenTriangle {
    uv: [(f64, f64); 3],
    inv_z: [f64; 3],
    inv_area: f64,
    bounds: (f64, f64, f64, f64),
    id: EntityId,
    color: [u8; 3],
}

/// Clips a camera-space triangle against the near plane; yields 0–2 triangles.
fn clip_near(tri: [Vector3<f64>; 3]) -> Vec<[Vector3<f64>; 3]> {
    let inside = |p: &Vector3<f64>| p.z >= NEAR_PLANE;
    if tri.iter().all(inside) {
        return vec![tri];
    }
    let mut poly: Vec<Vector3<f64>> = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        if inside(&a) {
            poly.push(a);
        }
        if inside(&a) != inside(&b) {
            let t = (NEAR_PLANE - a.z) / (b.z - a.z);
            poly.push(a + (b - a) * t);
        }
    }
    (1..poly.len().saturating_sub(1))
        .map(|k| [poly[0], poly[k], poly[k + 1]])
        .collect()
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

fn shade(cam_tri: &[Vector3<f64>; 3], base: [u8; 3]) -> [u8; 3] {
    let n = (cam_tri[1] - cam_tri[0]).cross(&(cam_tri[2] - cam_tri[0]));
    let light = Vector3::new(0.3, -0.6, -0.75).normalize();
    let k = match n.try_normalize(1e-15) {
        Some(n) => 0.35 + 0.65 * n.dot(&light).abs(),
        None => 1.0,
    };
    base.map(|c| (c as f64 * k).round().clamp(0.0, 255.0) as u8)
}

fn to_screen(tris: &[WorldTriangle], cam: &Camera) -> Vec<ScreenTriangle> {
    let mut out = Vec::with_capacity(tris.len());
    for t in tris {
        let cam_tri = t.vertices.map(|v| cam.world_to_camera(&v));
        if cam_tri.iter().all(|p| p.z < NEAR_PLANE) {
            continue;
        }
        let color = shade(&cam_tri, entity_color(t.id));
        for c in clip_near(cam_tri) {
            let uv = c.map(|p| (cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy));
            let area = edge(uv[0], uv[1], uv[2]);
            if area.abs() < 1e-12 {
                continue;
            }
            let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &(u, v) in &uv {
                u0 = u0.min(u);
                v0 = v0.min(v);
                u1 = u1.max(u);
                v1 = v1.max(v);
            }
            if u1 < -0.5 || v1 < -0.5 || u0 > cam.width as f64 - 0.5 || v0 > cam.height as f64 - 0.5 {
                continue;
            }
            out.push(ScreenTriangle {
                uv,
                inv_z: c.map(|p| 1.0 / p.z),
                inv_area: 1.0 / area,
                bounds: (u0, v0, u1, v1),
                id: t.id,
                color,
            });
        }
    }
    out
}

/// Rasterizes every fixture, surface and object triangle. Nearest depth wins;
/// between equal depths the earlier triangle keeps the pixel.
pub fn rasterize(scene: &Scene, cam: &Camera) -> FrameBuffers {
    rasterize_triangles(&scene_triangles(scene), cam)
}

pub fn rasterize_triangles(tris: &[WorldTriangle], cam: &Camera) -> FrameBuffers {
    let (w, h) = (cam.width as usize, cam.height as usize);
    let screen = to_screen(tris, cam);
    let mut fb = FrameBuffers::empty(cam.width, cam.height);
    let mut depth = vec![f64::INFINITY; w * h];
    let rgb = fb.rgb.as_mut().expect("fresh buffers carry rgb");
    fb.instance_map
        .par_chunks_mut(w * BAND_ROWS)
        .zip(depth.par_chunks_mut(w * BAND_ROWS))
        .zip(rgb.par_chunks_mut(w * BAND_ROWS))
        .enumerate()
        .for_each(|(band, ((ids, zs), colors))| {
            let row0 = band * BAND_ROWS;
            let rows = ids.len() / w;
            let (bv0, bv1) = (row0 as f64, (row0 + rows - 1) as f64);
            for t in &screen {
                let (u0, v0, u1, v1) = t.bounds;
                if v1 < bv0 - 0.5 || v0 > bv1 + 0.5 {
                    continue;
                }
                let x0 = u0.ceil().max(0.0) as usize;
                let x1 = (u1.floor() as i64).min(w as i64 - 1);
                let y0 = v0.ceil().max(bv0) as usize;
                let y1 = (v1.floor()).min(bv1) as i64;
                if x1 < x0 as i64 || y1 < y0 as i64 {
                    continue;
                }
                for y in y0..=y1 as usize {
                    let local = (y - row0) * w;
                    for x in x0..=x1 as usize {
                        let p = (x as f64, y as f64);
                        let b0 = edge(t.uv[1], t.uv[2], p) * t.inv_area;
                        let b1 = edge(t.uv[2], t.uv[0], p) * t.inv_area;
                        let b2 = edge(t.uv[0], t.uv[1], p) * t.inv_area;
                        if b0 < -1e-12 || b1 < -1e-12 || b2 < -1e-12 {
                            continue;
                        }
                        let inv = b0 * t.inv_z[0] + b1 * t.inv_z[1] + b2 * t.inv_z[2];
                        if inv <= 0.0 {
                            continue;
                        }
                        let z = 1.0 / inv;
                        let k = local + x;
                        if z < zs[k] {
                            zs[k] = z;
                            ids[k] = t.id;
                            colors[k] = t.color;
                        }
                    }
                }
            }
        });
    fb.depth_map = depth
        .into_iter()
        .map(|z| if z.is_finite() { z } else { 0.0 })
        .collect();
    fb
}

/// Pixels owned by `id`.
pub fn instance_mask(fb: &FrameBuffers, id: EntityId) -> Mask {
    let mut m = Mask::new(fb.width, fb.height);
    for (k, &owner) in fb.instance_map.iter().enumerate() {
        if owner == id {
            m.set(k as u32 % fb.width, k as u32 / fb.width, true);
        }
    }
    m
}

/// Mean of the deprojected pixel points plus `offset`. Points are pixel
/// coordinates; those off the image or without depth are skipped.
pub fn target_from_points(
    points: &[(f64, f64)],
    fb: &FrameBuffers,
    cam: &Camera,
    offset: Vector3<f64>,
) -> Result<Vector3<f64>> {
    let mut sum = Vector3::zeros();
    let mut n = 0usize;
    for &(u, v) in points {
        if !cam.contains_pixel(u, v) {
            continue;
        }
        let d = fb.depth_at(u.round() as u32, v.round() as u32);
        if d <= 0.0 {
            continue;
        }
        sum += deproject(u, v, d, cam)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoValidDepth);
    }
    Ok(sum / n as f64 + offset)
}
