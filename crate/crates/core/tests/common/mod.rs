//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix3, Vector3};
use pointgen_core::raster::{Camera, FrameBuffers};
use pointgen_core::relations::{RelationParams, RelationType};
use pointgen_core::scene::{EntityId, ObjectInstance, Scene, SupportSurface};

pub type Tuple = (EntityId, RelationType, Vec<EntityId>);

/// Box corners recomputed from the raw mesh and pose.
pub struct RawBox {
    pub id: EntityId,
    pub corners: [Vector3<f64>; 8],
    pub center: Vector3<f64>,
    rot: Matrix3<f64>,
    trans: Vector3<f64>,
    lo: Vector3<f64>,
    hi: Vector3<f64>,
    pub is_container: bool,
}

impl RawBox {
    pub fn of(o: &ObjectInstance) -> Self {
        let mut lo = Vector3::repeat(f64::MAX);
        let mut hi = Vector3::repeat(f64::MIN);
        for v in o.mesh.vertices() {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let rot = *o.pose.orientation.to_rotation_matrix().matrix();
        let trans = o.pose.position;
        let mut corners = [Vector3::zeros(); 8];
        for (i, c) in corners.iter_mut().enumerate() {
            let local = Vector3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            );
            *c = rot * local + trans;
        }
        let center = corners.iter().sum::<Vector3<f64>>() / 8.0;
        RawBox {
            id: o.id,
            corners,
            center,
            rot,
            trans,
            lo,
            hi,
            is_container: o.is_container,
        }
    }

    fn range(&self, f: impl Fn(&Vector3<f64>) -> f64) -> (f64, f64) {
        let vals: Vec<f64> = self.corners.iter().map(f).collect();
        (
            vals.iter().cloned().fold(f64::MAX, f64::min),
            vals.iter().cloned().fold(f64::MIN, f64::max),
        )
    }

    pub fn bottom(&self) -> f64 {
        self.range(|c| c.z).0
    }

    pub fn top(&self) -> f64 {
        self.range(|c| c.z).1
    }

    fn half_xy(&self) -> (f64, f64) {
        let (x0, x1) = self.range(|c| c.x);
        let (y0, y1) = self.range(|c| c.y);
        ((x1 - x0) / 2.0, (y1 - y0) / 2.0)
    }

    fn contains(&self, p: &Vector3<f64>) -> bool {
        let local = self.rot.transpose() * (p - self.trans);
        (0..3).all(|k| local[k] >= self.lo[k] && local[k] <= self.hi[k])
    }

    fn half_norm(&self) -> f64 {
        ((self.hi - self.lo) / 2.0).norm()
    }
}

fn cam_coords(cam: &Camera, p: &Vector3<f64>) -> Vector3<f64> {
    let r = cam.pose.orientation.to_rotation_matrix();
    r.matrix().transpose() * (p - cam.pose.position)
}

fn cam_extent(b: &RawBox, cam: &Camera, axis: usize) -> f64 {
    let (lo, hi) = b.range(|c| cam_coords(cam, c)[axis]);
    hi - lo
}

/// Convex hull by gift wrapping; returns vertices counterclockwise.
fn gift_wrap(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap())
        .unwrap();
    let mut hull = vec![];
    let mut cur = start;
    loop {
        hull.push(points[cur]);
        let mut next = (cur + 1) % points.len();
        for i in 0..points.len() {
            let (o, a, b) = (points[cur], points[next], points[i]);
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            let farther = (b.0 - o.0).hypot(b.1 - o.1) > (a.0 - o.0).hypot(a.1 - o.1);
            if cross < 0.0 || (cross == 0.0 && farther) {
                next = i;
            }
        }
        cur = next;
        if points[cur] == points[start] || hull.len() > points.len() {
            break;
        }
    }
    hull
}

fn inside_convex(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    (0..hull.len()).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    })
}

/// Winding number test.
fn inside_polygon(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut wn = 0i32;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && side > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

fn on_object(s: &RawBox, r: &RawBox, p: &RelationParams) -> bool {
    let xy: Vec<(f64, f64)> = r.corners.iter().map(|c| (c.x, c.y)).collect();
    (s.bottom() - r.top()).abs() <= p.contact_tolerance && inside_convex(&gift_wrap(&xy), (s.center.x, s.center.y))
}

fn on_surface(s: &RawBox, surf: &SupportSurface, p: &RelationParams) -> bool {
    let poly: Vec<(f64, f64)> = surf.boundary.iter().map(|q| (q.x, q.y)).collect();
    (s.bottom() - surf.height).abs() <= p.contact_tolerance && inside_polygon(&poly, (s.center.x, s.center.y))
}

fn pairwise(s: &RawBox, r: &RawBox, cam: &Camera, p: &RelationParams) -> Vec<RelationType> {
    let mut out = vec![];
    let (cs, cr) = (cam_coords(cam, &s.center), cam_coords(cam, &r.center));
    let ext_x = cam_extent(s, cam, 0) + cam_extent(r, cam, 0);
    let comparable = (cs.z - cr.z).abs() < cs.z.min(cr.z);
    if comparable && (cs.x - cr.x).abs() > p.margin * ext_x / 2.0 {
        out.push(if cs.x < cr.x { RelationType::Left } else { RelationType::Right });
    }
    let ext_z = cam_extent(s, cam, 2) + cam_extent(r, cam, 2);
    if (cs.z - cr.z).abs() > p.margin * ext_z / 2.0 {
        out.push(if cs.z < cr.z { RelationType::InFront } else { RelationType::Behind });
    }
    let (sx, sy) = s.half_xy();
    let (rx, ry) = r.half_xy();
    let horiz = (s.center.x - r.center.x).abs() < sx + rx && (s.center.y - r.center.y).abs() < sy + ry;
    if horiz && s.bottom() >= r.top() {
        out.push(RelationType::Above);
    }
    if horiz && r.bottom() >= s.top() {
        out.push(RelationType::Below);
    }
    let dist = (s.center.x - r.center.x).hypot(s.center.y - r.center.y);
    let reach = sx.hypot(sy) + rx.hypot(ry);
    let overlap = s.top().min(r.top()) - s.bottom().max(r.bottom());
    if dist < p.next_to_factor * reach && overlap > 0.0 {
        out.push(RelationType::NextTo);
    }
    if on_object(s, r, p) {
        out.push(RelationType::On);
    }
    if r.is_container && r.contains(&s.center) && s.top() < r.top() {
        out.push(RelationType::Inside);
    }
    out
}

fn surface_parts(s: &RawBox, surf: &SupportSurface, cam: &Camera, p: &RelationParams) -> Vec<RelationType> {
    if !on_surface(s, surf, p) {
        return vec![];
    }
    let mut out = vec![RelationType::On];
    let pts: Vec<Vector3<f64>> = surf
        .boundary
        .iter()
        .map(|q| cam_coords(cam, &Vector3::new(q.x, q.y, surf.height)))
        .collect();
    let c = cam_coords(cam, &s.center);
    for (axis, lower, upper) in [
        (0, RelationType::OnLeftPart, RelationType::OnRightPart),
        (2, RelationType::OnFrontPart, RelationType::OnBackPart),
    ] {
        let lo = pts.iter().map(|v| v[axis]).fold(f64::MAX, f64::min);
        let hi = pts.iter().map(|v| v[axis]).fold(f64::MIN, f64::max);
        let mid = (lo + hi) / 2.0;
        if c[axis] < mid - p.median_epsilon {
            out.push(lower);
        }
        if c[axis] > mid + p.median_epsilon {
            out.push(upper);
        }
    }
    out
}

fn between(s: &RawBox, a: &RawBox, b: &RawBox, cam: &Camera, p: &RelationParams) -> bool {
    let flat = |v: &Vector3<f64>| {
        let c = cam_coords(cam, v);
        (c.x, c.z)
    };
    let (ps, pa, pb) = (flat(&s.center), flat(&a.center), flat(&b.center));
    let (dx, dz) = (pb.0 - pa.0, pb.1 - pa.1);
    let len2 = dx * dx + dz * dz;
    if len2 < 1e-18 {
        return false;
    }
    let t = ((ps.0 - pa.0) * dx + (ps.1 - pa.1) * dz) / len2;
    let (qx, qz) = (pa.0 + t * dx, pa.1 + t * dz);
    t > 0.0 && t < 1.0 && (ps.0 - qx).hypot(ps.1 - qz) < p.between_factor * s.half_norm()
}

/// Brute-force evaluation of every predicate over the visible entities.
pub fn oracle_relations(
    scene: &Scene,
    cam: &Camera,
    visible: &BTreeSet<EntityId>,
    p: &RelationParams,
) -> BTreeSet<Tuple> {
    let boxes: Vec<RawBox> = scene
        .objects
        .iter()
        .filter(|o| visible.contains(&o.id))
        .map(RawBox::of)
        .collect();
    let surfaces: Vec<&SupportSurface> = scene.surfaces.iter().filter(|s| visible.contains(&s.id)).collect();
    let mut out = BTreeSet::new();
    for s in &boxes {
        for r in boxes.iter().filter(|r| r.id != s.id) {
            for rel in pairwise(s, r, cam, p) {
                out.insert((s.id, rel, vec![r.id]));
            }
        }
        for surf in &surfaces {
            for rel in surface_parts(s, surf, cam, p) {
                out.insert((s.id, rel, vec![surf.id]));
            }
        }
        for a in boxes.iter().filter(|a| a.id != s.id) {
            for b in boxes.iter().filter(|b| b.id != s.id && b.id > a.id) {
                if between(s, a, b, cam, p) {
                    out.insert((s.id, RelationType::Between, vec![a.id, b.id]));
                }
            }
        }
    }
    out
}

/// Pixel counts from a plain scan of the instance buffer.
pub fn recount_pixels(fb: &FrameBuffers) -> BTreeMap<EntityId, usize> {
    let mut m = BTreeMap::new();
    for &id in &fb.instance_map {
        if id != 0 {
            *m.entry(id).or_insert(0) += 1;
        }
    }
    m
}

/// Distance along the pixel's viewing ray (camera z) to the plane of each
/// world triangle the ray passes through, with barycentric tolerance `tol`.
pub fn ray_hits(
    cam: &Camera,
    tris: &[[Vector3<f64>; 3]],
    u: f64,
    v: f64,
    tol: f64,
) -> Vec<(usize, f64)> {
    let dir_cam = Vector3::new((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
    let r = *cam.pose.orientation.to_rotation_matrix().matrix();
    let dir = r * dir_cam;
    let o = cam.pose.position;
    let mut hits = vec![];
    for (i, t) in tris.iter().enumerate() {
        let e1 = t[1] - t[0];
        let e2 = t[2] - t[0];
        let pv = dir.cross(&e2);
        let det = e1.dot(&pv);
        if det.abs() < 1e-15 {
            continue;
        }
        let inv = 1.0 / det;
        let tv = o - t[0];
        let a = tv.dot(&pv) * inv;
        let qv = tv.cross(&e1);
        let b = dir.dot(&qv) * inv;
        let d = e2.dot(&qv) * inv;
        if a >= -tol && b >= -tol && a + b <= 1.0 + tol && d > 0.0 {
            hits.push((i, d));
        }
    }
    hits
}

pub fn small_scene_config(seed: u64) -> pointgen_core::procgen::GenConfig {
    pointgen_core::procgen::GenConfig {
        seed,
        objects_per_scene: [3, 6],
        fixtures_per_scene: [1, 2],
        image_size: [160, 120],
        ..Default::default()
    }
}

/// A camera looking down at the most populated surface from 1.2 m away.
pub fn overview_camera(scene: &Scene, width: u32, height: u32) -> Camera {
    let surf = scene
        .surfaces
        .iter()
        .max_by_key(|s| (scene.objects.iter().filter(|o| o.support == s.id).count(), std::cmp::Reverse(s.id)))
        .expect("scene has a surface");
    let target = surf.centroid();
    let eye = target + Vector3::new(0.7, -0.7, 0.7);
    let pose = Camera::look_at_pose(eye, target).unwrap();
    Camera::from_vertical_fov(width, height, 60.0, pose).unwrap()
}

/// Checks every covered pixel's depth against the planes of the triangles
/// its ray passes through. Returns the number of pixels checked.
pub fn audit_depth(scene: &Scene, cam: &Camera) -> Result<usize, String> {
    let tris = pointgen_core::raster::scene_triangles(scene);
    let verts: Vec<[Vector3<f64>; 3]> = tris.iter().map(|t| t.vertices).collect();
    let fb = pointgen_core::raster::rasterize(scene, cam);
    let mut checked = 0;
    for y in 0..fb.height {
        for x in 0..fb.width {
            let id = fb.id_at(x, y);
            if id == 0 {
                continue;
            }
            let d = fb.depth_at(x, y);
            let loose = ray_hits(cam, &verts, x as f64, y as f64, 1e-6);
            if !loose.iter().any(|&(i, t)| tris[i].id == id && (t - d).abs() <= 1e-3) {
                return Err(format!("pixel ({x}, {y}) id {id}: depth {d} on no hit plane"));
            }
            let strict = ray_hits(cam, &verts, x as f64, y as f64, -1e-6);
            if let Some(&(i, t)) = strict.iter().find(|&&(_, t)| t < d - 1e-3 && t > 1e-3) {
                return Err(format!("pixel ({x}, {y}): triangle {i} at {t} hidden behind depth {d}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
