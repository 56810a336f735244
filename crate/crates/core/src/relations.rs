//! Camera-perspective spatial relations over 3D bounding boxes.
//!
//! Left/Right/InFront/Behind are measured in the camera frame. Above/Below,
//! NextTo, On and Inside use world gravity (+Z up).

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::raster::Camera;
use crate::scene::{polygon, EntityId, ObjectInstance, Scene, SupportSurface, P2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Left,
    Right,
    InFront,
    Behind,
    Above,
    Below,
    NextTo,
    On,
    Inside,
    Between,
    OnLeftPart,
    OnRightPart,
    OnFrontPart,
    OnBackPart,
}

impl RelationType {
    pub const ALL: [RelationType; 14] = [
        RelationType::Left,
        RelationType::Right,
        RelationType::InFront,
        RelationType::Behind,
        RelationType::Above,
        RelationType::Below,
        RelationType::NextTo,
        RelationType::On,
        RelationType::Inside,
        RelationType::Between,
        RelationType::OnLeftPart,
        RelationType::OnRightPart,
        RelationType::OnFrontPart,
        RelationType::OnBackPart,
    ];

    pub fn arity(self) -> usize {
        if self == RelationType::Between {
            2
        } else {
            1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Left => "left",
            RelationType::Right => "right",
            RelationType::InFront => "in_front",
            RelationType::Behind => "behind",
            RelationType::Above => "above",
            RelationType::Below => "below",
            RelationType::NextTo => "next_to",
            RelationType::On => "on",
            RelationType::Inside => "inside",
            RelationType::Between => "between",
            RelationType::OnLeftPart => "on_left_part",
            RelationType::OnRightPart => "on_right_part",
            RelationType::OnFrontPart => "on_front_part",
            RelationType::OnBackPart => "on_back_part",
        }
    }

    /// Relations whose reference is a support surface.
    pub fn is_surface_part(self) -> bool {
        matches!(
            self,
            RelationType::OnLeftPart
                | RelationType::OnRightPart
                | RelationType::OnFrontPart
                | RelationType::OnBackPart
        )
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationTuple {
    pub subject: EntityId,
    pub relation: RelationType,
    pub refs: Vec<EntityId>,
    pub camera: u32,
}

/// Thresholds for the predicates. Margins are relative to box extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelationParams {
    pub margin: f64,
    pub next_to_factor: f64,
    pub between_factor: f64,
    /// resting-contact tolerance for On, meters
    pub contact_tolerance: f64,
    /// dead band around the surface median line, meters
    pub median_epsilon: f64,
}

impl Default for RelationParams {
    fn default() -> Self {
        RelationParams {
            margin: 0.5,
            next_to_factor: 1.5,
            between_factor: 1.5,
            contact_tolerance: 0.01,
            median_epsilon: 1e-6,
        }
    }
}

/// A reference entity for a predicate.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Object(&'a ObjectInstance),
    Surface(&'a SupportSurface),
}

fn extent_along(o: &ObjectInstance, cam: &Camera, camera_axis: Vector3<f64>) -> f64 {
    2.0 * o.obb.support_radius(&cam.world_axis(camera_axis))
}

pub fn left(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams) -> bool {
    lateral(s, r, cam, p, -1.0)
}

pub fn right(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams) -> bool {
    lateral(s, r, cam, p, 1.0)
}

fn lateral(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams, sign: f64) -> bool {
    let cs = cam.world_to_camera(&s.obb.center);
    let cr = cam.world_to_camera(&r.obb.center);
    let dx = cs.x - cr.x;
    let ext = extent_along(s, cam, Vector3::x()) + extent_along(r, cam, Vector3::x());
    dx * sign > 0.0 && dx.abs() > p.margin * ext / 2.0 && (cs.z - cr.z).abs() < cs.z.min(cr.z)
}

pub fn in_front(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams) -> bool {
    depthwise(s, r, cam, p, -1.0)
}

pub fn behind(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams) -> bool {
    depthwise(s, r, cam, p, 1.0)
}

fn depthwise(s: &ObjectInstance, r: &ObjectInstance, cam: &Camera, p: &RelationParams, sign: f64) -> bool {
    let dz = cam.world_to_camera(&s.obb.center).z - cam.world_to_camera(&r.obb.center).z;
    let ext = extent_along(s, cam, Vector3::z()) + extent_along(r, cam, Vector3::z());
    dz * sign > 0.0 && dz.abs() > p.margin * ext / 2.0
}

pub fn above(s: &ObjectInstance, r: &ObjectInstance) -> bool {
    let (hs, hr) = (s.obb.aabb_half_extents(), r.obb.aabb_half_extents());
    let d = s.obb.center - r.obb.center;
    s.obb.bottom_z() >= r.obb.top_z() && d.x.abs() < hs.x + hr.x && d.y.abs() < hs.y + hr.y
}

pub fn below(s: &ObjectInstance, r: &ObjectInstance) -> bool {
    above(r, s)
}

pub fn next_to(s: &ObjectInstance, r: &ObjectInstance, p: &RelationParams) -> bool {
    let (hs, hr) = (s.obb.aabb_half_extents(), r.obb.aabb_half_extents());
    let d = (s.obb.center - r.obb.center).xy().norm();
    let reach = hs.xy().norm() + hr.xy().norm();
    let overlap = s.obb.top_z().min(r.obb.top_z()) - s.obb.bottom_z().max(r.obb.bottom_z());
    d < p.next_to_factor * reach && overlap > 0.0
}

fn top_face(o: &ObjectInstance) -> Vec<P2> {
    let pts: Vec<P2> = o.obb.corners().iter().map(|c| P2::new(c.x, c.y)).collect();
    polygon::convex_hull(&pts)
}

pub fn on(s: &ObjectInstance, r: Reference<'_>, p: &RelationParams) -> bool {
    let c = P2::new(s.obb.center.x, s.obb.center.y);
    match r {
        Reference::Object(o) => {
            (s.obb.bottom_z() - o.obb.top_z()).abs() <= p.contact_tolerance
                && polygon::contains(&top_face(o), &c)
        }
        Reference::Surface(surf) => {
            (s.obb.bottom_z() - surf.height).abs() <= p.contact_tolerance
                && polygon::contains(&surf.boundary, &c)
        }
    }
}

pub fn inside(s: &ObjectInstance, container: &ObjectInstance) -> bool {
    container.is_container
        && container.obb.contains_point(&s.obb.center, 0.0)
        && s.obb.top_z() < container.obb.top_z()
}

/// Subject lies near segment AB and strictly between A and B, measured in
/// the camera's horizontal (x, z) plane. Symmetric in A and B.
pub fn between(
    s: &ObjectInstance,
    a: &ObjectInstance,
    b: &ObjectInstance,
    cam: &Camera,
    p: &RelationParams,
) -> bool {
    let flat = |o: &ObjectInstance| {
        let c = cam.world_to_camera(&o.obb.center);
        nalgebra::Vector2::new(c.x, c.z)
    };
    let (ps, pa, pb) = (flat(s), flat(a), flat(b));
    let d = pb - pa;
    let len2 = d.norm_squared();
    if len2 < 1e-18 {
        return false;
    }
    let t = (ps - pa).dot(&d) / len2;
    let dist = (ps - (pa + d * t)).norm();
    t > 0.0 && t < 1.0 && dist < p.between_factor * s.obb.half_extents.norm()
}

/// Part of a surface relative to the camera-frame median lines of the
/// surface polygon's extent. Points on a median belong to neither half.
pub fn on_part(
    s: &ObjectInstance,
    surf: &SupportSurface,
    part: RelationType,
    cam: &Camera,
    p: &RelationParams,
) -> bool {
    if !on(s, Reference::Surface(surf), p) {
        return false;
    }
    let pts: Vec<Vector3<f64>> = surf
        .boundary
        .iter()
        .map(|q| cam.world_to_camera(&Vector3::new(q.x, q.y, surf.height)))
        .collect();
    let mid = |f: fn(&Vector3<f64>) -> f64| {
        let (lo, hi) = pts
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (lo + hi) / 2.0
    };
    let c = cam.world_to_camera(&s.obb.center);
    let eps = p.median_epsilon;
    match part {
        RelationType::OnLeftPart => c.x < mid(|v| v.x) - eps,
        RelationType::OnRightPart => c.x > mid(|v| v.x) + eps,
        RelationType::OnFrontPart => c.z < mid(|v| v.z) - eps,
        RelationType::OnBackPart => c.z > mid(|v| v.z) + eps,
        _ => false,
    }
}

/// Every relation tuple among the visible entities, sorted by
/// (subject, relation, refs) and deduplicated.
pub fn compute_relations(
    scene: &Scene,
    cam: &Camera,
    camera_id: u32,
    visible: &BTreeSet<EntityId>,
    p: &RelationParams,
) -> Vec<RelationTuple> {
    let mut objects: Vec<&ObjectInstance> =
        scene.objects.iter().filter(|o| visible.contains(&o.id)).collect();
    objects.sort_by_key(|o| o.id);
    let mut surfaces: Vec<&SupportSurface> =
        scene.surfaces.iter().filter(|s| visible.contains(&s.id)).collect();
    surfaces.sort_by_key(|s| s.id);

    let mut out = Vec::new();
    let mut push = |subject: EntityId, relation: RelationType, refs: Vec<EntityId>| {
        out.push(RelationTuple {
            subject,
            relation,
            refs,
            camera: camera_id,
        })
    };
    for s in &objects {
        for r in objects.iter().filter(|r| r.id != s.id) {
            let pairwise = [
                (RelationType::Left, left(s, r, cam, p)),
                (RelationType::Right, right(s, r, cam, p)),
                (RelationType::InFront, in_front(s, r, cam, p)),
                (RelationType::Behind, behind(s, r, cam, p)),
                (RelationType::Above, above(s, r)),
                (RelationType::Below, below(s, r)),
                (RelationType::NextTo, next_to(s, r, p)),
                (RelationType::On, on(s, Reference::Object(r), p)),
                (RelationType::Inside, inside(s, r)),
            ];
            for (rel, holds) in pairwise {
                if holds {
                    push(s.id, rel, vec![r.id]);
                }
            }
        }
        for surf in &surfaces {
            if on(s, Reference::Surface(surf), p) {
                push(s.id, RelationType::On, vec![surf.id]);
            }
            for part in [
                RelationType::OnLeftPart,
                RelationType::OnRightPart,
                RelationType::OnFrontPart,
                RelationType::OnBackPart,
            ] {
                if on_part(s, surf, part, cam, p) {
                    push(s.id, part, vec![surf.id]);
                }
            }
        }
        let others: Vec<&&ObjectInstance> = objects.iter().filter(|o| o.id != s.id).collect();
        for (i, a) in others.iter().enumerate() {
            for b in &others[i + 1..] {
                if between(s, a, b, cam, p) {
                    push(s.id, RelationType::Between, vec![a.id, b.id]);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
