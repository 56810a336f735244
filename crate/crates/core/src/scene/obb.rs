//! Oriented bounding boxes and the separating-axis overlap test.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{Pose, TriMesh};
use crate::error::{Error, Result};

/// Smallest half-extent a box may have. Planar meshes get this thickness.
pub const MIN_HALF_EXTENT: f64 = 1e-9;

/// Boxes whose penetration along some axis is at most this are treated as
/// touching, not overlapping. Objects resting on a slab touch it exactly.
pub const TOUCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ObbRepr", try_from = "ObbRepr")]
pub struct Obb {
    pub center: Vector3<f64>,
    pub half_extents: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Obb {
    pub fn new(
        center: Vector3<f64>,
        half_extents: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
    ) -> Result<Self> {
        if half_extents.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Invalid(format!(
                "obb half-extents must be positive, got {half_extents:?}"
            )));
        }
        Ok(Obb {
            center,
            half_extents,
            orientation,
        })
    }

    pub fn axis_aligned(center: Vector3<f64>, half_extents: Vector3<f64>) -> Result<Self> {
        Self::new(center, half_extents, UnitQuaternion::identity())
    }

    /// Box axes as world-frame unit vectors.
    pub fn axes(&self) -> [Vector3<f64>; 3] {
        let r = self.orientation.to_rotation_matrix();
        let m = r.matrix();
        [m.column(0).into(), m.column(1).into(), m.column(2).into()]
    }

    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let [ax, ay, az] = self.axes();
        let h = self.half_extents;
        std::array::from_fn(|i| {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            self.center + ax * (sx * h.x) + ay * (sy * h.y) + az * (sz * h.z)
        })
    }

    /// Half the box's extent along a unit direction.
    pub fn support_radius(&self, dir: &Vector3<f64>) -> f64 {
        let [ax, ay, az] = self.axes();
        let h = self.half_extents;
        h.x * ax.dot(dir).abs() + h.y * ay.dot(dir).abs() + h.z * az.dot(dir).abs()
    }

    pub fn bottom_z(&self) -> f64 {
        self.center.z - self.support_radius(&Vector3::z())
    }

    pub fn top_z(&self) -> f64 {
        self.center.z + self.support_radius(&Vector3::z())
    }

    /// World-axis half-extents of the box's axis-aligned hull.
    pub fn aabb_half_extents(&self) -> Vector3<f64> {
        Vector3::new(
            self.support_radius(&Vector3::x()),
            self.support_radius(&Vector3::y()),
            self.support_radius(&Vector3::z()),
        )
    }

    pub fn contains_point(&self, p: &Vector3<f64>, eps: f64) -> bool {
        let d = p - self.center;
        let axes = self.axes();
        (0..3).all(|i| d.dot(&axes[i]).abs() <= self.half_extents[i] + eps)
    }
}

/// Tight box of the posed mesh: the object-frame axis-aligned bounds,
/// re-expressed in world coordinates with the pose's orientation.
pub fn world_obb(mesh: &TriMesh, pose: &Pose) -> Result<Obb> {
    let (lo, hi) = mesh
        .bounds()
        .ok_or_else(|| Error::DegenerateGeometry("empty mesh".into()))?;
    if mesh.triangles().is_empty() {
        return Err(Error::DegenerateGeometry("mesh has no triangles".into()));
    }
    let local_center = (lo + hi) * 0.5;
    let half = ((hi - lo) * 0.5).map(|h| h.max(MIN_HALF_EXTENT));
    Ok(Obb {
        center: pose.transform_point(&local_center),
        half_extents: half,
        orientation: pose.orientation,
    })
}

/// Separating-axis test over the 3 + 3 face normals and 9 edge cross products.
/// Touching boxes (penetration within [`TOUCH_TOLERANCE`]) do not overlap.
pub fn obb_overlap(a: &Obb, b: &Obb) -> bool {
    let t = b.center - a.center;
    let aa = a.axes();
    let ba = b.axes();
    let separated = |axis: &Vector3<f64>| {
        let ra = a.support_radius(axis);
        let rb = b.support_radius(axis);
        t.dot(axis).abs() >= ra + rb - TOUCH_TOLERANCE
    };
    for axis in aa.iter().chain(ba.iter()) {
        if separated(axis) {
            return false;
        }
    }
    for u in &aa {
        for v in &ba {
            let c = u.cross(v);
            let n = c.norm();
            // parallel edges: already covered by the face axes
            if n < 1e-9 {
                continue;
            }
            if separated(&(c / n)) {
                return false;
            }
        }
    }
    true
}

#[derive(Serialize, Deserialize)]
struct ObbRepr {
    center: [f64; 3],
    half_extents: [f64; 3],
    /// (w, x, y, z)
    orientation: [f64; 4],
}

impl From<Obb> for ObbRepr {
    fn from(o: Obb) -> Self {
        ObbRepr {
            center: o.center.into(),
            half_extents: o.half_extents.into(),
            orientation: super::quat_to_wxyz(&o.orientation),
        }
    }
}

impl TryFrom<ObbRepr> for Obb {
    type Error = Error;
    fn try_from(r: ObbRepr) -> Result<Self> {
        Obb::new(
            r.center.into(),
            r.half_extents.into(),
            super::quat_from_wxyz(r.orientation)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(c: [f64; 3]) -> Obb {
        Obb::axis_aligned(c.into(), Vector3::repeat(0.5)).unwrap()
    }

    #[test]
    fn unit_cube_identity_pose() {
        let m = TriMesh::cuboid(Vector3::repeat(-0.5), Vector3::repeat(0.5));
        let b = world_obb(&m, &Pose::identity()).unwrap();
        assert!(b.center.norm() < 1e-12);
        assert!((b.half_extents - Vector3::repeat(0.5)).norm() < 1e-12);
    }

    #[test]
    fn unit_cube_translated() {
        let m = TriMesh::cuboid(Vector3::repeat(-0.5), Vector3::repeat(0.5));
        let p = Pose::from_translation(Vector3::new(1.0, 0.0, 0.0));
        let b = world_obb(&m, &p).unwrap();
        assert!((b.center - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((b.half_extents - Vector3::repeat(0.5)).norm() < 1e-12);
    }

    #[test]
    fn empty_mesh_is_degenerate() {
        let e = world_obb(&TriMesh::default(), &Pose::identity()).unwrap_err();
        assert!(matches!(e, Error::DegenerateGeometry(_)));
    }

    #[test]
    fn identical_and_disjoint() {
        assert!(obb_overlap(&unit_box([0.0; 3]), &unit_box([0.0; 3])));
        assert!(!obb_overlap(&unit_box([0.0; 3]), &unit_box([3.0, 0.0, 0.0])));
    }

    #[test]
    fn touching_faces_do_not_overlap() {
        assert!(!obb_overlap(&unit_box([0.0; 3]), &unit_box([0.0, 0.0, 1.0])));
        assert!(obb_overlap(&unit_box([0.0; 3]), &unit_box([0.0, 0.0, 0.999])));
    }

    #[test]
    fn rotated_boxes_separated() {
        let a = Obb::new(
            Vector3::zeros(),
            Vector3::repeat(0.5),
            UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_4),
        )
        .unwrap();
        let b = Obb::new(
            Vector3::new(1.2, 1.2, 0.0),
            Vector3::repeat(0.5),
            UnitQuaternion::from_euler_angles(std::f64::consts::FRAC_PI_4, 0.0, 0.0),
        )
        .unwrap();
        assert!(!obb_overlap(&a, &b));
    }
}
