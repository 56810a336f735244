//! Scene representation: poses, meshes, support surfaces, articulated
//! fixtures and posed object instances.

mod document;
mod mesh;
mod obb;
pub mod polygon;

use std::sync::Arc;

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub use document::{SceneDocument, SCENE_FORMAT_VERSION};
pub use mesh::TriMesh;
pub use obb::{obb_overlap, world_obb, Obb, MIN_HALF_EXTENT, TOUCH_TOLERANCE};
pub use polygon::P2;

use crate::error::{Error, Result};

/// Entity id shared by objects, surfaces and fixtures. 0 is background.
pub type EntityId = u32;
pub const BACKGROUND: EntityId = 0;

pub(crate) fn quat_to_wxyz(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

pub(crate) fn quat_from_wxyz(q: [f64; 4]) -> Result<UnitQuaternion<f64>> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    if (raw.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("quaternion {q:?} is not unit length")));
    }
    Ok(UnitQuaternion::new_unchecked(raw))
}

/// Rigid placement: position in meters and a unit orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PoseRepr", try_from = "PoseRepr")]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    position: [f64; 3],
    /// (w, x, y, z)
    orientation: [f64; 4],
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        PoseRepr {
            position: p.position.into(),
            orientation: quat_to_wxyz(&p.orientation),
        }
    }
}

impl TryFrom<PoseRepr> for Pose {
    type Error = Error;
    fn try_from(r: PoseRepr) -> Result<Self> {
        Pose::new(r.position.into(), r.orientation)
    }
}

impl Pose {
    /// `orientation` is (w, x, y, z) and must have unit norm within 1e-9.
    pub fn new(position: Vector3<f64>, orientation: [f64; 4]) -> Result<Self> {
        Ok(Pose {
            position,
            orientation: quat_from_wxyz(orientation)?,
        })
    }

    pub fn identity() -> Self {
        Pose {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Pose {
            position,
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_parts(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * p + self.position
    }

    pub fn inverse_transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    pub fn compose(&self, inner: &Pose) -> Pose {
        Pose {
            position: self.transform_point(&inner.position),
            orientation: self.orientation * inner.orientation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub fixture: EntityId,
    pub kind: JointKind,
    pub axis: [f64; 3],
    /// radians for revolute, meters for prismatic
    pub limits: [f64; 2],
    pub state: f64,
}

impl Joint {
    pub fn new(
        fixture: EntityId,
        kind: JointKind,
        axis: Vector3<f64>,
        limits: [f64; 2],
        state: f64,
    ) -> Result<Self> {
        if !(limits[0] <= state && state <= limits[1]) {
            return Err(Error::Invalid(format!(
                "joint state {state} outside limits {limits:?}"
            )));
        }
        if (axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid("joint axis must be a unit vector".into()));
        }
        Ok(Joint {
            fixture,
            kind,
            axis: axis.into(),
            limits,
            state,
        })
    }
}

/// Horizontal region objects can rest on. World up is +Z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSurface {
    pub id: EntityId,
    /// counterclockwise, world XY
    #[serde(with = "p2_list")]
    pub boundary: Vec<P2>,
    pub height: f64,
    pub parent_body: EntityId,
    pub up_normal: [f64; 3],
}

impl SupportSurface {
    pub fn new(id: EntityId, boundary: Vec<P2>, height: f64, parent_body: EntityId) -> Result<Self> {
        let mut boundary = boundary;
        if polygon::signed_area(&boundary) < 0.0 {
            boundary.reverse();
        }
        if !polygon::is_simple(&boundary) || polygon::area(&boundary) <= 0.0 {
            return Err(Error::Invalid(format!(
                "surface {id} boundary must be a simple polygon with positive area"
            )));
        }
        Ok(SupportSurface {
            id,
            boundary,
            height,
            parent_body,
            up_normal: [0.0, 0.0, 1.0],
        })
    }

    pub fn area(&self) -> f64 {
        polygon::area(&self.boundary)
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let c = polygon::centroid(&self.boundary);
        Vector3::new(c.x, c.y, self.height)
    }

    /// Fan-triangulated polygon at surface height, for rasterization.
    pub fn mesh(&self) -> TriMesh {
        let v = self
            .boundary
            .iter()
            .map(|p| Vector3::new(p.x, p.y, self.height))
            .collect();
        let t = polygon::fan(&self.boundary)
            .into_iter()
            .map(|f| f.map(|i| i as u32))
            .collect();
        TriMesh::new(v, t).expect("fan indices in range")
    }
}

#[derive(Debug, Clone)]
pub struct ObjectInstance {
    pub id: EntityId,
    pub category: String,
    /// key of the mesh in the asset repository
    pub asset: String,
    pub mesh: Arc<TriMesh>,
    pub pose: Pose,
    /// world frame, derived from mesh and pose
    pub obb: Obb,
    pub is_container: bool,
    /// surface this object rests on
    pub support: EntityId,
}

impl ObjectInstance {
    pub fn new(
        id: EntityId,
        category: impl Into<String>,
        asset: impl Into<String>,
        mesh: Arc<TriMesh>,
        pose: Pose,
        is_container: bool,
        support: EntityId,
    ) -> Result<Self> {
        let obb = world_obb(&mesh, &pose)?;
        Ok(ObjectInstance {
            id,
            category: category.into(),
            asset: asset.into(),
            mesh,
            pose,
            obb,
            is_container,
            support,
        })
    }

    pub fn world_vertices(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        self.mesh.vertices().iter().map(|v| self.pose.transform_point(v))
    }
}

/// Static body: furniture, floor. `parts` are its collision boxes.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: EntityId,
    pub archetype: String,
    pub mesh: Arc<TriMesh>,
    pub pose: Pose,
    pub obb: Obb,
    pub parts: Vec<Obb>,
}

impl Fixture {
    pub fn new(
        id: EntityId,
        archetype: impl Into<String>,
        mesh: TriMesh,
        pose: Pose,
        parts: Vec<Obb>,
    ) -> Result<Self> {
        let obb = world_obb(&mesh, &pose)?;
        Ok(Fixture {
            id,
            archetype: archetype.into(),
            mesh: Arc::new(mesh),
            pose,
            obb,
            parts,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Entity<'a> {
    Object(&'a ObjectInstance),
    Surface(&'a SupportSurface),
    Fixture(&'a Fixture),
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub objects: Vec<ObjectInstance>,
    pub surfaces: Vec<SupportSurface>,
    pub joints: Vec<Joint>,
    pub fixtures: Vec<Fixture>,
    pub seed: u64,
}

impl Scene {
    pub fn new(seed: u64) -> Self {
        Scene {
            seed,
            ..Default::default()
        }
    }

    pub fn next_id(&self) -> EntityId {
        let max = self
            .objects
            .iter()
            .map(|o| o.id)
            .chain(self.surfaces.iter().map(|s| s.id))
            .chain(self.fixtures.iter().map(|f| f.id))
            .max()
            .unwrap_or(BACKGROUND);
        max + 1
    }

    pub fn entity(&self, id: EntityId) -> Option<Entity<'_>> {
        if let Some(o) = self.object(id) {
            return Some(Entity::Object(o));
        }
        if let Some(s) = self.surface(id) {
            return Some(Entity::Surface(s));
        }
        self.fixtures
            .iter()
            .find(|f| f.id == id)
            .map(Entity::Fixture)
    }

    pub fn object(&self, id: EntityId) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn surface(&self, id: EntityId) -> Option<&SupportSurface> {
        self.surfaces.iter().find(|s| s.id == id)
    }

    /// Copy of the scene without `id` (and without any surface it owns).
    pub fn without_object(&self, id: EntityId) -> Scene {
        let mut s = self.clone();
        s.objects.retain(|o| o.id != id);
        s.surfaces.retain(|surf| surf.parent_body != id);
        s
    }

    /// Checks id uniqueness and that every object rests on a recorded
    /// surface. Returns a description of the first violation.
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<EntityId> = self
            .objects
            .iter()
            .map(|o| o.id)
            .chain(self.surfaces.iter().map(|s| s.id))
            .chain(self.fixtures.iter().map(|f| f.id))
            .collect();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != n || ids.first() == Some(&BACKGROUND) {
            return Err(Error::Invalid("entity ids must be unique and non-zero".into()));
        }
        for o in &self.objects {
            let s = self.surface(o.support).ok_or_else(|| {
                Error::Invalid(format!("object {} has no recorded support surface", o.id))
            })?;
            if (o.obb.bottom_z() - s.height).abs() > 1e-6 {
                return Err(Error::Invalid(format!(
                    "object {} bottom {} is not at surface height {}",
                    o.id,
                    o.obb.bottom_z(),
                    s.height
                )));
            }
        }
        Ok(())
    }
}

/// Region of `surface` under `obj`: the convex hull of the object's vertices
/// dropped onto the surface plane, intersected with the surface boundary.
pub fn footprint(obj: &ObjectInstance, surface: &SupportSurface) -> Result<Vec<P2>> {
    let projected: Vec<P2> = obj.world_vertices().map(|v| P2::new(v.x, v.y)).collect();
    let hull = polygon::convex_hull(&projected);
    if hull.len() < 3 {
        return Err(Error::NotOverSurface);
    }
    let clipped = polygon::clip_to_convex(&surface.boundary, &hull);
    if clipped.len() < 3 || polygon::area(&clipped) < 1e-12 {
        return Err(Error::NotOverSurface);
    }
    Ok(clipped)
}


mod p2_list {
    use super::P2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(pts: &[P2], s: S) -> Result<S::Ok, S::Error> {
        pts.iter()
            .map(|p| [p.x, p.y])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<P2>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[x, y]| P2::new(x, y)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SupportSurface {
        SupportSurface::new(1, polygon::rect(-1.0, -1.0, 1.0, 1.0), 0.75, 100).unwrap()
    }

    fn cube_at(x: f64, y: f64, z_bottom: f64) -> ObjectInstance {
        let mesh = Arc::new(TriMesh::cuboid(Vector3::repeat(-0.5), Vector3::repeat(0.5)));
        let pose = Pose::from_translation(Vector3::new(x, y, z_bottom + 0.5));
        ObjectInstance::new(7, "cube", "cube", mesh, pose, false, 1).unwrap()
    }

    #[test]
    fn pose_rejects_non_unit_quaternion() {
        assert!(Pose::new(Vector3::zeros(), [1.0, 0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn footprint_of_cube_on_table() {
        let s = SupportSurface::new(1, polygon::rect(-5.0, -5.0, 5.0, 5.0), 0.75, 100).unwrap();
        let fp = footprint(&cube_at(1.0, 2.0, 0.75), &s).unwrap();
        assert!((polygon::area(&fp) - 1.0).abs() < 1e-12);
        let c = polygon::centroid(&fp);
        assert!((c.x - 1.0).abs() < 1e-12 && (c.y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn footprint_half_off_edge() {
        // cube spans x in [0.5, 1.5]; table ends at x = 1
        let fp = footprint(&cube_at(1.0, 0.0, 0.75), &table()).unwrap();
        assert!((polygon::area(&fp) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn footprint_off_surface_errors() {
        let e = footprint(&cube_at(5.0, 0.0, 0.75), &table()).unwrap_err();
        assert!(matches!(e, Error::NotOverSurface));
    }

    #[test]
    fn sphere_footprint_area() {
        let r = 0.3;
        let mesh = Arc::new(TriMesh::sphere(Vector3::zeros(), r, 48, 24));
        let pose = Pose::from_translation(Vector3::new(0.0, 0.0, 0.75 + r));
        let o = ObjectInstance::new(3, "ball", "ball", mesh, pose, false, 1).unwrap();
        let a = polygon::area(&footprint(&o, &table()).unwrap());
        let disk = std::f64::consts::PI * r * r;
        assert!((a - disk).abs() / disk < 0.02, "{a} vs {disk}");
    }

    #[test]
    fn validate_catches_floating_object() {
        let mut scene = Scene::new(0);
        scene.surfaces.push(table());
        scene.objects.push(cube_at(0.0, 0.0, 0.80));
        assert!(scene.validate().is_err());
        scene.objects[0] = cube_at(0.0, 0.0, 0.75);
        scene.validate().unwrap();
    }
}
