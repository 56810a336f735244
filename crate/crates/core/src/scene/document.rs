//! Versioned JSON form of a [`Scene`].

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{EntityId, Fixture, Joint, ObjectInstance, Obb, Pose, Scene, SupportSurface, TriMesh};
use crate::error::{Error, Result};

pub const SCENE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub version: u32,
    pub seed: u64,
    pub objects: Vec<ObjectRecord>,
    pub surfaces: Vec<SupportSurface>,
    pub joints: Vec<Joint>,
    pub fixtures: Vec<FixtureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: EntityId,
    pub category: String,
    pub asset: String,
    pub pose: Pose,
    pub obb: Obb,
    pub is_container: bool,
    pub support: EntityId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub id: EntityId,
    pub archetype: String,
    pub pose: Pose,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub parts: Vec<Obb>,
}

impl SceneDocument {
    pub fn from_scene(scene: &Scene) -> Self {
        SceneDocument {
            version: SCENE_FORMAT_VERSION,
            seed: scene.seed,
            objects: scene
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id,
                    category: o.category.clone(),
                    asset: o.asset.clone(),
                    pose: o.pose,
                    obb: o.obb,
                    is_container: o.is_container,
                    support: o.support,
                })
                .collect(),
            surfaces: scene.surfaces.clone(),
            joints: scene.joints.clone(),
            fixtures: scene
                .fixtures
                .iter()
                .map(|f| FixtureRecord {
                    id: f.id,
                    archetype: f.archetype.clone(),
                    pose: f.pose,
                    vertices: f.mesh.vertices().iter().map(|v| (*v).into()).collect(),
                    triangles: f.mesh.triangles().to_vec(),
                    parts: f.parts.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene document serializes")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let doc: SceneDocument = serde_json::from_str(src)?;
        if doc.version != SCENE_FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported scene format version {}",
                doc.version
            )));
        }
        Ok(doc)
    }

    /// Rebuilds the scene; object meshes are looked up by asset key.
    pub fn into_scene(
        self,
        resolve: impl Fn(&str) -> Option<Arc<TriMesh>>,
    ) -> Result<Scene> {
        let objects = self
            .objects
            .into_iter()
            .map(|r| {
                let mesh = resolve(&r.asset)
                    .ok_or_else(|| Error::Invalid(format!("unknown asset {}", r.asset)))?;
                ObjectInstance::new(r.id, r.category, r.asset, mesh, r.pose, r.is_container, r.support)
            })
            .collect::<Result<Vec<_>>>()?;
        let fixtures = self
            .fixtures
            .into_iter()
            .map(|r| {
                let mesh = TriMesh::new(
                    r.vertices.into_iter().map(Vector3::from).collect(),
                    r.triangles,
                )?;
                Fixture::new(r.id, r.archetype, mesh, r.pose, r.parts)
            })
            .collect::<Result<Vec<_>>>()?;
        let scene = Scene {
            objects,
            surfaces: self.surfaces,
            joints: self.joints,
            fixtures,
            seed: self.seed,
        };
        scene.validate()?;
        Ok(scene)
    }
}
