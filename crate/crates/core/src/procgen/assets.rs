//! Object asset repository: meshes with category, scale, container interior
//! and stable resting orientations.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{polygon, TriMesh, P2};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// A resting orientation and the height of the mesh origin above the
/// support plane in that orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StablePose {
    /// (w, x, y, z)
    pub orientation: [f64; 4],
    pub rest_offset: f64,
}

impl StablePose {
    pub fn rotation(&self) -> Result<UnitQuaternion<f64>> {
        crate::scene::quat_from_wxyz(self.orientation)
    }
}

/// Floor of a container, in the mesh frame of its upright pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interior {
    pub polygon: Vec<[f64; 2]>,
    pub height: f64,
}

#[derive(Debug, Clone)]
pub struct Asset {
    pub key: String,
    pub category: String,
    pub mesh: Arc<TriMesh>,
    pub is_container: bool,
    pub interior: Option<Interior>,
    pub stable_poses: Vec<StablePose>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    key: String,
    category: String,
    mesh: String,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default)]
    is_container: bool,
    #[serde(default)]
    interior: Option<Interior>,
    #[serde(default)]
    stable_poses: Option<Vec<StablePose>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    assets: Vec<ManifestEntry>,
}

/// Resting orientations that put one of the mesh's bounding-box faces down.
///
/// A face qualifies when its area is at least 40% of the largest face and
/// the vertex centroid projects inside the contact patch (vertices within
/// 1 mm of the support plane). Containers only rest upright. If no face
/// qualifies the upright orientation is returned.
pub fn stable_poses(mesh: &TriMesh, upright_only: bool) -> Vec<StablePose> {
    let Some((lo, hi)) = mesh.bounds() else {
        return Vec::new();
    };
    let ext = hi - lo;
    let centroid = mesh.vertices().iter().sum::<Vector3<f64>>() / mesh.vertices().len() as f64;
    let faces: [(Vector3<f64>, f64); 6] = [
        (-Vector3::z(), ext.x * ext.y),
        (Vector3::z(), ext.x * ext.y),
        (-Vector3::x(), ext.y * ext.z),
        (Vector3::x(), ext.y * ext.z),
        (-Vector3::y(), ext.x * ext.z),
        (Vector3::y(), ext.x * ext.z),
    ];
    let max_area = faces.iter().map(|f| f.1).fold(0.0, f64::max);
    let mut out = Vec::new();
    for (k, (down, face_area)) in faces.iter().enumerate() {
        if upright_only && k != 0 {
            break;
        }
        if *face_area < 0.4 * max_area {
            continue;
        }
        let rot = UnitQuaternion::rotation_between(down, &-Vector3::z())
            .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI));
        let rotated: Vec<Vector3<f64>> = mesh.vertices().iter().map(|v| rot * v).collect();
        let min_z = rotated.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        let contact: Vec<P2> = rotated
            .iter()
            .filter(|v| v.z - min_z < 1e-3)
            .map(|v| P2::new(v.x, v.y))
            .collect();
        let hull = polygon::convex_hull(&contact);
        let c = rot * centroid;
        if hull.len() >= 3 && polygon::area(&hull) > 1e-8 && polygon::contains(&hull, &P2::new(c.x, c.y)) {
            out.push(StablePose {
                orientation: crate::scene::quat_to_wxyz(&rot),
                rest_offset: -min_z,
            });
        }
    }
    if out.is_empty() {
        let min_z = mesh.vertices().iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        out.push(StablePose {
            orientation: [1.0, 0.0, 0.0, 0.0],
            rest_offset: -min_z,
        });
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct AssetRepository {
    assets: Vec<Asset>,
}

impl AssetRepository {
    pub fn new(assets: Vec<Asset>) -> Self {
        AssetRepository { assets }
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.key == key)
    }

    pub fn mesh(&self, key: &str) -> Option<Arc<TriMesh>> {
        self.get(key).map(|a| a.mesh.clone())
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Asset> {
        if self.assets.is_empty() {
            return None;
        }
        Some(&self.assets[rng.random_range(0..self.assets.len())])
    }

    fn push_primitive(&mut self, category: &str, base: TriMesh, container: Option<Interior>, scales: &[f64]) {
        for (k, &s) in scales.iter().enumerate() {
            let mesh = base.scaled(s);
            let interior = container.as_ref().map(|i| Interior {
                polygon: i.polygon.iter().map(|p| [p[0] * s, p[1] * s]).collect(),
                height: i.height * s,
            });
            let is_container = interior.is_some();
            self.assets.push(Asset {
                key: format!("{category}/{k}"),
                category: category.to_string(),
                stable_poses: stable_poses(&mesh, is_container),
                mesh: Arc::new(mesh),
                is_container,
                interior,
            });
        }
    }

    /// Household objects built from primitives, three sizes per category.
    pub fn builtin() -> Self {
        let v = Vector3::new;
        let scales = [0.85, 1.0, 1.2];
        let mut repo = AssetRepository::default();
        repo.push_primitive("mug", TriMesh::frustum(0.04, 0.04, 0.0, 0.10, 20, false), None, &scales);
        repo.push_primitive("can", TriMesh::cylinder(0.033, 0.0, 0.12, 20), None, &scales);
        let mut bottle = TriMesh::cylinder(0.035, 0.0, 0.19, 20);
        bottle.append(&TriMesh::frustum(0.035, 0.014, 0.19, 0.27, 20, true));
        repo.push_primitive("bottle", bottle, None, &scales);
        repo.push_primitive("cup", TriMesh::frustum(0.032, 0.045, 0.0, 0.09, 20, false), None, &scales);
        repo.push_primitive("jar", TriMesh::cylinder(0.05, 0.0, 0.13, 20), None, &scales);
        repo.push_primitive("plate", TriMesh::cylinder(0.11, 0.0, 0.02, 28), None, &scales);
        repo.push_primitive("apple", TriMesh::sphere(v(0.0, 0.0, 0.04), 0.04, 16, 10), None, &scales);
        repo.push_primitive("box", TriMesh::cuboid(v(-0.08, -0.06, 0.0), v(0.08, 0.06, 0.09)), None, &scales);
        repo.push_primitive("book", TriMesh::cuboid(v(-0.11, -0.075, 0.0), v(0.11, 0.075, 0.03)), None, &scales);
        repo.push_primitive("laptop", TriMesh::cuboid(v(-0.16, -0.11, 0.0), v(0.16, 0.11, 0.025)), None, &scales);
        repo.push_primitive(
            "bowl",
            TriMesh::frustum(0.055, 0.09, 0.0, 0.07, 24, false),
            Some(Interior {
                polygon: polygon::rect(-0.035, -0.035, 0.035, 0.035)
                    .iter()
                    .map(|p| [p.x, p.y])
                    .collect(),
                height: 0.025,
            }),
            &scales,
        );
        repo.push_primitive(
            "basket",
            TriMesh::cuboid_open_top(v(-0.16, -0.12, 0.0), v(0.16, 0.12, 0.15)),
            Some(Interior {
                polygon: polygon::rect(-0.15, -0.11, 0.15, 0.11)
                    .iter()
                    .map(|p| [p.x, p.y])
                    .collect(),
                height: 0.025,
            }),
            &scales,
        );
        repo
    }

    /// Reads `manifest.json` and the OBJ meshes it names from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let src = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&src)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported asset manifest version {}",
                manifest.version
            )));
        }
        let mut assets = Vec::with_capacity(manifest.assets.len());
        for e in manifest.assets {
            if !(e.scale > 0.0) {
                return Err(Error::Invalid(format!("asset {}: scale must be positive", e.key)));
            }
            let mesh = TriMesh::load_obj(&dir.join(&e.mesh))?.scaled(e.scale);
            if mesh.is_empty() {
                return Err(Error::DegenerateGeometry(format!("asset {} has no triangles", e.key)));
            }
            let interior = e.interior.map(|i| Interior {
                polygon: i.polygon.iter().map(|p| [p[0] * e.scale, p[1] * e.scale]).collect(),
                height: i.height * e.scale,
            });
            let stable = match e.stable_poses {
                Some(p) if !p.is_empty() => {
                    for s in &p {
                        s.rotation()?;
                    }
                    p
                }
                _ => stable_poses(&mesh, e.is_container),
            };
            assets.push(Asset {
                key: e.key,
                category: e.category,
                mesh: Arc::new(mesh),
                is_container: e.is_container,
                interior,
                stable_poses: stable,
            });
        }
        Ok(AssetRepository { assets })
    }

    /// Writes the repository as OBJ files plus a manifest.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::new();
        for a in &self.assets {
            let file = format!("{}.obj", a.key.replace('/', "_"));
            let path = dir.join(&file);
            std::fs::write(&path, a.mesh.to_obj_string()).map_err(|e| Error::io(&path, e))?;
            entries.push(ManifestEntry {
                key: a.key.clone(),
                category: a.category.clone(),
                mesh: file,
                scale: 1.0,
                is_container: a.is_container,
                interior: a.interior.clone(),
                stable_poses: Some(a.stable_poses.clone()),
            });
        }
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            assets: entries,
        };
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }
}
