//! Furniture archetypes. Each builds its geometry in a local frame whose
//! origin is the floor-level center of the footprint, front facing -Y.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{polygon, JointKind, Obb, Pose, TriMesh, P2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Table,
    Counter,
    Shelf,
    Fridge,
    DrawerUnit,
}

impl FixtureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::Table => "table",
            FixtureKind::Counter => "counter",
            FixtureKind::Shelf => "shelf",
            FixtureKind::Fridge => "fridge",
            FixtureKind::DrawerUnit => "drawer_unit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub width: [f64; 2],
    pub depth: [f64; 2],
    pub height: [f64; 2],
    pub max_per_scene: usize,
}

impl FixtureSpec {
    pub fn new(kind: FixtureKind, width: [f64; 2], depth: [f64; 2], height: [f64; 2], max: usize) -> Self {
        FixtureSpec {
            kind,
            width,
            depth,
            height,
            max_per_scene: max,
        }
    }

    pub fn default_palette() -> Vec<FixtureSpec> {
        use FixtureKind::*;
        vec![
            FixtureSpec::new(Table, [0.9, 1.5], [0.7, 1.0], [0.70, 0.78], 1),
            FixtureSpec::new(Counter, [1.2, 2.2], [0.55, 0.7], [0.86, 0.94], 2),
            FixtureSpec::new(Shelf, [0.8, 1.3], [0.32, 0.45], [1.1, 1.5], 2),
            FixtureSpec::new(Fridge, [0.6, 0.8], [0.6, 0.75], [1.6, 1.9], 1),
            FixtureSpec::new(DrawerUnit, [0.5, 0.9], [0.45, 0.6], [0.6, 0.85], 2),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("width", self.width), ("depth", self.depth), ("height", self.height)] {
            if !(r[0] > 0.0 && r[0] <= r[1]) {
                return Err(Error::Invalid(format!(
                    "{} {name} range {r:?} must be positive and ordered",
                    self.kind.as_str()
                )));
            }
        }
        if self.max_per_scene == 0 {
            return Err(Error::Invalid("max_per_scene must be positive".into()));
        }
        Ok(())
    }
}

/// Local-frame geometry of one fixture instance.
#[derive(Debug, Clone)]
pub struct FixtureGeometry {
    pub mesh: TriMesh,
    /// collision boxes, local frame
    pub parts: Vec<(Vector3<f64>, Vector3<f64>)>,
    /// support polygons and heights, local frame
    pub surfaces: Vec<(Vec<P2>, f64)>,
    pub joint: Option<JointSpec>,
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct JointSpec {
    pub kind: JointKind,
    /// local frame
    pub axis: Vector3<f64>,
    pub limits: [f64; 2],
    pub state: f64,
}

impl FixtureGeometry {
    fn push_box(&mut self, lo: Vector3<f64>, hi: Vector3<f64>, open_top: bool) {
        let m = if open_top {
            TriMesh::cuboid_open_top(lo, hi)
        } else {
            TriMesh::cuboid(lo, hi)
        };
        self.mesh.append(&m);
        self.parts.push((lo, hi));
    }

    pub fn world_parts(&self, pose: &Pose) -> Vec<Obb> {
        self.parts
            .iter()
            .map(|(lo, hi)| {
                let half = ((hi - lo) * 0.5).map(|h| h.max(crate::scene::MIN_HALF_EXTENT));
                Obb {
                    center: pose.transform_point(&((lo + hi) * 0.5)),
                    half_extents: half,
                    orientation: pose.orientation,
                }
            })
            .collect()
    }
}

fn range<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

/// Samples dimensions (and a joint state, for articulated kinds) and builds
/// the geometry.
pub fn build<R: Rng + ?Sized>(spec: &FixtureSpec, rng: &mut R) -> FixtureGeometry {
    let w = range(rng, spec.width);
    let d = range(rng, spec.depth);
    let h = range(rng, spec.height);
    let v = Vector3::new;
    let (hw, hd) = (w / 2.0, d / 2.0);
    let mut g = FixtureGeometry {
        mesh: TriMesh::default(),
        parts: Vec::new(),
        surfaces: Vec::new(),
        joint: None,
        width: w,
        depth: d,
    };
    let top = polygon::rect(-hw, -hd, hw, hd);
    match spec.kind {
        FixtureKind::Table => {
            let slab = 0.04;
            g.push_box(v(-hw, -hd, h - slab), v(hw, hd, h), true);
            let leg = 0.05;
            for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let cx = sx * (hw - leg);
                let cy = sy * (hd - leg);
                g.push_box(v(cx - leg / 2.0, cy - leg / 2.0, 0.0), v(cx + leg / 2.0, cy + leg / 2.0, h - slab), false);
            }
            g.surfaces.push((top, h));
        }
        FixtureKind::Counter => {
            g.push_box(v(-hw, -hd, 0.0), v(hw, hd, h), true);
            g.surfaces.push((top, h));
        }
        FixtureKind::Shelf => {
            let t = 0.02;
            let levels = 3;
            g.push_box(v(-hw, -hd, 0.0), v(-hw + t, hd, h), false);
            g.push_box(v(hw - t, -hd, 0.0), v(hw, hd, h), false);
            g.push_box(v(-hw + t, hd - t, 0.0), v(hw - t, hd, h), false);
            for k in 0..levels {
                let z = 0.08 + (h - 0.08) * k as f64 / (levels - 1) as f64;
                g.push_box(v(-hw + t, -hd, z - t), v(hw - t, hd - t, z), true);
                g.surfaces.push((polygon::rect(-hw + t, -hd, hw - t, hd - t), z));
            }
        }
        FixtureKind::Fridge => {
            let door_t = 0.04;
            g.push_box(v(-hw, -hd, 0.0), v(hw, hd, h), true);
            g.surfaces.push((top, h));
            let limits = [0.0, 1.9];
            let state = range(rng, limits);
            // door hinged on the front-left vertical edge, swinging outward
            let hinge = v(-hw, -hd, 0.0);
            let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -state);
            let iso = Isometry3::from_parts(Translation3::from(hinge), rot)
                * Isometry3::translation(-hinge.x, -hinge.y, 0.0);
            let (lo, hi) = (v(-hw, -hd - door_t, 0.02), v(hw, -hd, h - 0.02));
            let door = TriMesh::cuboid(lo, hi).transformed(&iso);
            g.mesh.append(&door);
            // collision box of the swung door, as its local bounds
            let (dlo, dhi) = door.bounds().expect("door mesh has vertices");
            g.parts.push((dlo, dhi));
            g.joint = Some(JointSpec {
                kind: JointKind::Revolute,
                axis: Vector3::z(),
                limits,
                state,
            });
        }
        FixtureKind::DrawerUnit => {
            g.push_box(v(-hw, -hd, 0.0), v(hw, hd, h), true);
            g.surfaces.push((top, h));
            let limits = [0.0, 0.7 * d];
            let state = range(rng, limits);
            let (z0, z1) = (h - 0.22, h - 0.04);
            let front = -hd - state;
            // pulled-out drawer: front panel plus the exposed tray
            g.push_box(v(-hw + 0.03, front - 0.02, z0), v(hw - 0.03, front, z1), false);
            if state > 0.01 {
                g.push_box(v(-hw + 0.05, front, z0 + 0.02), v(hw - 0.05, -hd, z0 + 0.12), false);
            }
            g.joint = Some(JointSpec {
                kind: JointKind::Prismatic,
                axis: -Vector3::y(),
                limits,
                state,
            });
        }
    }
    g
}
