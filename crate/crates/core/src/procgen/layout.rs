use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;

use super::fixtures::{self, FixtureKind};
use super::{GenConfig, LAYOUT_ATTEMPTS};
use crate::error::{Error, Result};
use crate::scene::{
    obb_overlap, EntityId, Fixture, Joint, Pose, Scene, SupportSurface, TriMesh, P2,
};

pub const FLOOR_ARCHETYPE: &str = "floor";

fn floor(id: EntityId, half: f64) -> Result<Fixture> {
    let v = vec![
        Vector3::new(-half, -half, 0.0),
        Vector3::new(half, -half, 0.0),
        Vector3::new(half, half, 0.0),
        Vector3::new(-half, half, 0.0),
    ];
    let mesh = TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]])?;
    Fixture::new(id, FLOOR_ARCHETYPE, mesh, Pose::identity(), Vec::new())
}

/// Furniture against the room walls: back to a wall, front toward the room
/// center, no two fixtures overlapping. Articulated fixtures get a random
/// joint state within limits.
pub fn generate_layout<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R, seed: u64) -> Result<Scene> {
    if cfg.fixture_palette.is_empty() {
        return Err(Error::Invalid("fixture palette is empty".into()));
    }
    let room = cfg.room_half_extent;
    let mut scene = Scene::new(seed);
    let mut next_id: EntityId = 1;
    scene.fixtures.push(floor(next_id, room + 1.5)?);
    next_id += 1;

    let target = rng.random_range(cfg.fixtures_per_scene[0]..=cfg.fixtures_per_scene[1]);
    let mut used = vec![0usize; cfg.fixture_palette.len()];
    for _ in 0..target {
        let open: Vec<usize> = (0..cfg.fixture_palette.len())
            .filter(|&i| used[i] < cfg.fixture_palette[i].max_per_scene)
            .collect();
        if open.is_empty() {
            break;
        }
        let pick = open[rng.random_range(0..open.len())];
        let spec = &cfg.fixture_palette[pick];
        for _ in 0..LAYOUT_ATTEMPTS {
            let geom = fixtures::build(spec, rng);
            if geom.width > 2.0 * room || geom.depth > room {
                continue;
            }
            let wall = rng.random_range(0..4u8);
            let along = if geom.width >= 2.0 * room {
                0.0
            } else {
                let lim = room - geom.width / 2.0;
                rng.random_range(-lim..=lim)
            };
            let inset = room - geom.depth / 2.0;
            // local +Y (the back) points at the wall
            let (center, yaw) = match wall {
                0 => (Vector3::new(along, inset, 0.0), 0.0),
                1 => (Vector3::new(-inset, along, 0.0), std::f64::consts::FRAC_PI_2),
                2 => (Vector3::new(along, -inset, 0.0), std::f64::consts::PI),
                _ => (Vector3::new(inset, along, 0.0), -std::f64::consts::FRAC_PI_2),
            };
            let pose = Pose::from_parts(center, UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));
            let parts = geom.world_parts(&pose);
            let fixture = Fixture::new(next_id, spec.kind.as_str(), geom.mesh.clone(), pose, parts)?;
            let collides = scene
                .fixtures
                .iter()
                .filter(|f| f.archetype != FLOOR_ARCHETYPE)
                .any(|f| obb_overlap(&f.obb, &fixture.obb));
            if collides {
                continue;
            }
            let fixture_id = next_id;
            next_id += 1;
            for (poly, height) in &geom.surfaces {
                let world: Vec<P2> = poly
                    .iter()
                    .map(|p| {
                        let w = pose.transform_point(&Vector3::new(p.x, p.y, 0.0));
                        P2::new(w.x, w.y)
                    })
                    .collect();
                scene
                    .surfaces
                    .push(SupportSurface::new(next_id, world, *height, fixture_id)?);
                next_id += 1;
            }
            if let Some(j) = geom.joint {
                let axis = pose.orientation * j.axis;
                scene
                    .joints
                    .push(Joint::new(fixture_id, j.kind, axis, j.limits, j.state)?);
            }
            scene.fixtures.push(fixture);
            used[pick] += 1;
            break;
        }
    }
    if scene.surfaces.is_empty() {
        return Err(Error::LayoutFailed);
    }
    Ok(scene)
}

/// The fixture kind named by the archetype, if any.
pub fn kind_of(f: &Fixture) -> Option<FixtureKind> {
    use FixtureKind::*;
    [Table, Counter, Shelf, Fridge, DrawerUnit]
        .into_iter()
        .find(|k| k.as_str() == f.archetype)
}
