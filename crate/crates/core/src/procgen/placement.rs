use std::sync::Arc;

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;

use super::assets::AssetRepository;
use super::{GenConfig, PLACEMENT_ATTEMPTS};
use crate::error::{Error, Result};
use crate::scene::{obb_overlap, polygon, EntityId, ObjectInstance, Pose, Scene, SupportSurface, P2};

fn pick_surface<'a, R: Rng + ?Sized>(
    scene: &'a Scene,
    cfg: &GenConfig,
    rng: &mut R,
) -> Option<&'a SupportSurface> {
    let is_interior = |s: &SupportSurface| scene.object(s.parent_body).is_some();
    let interiors: Vec<&SupportSurface> = scene.surfaces.iter().filter(|s| is_interior(s)).collect();
    if !interiors.is_empty() && rng.random::<f64>() < cfg.container_fill_probability {
        return Some(interiors[rng.random_range(0..interiors.len())]);
    }
    let fixed: Vec<&SupportSurface> = scene.surfaces.iter().filter(|s| !is_interior(s)).collect();
    let total: f64 = fixed.iter().map(|s| s.area()).sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    for s in &fixed {
        x -= s.area();
        if x <= 0.0 {
            return Some(s);
        }
    }
    fixed.last().copied()
}

fn fits_on(obj: &ObjectInstance, surface: &SupportSurface) -> bool {
    obj.obb.corners().iter().all(|c| {
        polygon::contains_with_tolerance(&surface.boundary, &P2::new(c.x, c.y), 1e-9)
    })
}

fn collides(scene: &Scene, obj: &ObjectInstance, parent: EntityId) -> bool {
    let fixture_hit = scene
        .fixtures
        .iter()
        .flat_map(|f| f.parts.iter())
        .any(|p| obb_overlap(p, &obj.obb));
    fixture_hit
        || scene
            .objects
            .iter()
            .filter(|o| o.id != parent)
            .any(|o| obb_overlap(&o.obb, &obj.obb))
}

/// Adds between `objects_per_scene[0]` and `[1]` objects. Each candidate is
/// a random asset in one of its stable poses, random yaw, at a uniform point
/// of a support surface, lowered so its box bottom touches the surface.
/// Candidates that overhang the surface or overlap an existing box are
/// resampled, up to [`PLACEMENT_ATTEMPTS`] per object; then the object is
/// skipped.
pub fn place_objects<R: Rng + ?Sized>(
    scene: &Scene,
    repo: &AssetRepository,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<Scene> {
    if repo.is_empty() {
        return Err(Error::EmptyRepository);
    }
    if scene.surfaces.is_empty() {
        return Err(Error::Invalid("scene has no support surface".into()));
    }
    let mut out = scene.clone();
    let k = rng.random_range(cfg.objects_per_scene[0]..=cfg.objects_per_scene[1]);
    for _ in 0..k {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let asset = repo.pick(rng).expect("repository is non-empty");
            let Some(surface) = pick_surface(&out, cfg, rng) else {
                break;
            };
            let Some(xy) = polygon::sample_uniform(&surface.boundary, rng) else {
                continue;
            };
            let stable = asset.stable_poses[rng.random_range(0..asset.stable_poses.len())];
            let yaw = UnitQuaternion::from_axis_angle(
                &Vector3::z_axis(),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let orientation = yaw * stable.rotation()?;
            let id = out.next_id();
            let mut obj = ObjectInstance::new(
                id,
                asset.category.clone(),
                asset.key.clone(),
                asset.mesh.clone(),
                Pose::from_parts(Vector3::new(xy.x, xy.y, surface.height), orientation),
                asset.is_container,
                surface.id,
            )?;
            let lift = surface.height - obj.obb.bottom_z();
            obj.pose.position.z += lift;
            obj.obb.center.z += lift;
            if !fits_on(&obj, surface) || collides(&out, &obj, surface.parent_body) {
                continue;
            }
            let interior = asset.interior.as_ref().and_then(|i| {
                let poly: Vec<P2> = i
                    .polygon
                    .iter()
                    .map(|p| {
                        let w = obj.pose.transform_point(&Vector3::new(p[0], p[1], 0.0));
                        P2::new(w.x, w.y)
                    })
                    .collect();
                // containers rest upright, so the interior floor stays level
                let h = obj.pose.transform_point(&Vector3::new(0.0, 0.0, i.height)).z;
                SupportSurface::new(id + 1, poly, h, id).ok()
            });
            out.objects.push(obj);
            if let Some(s) = interior {
                out.surfaces.push(s);
            }
            break;
        }
    }
    // meshes are shared, never copied
    debug_assert!(out
        .objects
        .iter()
        .all(|o| repo.get(&o.asset).is_none_or(|a| Arc::ptr_eq(&a.mesh, &o.mesh))));
    Ok(out)
}
