use std::collections::BTreeSet;

use nalgebra::Vector3;
use rand::Rng;

use super::{GenConfig, CAMERA_ATTEMPTS};
use crate::raster::{Camera, FrameBuffers};
use crate::relations::{compute_relations, RelationParams, RelationTuple};
use crate::scene::{EntityId, Scene};

/// Outcome of the visibility and relation filter for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewCheck {
    /// objects with at least `min_mask_pixels` pixels
    pub visible_objects: BTreeSet<EntityId>,
    /// objects and surfaces with at least `min_mask_pixels` pixels
    pub visible: BTreeSet<EntityId>,
    pub tuples: Vec<RelationTuple>,
}

impl ViewCheck {
    /// At least `min_visible` objects and at least one relation whose
    /// subject and references are all objects.
    pub fn is_valid(&self, min_visible: usize) -> bool {
        self.visible_objects.len() >= min_visible
            && self
                .tuples
                .iter()
                .any(|t| t.refs.iter().all(|r| self.visible_objects.contains(r)))
    }
}

pub fn check_view(
    scene: &Scene,
    cam: &Camera,
    camera_id: u32,
    fb: &FrameBuffers,
    cfg: &GenConfig,
    params: &RelationParams,
) -> ViewCheck {
    let counted: BTreeSet<EntityId> = fb
        .pixel_counts()
        .into_iter()
        .filter(|&(_, n)| n >= cfg.min_mask_pixels)
        .map(|(id, _)| id)
        .collect();
    let visible_objects: BTreeSet<EntityId> = scene
        .objects
        .iter()
        .map(|o| o.id)
        .filter(|id| counted.contains(id))
        .collect();
    let visible: BTreeSet<EntityId> = visible_objects
        .iter()
        .copied()
        .chain(scene.surfaces.iter().map(|s| s.id).filter(|id| counted.contains(id)))
        .collect();
    let tuples = if visible_objects.len() >= cfg.min_visible_objects {
        compute_relations(scene, cam, camera_id, &visible, params)
    } else {
        Vec::new()
    };
    ViewCheck {
        visible_objects,
        visible,
        tuples,
    }
}

/// An accepted view with its buffers and relations.
#[derive(Debug, Clone)]
pub struct CameraView {
    pub id: u32,
    pub camera: Camera,
    pub buffers: FrameBuffers,
    pub check: ViewCheck,
}

fn pick_target<R: Rng + ?Sized>(scene: &Scene, cfg: &GenConfig, rng: &mut R) -> Option<Vector3<f64>> {
    // weight surfaces by how many objects they hold
    let weights: Vec<usize> = scene
        .surfaces
        .iter()
        .map(|s| scene.objects.iter().filter(|o| o.support == s.id).count())
        .collect();
    let total: usize = weights.iter().sum();
    let idx = if total == 0 {
        if scene.surfaces.is_empty() {
            return None;
        }
        rng.random_range(0..scene.surfaces.len())
    } else {
        let mut x = rng.random_range(0..total);
        weights
            .iter()
            .position(|&w| {
                if x < w {
                    true
                } else {
                    x -= w;
                    false
                }
            })
            .unwrap_or(0)
    };
    let r = cfg.target_jitter * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    Some(scene.surfaces[idx].centroid() + Vector3::new(r * a.cos(), r * a.sin(), 0.0))
}

/// Samples up to `cameras_per_scene` views that pass [`ViewCheck::is_valid`].
/// Each view gets [`CAMERA_ATTEMPTS`] tries; a view that never passes is
/// left out, so fewer cameras may come back.
pub fn sample_cameras<R, F>(
    scene: &Scene,
    render: F,
    cfg: &GenConfig,
    params: &RelationParams,
    rng: &mut R,
) -> Vec<CameraView>
where
    R: Rng + ?Sized,
    F: Fn(&Scene, &Camera) -> FrameBuffers,
{
    let [w, h] = cfg.image_size;
    let mut views = Vec::new();
    for _ in 0..cfg.cameras_per_scene {
        let id = views.len() as u32;
        for _ in 0..CAMERA_ATTEMPTS {
            let Some(target) = pick_target(scene, cfg, rng) else {
                return views;
            };
            let dist = rng.random_range(cfg.camera_distance[0]..=cfg.camera_distance[1]);
            let elev = rng
                .random_range(cfg.camera_elevation_deg[0]..=cfg.camera_elevation_deg[1])
                .to_radians();
            let azim = rng.random_range(0.0..std::f64::consts::TAU);
            let eye = target
                + dist * Vector3::new(elev.cos() * azim.cos(), elev.cos() * azim.sin(), elev.sin());
            let Ok(pose) = Camera::look_at_pose(eye, target) else {
                continue;
            };
            let cam = Camera::from_vertical_fov(w, h, cfg.vertical_fov_deg, pose)
                .expect("validated config yields valid intrinsics");
            let fb = render(scene, &cam);
            let check = check_view(scene, &cam, id, &fb, cfg, params);
            if check.is_valid(cfg.min_visible_objects) {
                views.push(CameraView {
                    id,
                    camera: cam,
                    buffers: fb,
                    check,
                });
                break;
            }
        }
    }
    views
}
