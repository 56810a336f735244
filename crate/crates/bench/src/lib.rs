//! Fixture builders shared by the benchmarks.

use pointgen_core::pipeline::Pipeline;
use pointgen_core::procgen::{CameraView, GenConfig};
use pointgen_core::scene::Scene;

pub fn pipeline(seed: u64) -> Pipeline {
    Pipeline::with_defaults(GenConfig {
        seed,
        ..Default::default()
    })
    .expect("default pipeline")
}

/// The first scene index at or after `start` that yields a camera.
pub fn scene_with_view(p: &Pipeline, start: usize) -> (Scene, CameraView) {
    (start..start + 100)
        .find_map(|i| {
            let (scene, mut views) = p.generate_views(i).ok()?;
            (!views.is_empty()).then(|| (scene, views.swap_remove(0)))
        })
        .expect("no scene with a valid camera")
}
