//! Procedural scenes: fixture layout, object placement on support surfaces,
//! and camera sampling with the visibility/relation validity filter.

mod assets;
mod cameras;
mod fixtures;
mod layout;
mod placement;

use serde::{Deserialize, Serialize};

pub use assets::{stable_poses, Asset, AssetRepository, Interior, StablePose};
pub use cameras::{check_view, sample_cameras, CameraView, ViewCheck};
pub use fixtures::{FixtureKind, FixtureSpec};
pub use layout::{generate_layout, kind_of, FLOOR_ARCHETYPE};
pub use placement::place_objects;

use crate::error::{Error, Result};

pub const LAYOUT_ATTEMPTS: usize = 1000;
pub const PLACEMENT_ATTEMPTS: usize = 100;
pub const CAMERA_ATTEMPTS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_scenes: usize,
    pub objects_per_scene: [usize; 2],
    pub fixtures_per_scene: [usize; 2],
    pub cameras_per_scene: usize,
    pub fixture_palette: Vec<FixtureSpec>,
    pub min_visible_objects: usize,
    pub min_mask_pixels: usize,
    pub image_size: [u32; 2],
    pub vertical_fov_deg: f64,
    /// eye distance from the look-at target, meters
    pub camera_distance: [f64; 2],
    pub camera_elevation_deg: [f64; 2],
    /// radius of the look-at jitter around a surface centroid, meters
    pub target_jitter: f64,
    /// half-width of the square room, meters
    pub room_half_extent: f64,
    /// probability that a placement targets a container interior
    pub container_fill_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n_scenes: 10,
            objects_per_scene: [10, 18],
            fixtures_per_scene: [2, 6],
            cameras_per_scene: 4,
            fixture_palette: FixtureSpec::default_palette(),
            min_visible_objects: 3,
            min_mask_pixels: 100,
            image_size: [640, 480],
            vertical_fov_deg: 60.0,
            camera_distance: [0.5, 3.0],
            camera_elevation_deg: [10.0, 75.0],
            target_jitter: 0.15,
            room_half_extent: 2.5,
            container_fill_probability: 0.15,
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Debug>(name: &str, r: &[T; 2]) -> Result<()> {
    if r[0] > r[1] {
        return Err(Error::Invalid(format!("{name}: min {:?} exceeds max {:?}", r[0], r[1])));
    }
    Ok(())
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("objects_per_scene", &self.objects_per_scene)?;
        check_range("fixtures_per_scene", &self.fixtures_per_scene)?;
        check_range("camera_distance", &self.camera_distance)?;
        check_range("camera_elevation_deg", &self.camera_elevation_deg)?;
        if self.objects_per_scene[1] == 0
            || self.fixtures_per_scene[1] == 0
            || self.cameras_per_scene == 0
            || self.min_visible_objects == 0
            || self.min_mask_pixels == 0
        {
            return Err(Error::Invalid("counts must be positive".into()));
        }
        if self.fixture_palette.is_empty() {
            return Err(Error::Invalid("fixture palette is empty".into()));
        }
        for spec in &self.fixture_palette {
            spec.validate()?;
        }
        if self.image_size.iter().any(|&d| d == 0 || d > 8192) {
            return Err(Error::Invalid("image size out of range".into()));
        }
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err(Error::Invalid("vertical_fov_deg must be in (0, 180)".into()));
        }
        if self.camera_distance[0] <= 0.0 {
            return Err(Error::Invalid("camera distance must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.container_fill_probability) {
            return Err(Error::Invalid("container_fill_probability must be in [0, 1]".into()));
        }
        Ok(())
    }
}
