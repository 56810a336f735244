//! Ground-truth points for object and free-space reference, visual prompts
//! and templated instructions.

mod points;
mod prompt;
mod templates;

use std::fmt;

use image::RgbImage;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use points::{
    answerable_pixels, format_points, round2, sample_points_in_mask, NormPoint, PointSet, SampledPoints, MAX_POINTS,
};
pub use prompt::{
    draw_prompt, perimeter_mask, prompts_for_masks, PromptColor, VisualPrompt, DEFAULT_STROKE, MAX_PROMPTS,
};
pub use templates::{
    instantiate_template, required_keys, template_key, KindTemplates, TemplateTable, MIN_PARAPHRASES, ON_SURFACE_KEY,
    TEMPLATE_FORMAT_VERSION,
};

use crate::error::{Error, Result};
use crate::imageio::rgb_image;
use crate::raster::{deproject, instance_mask, rasterize, Camera, FrameBuffers, Mask};
use crate::relations::RelationTuple;
use crate::scene::{footprint, polygon, EntityId, Scene, P2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    ObjectRef,
    SpaceRef,
    Vqa,
    Detection,
}

impl SampleKind {
    pub const ALL: [SampleKind; 4] = [
        SampleKind::ObjectRef,
        SampleKind::SpaceRef,
        SampleKind::Vqa,
        SampleKind::Detection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::ObjectRef => "object_ref",
            SampleKind::SpaceRef => "space_ref",
            SampleKind::Vqa => "vqa",
            SampleKind::Detection => "detection",
        }
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AffordanceConfig {
    /// inclusive range for the number of answer points
    pub points_per_sample: [usize; 2],
    /// relation tuples turned into samples per view
    pub max_tuples_per_view: usize,
    pub prompt_stroke: u32,
}

impl Default for AffordanceConfig {
    fn default() -> Self {
        AffordanceConfig {
            points_per_sample: [4, 10],
            max_tuples_per_view: 8,
            prompt_stroke: DEFAULT_STROKE,
        }
    }
}

impl AffordanceConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.points_per_sample;
        if lo == 0 || lo > hi || hi > MAX_POINTS {
            return Err(Error::Invalid(format!("points_per_sample {lo}..={hi} outside 1..={MAX_POINTS}")));
        }
        if self.prompt_stroke == 0 {
            return Err(Error::Invalid("prompt_stroke must be positive".into()));
        }
        Ok(())
    }
}

/// Free-space mask from a render of the scene without `target`: pixels of
/// the target's support surface whose deprojected point falls inside the
/// target's footprint.
pub fn free_space_mask_in(removed: &FrameBuffers, scene: &Scene, target: EntityId, cam: &Camera) -> Result<Mask> {
    let obj = scene
        .object(target)
        .ok_or_else(|| Error::Invalid(format!("no object {target}")))?;
    let surface = scene.surface(obj.support).ok_or(Error::NotOverSurface)?;
    let fp = footprint(obj, surface)?;
    let (lo, hi) = polygon::bounds(&fp);
    let mut mask = Mask::new(removed.width, removed.height);
    for y in 0..removed.height {
        for x in 0..removed.width {
            if removed.id_at(x, y) != surface.id {
                continue;
            }
            let p = deproject(x as f64, y as f64, removed.depth_at(x, y), cam)?;
            let q = P2::new(p.x, p.y);
            if q.x >= lo.x && q.x <= hi.x && q.y >= lo.y && q.y <= hi.y && polygon::contains(&fp, &q) {
                mask.set(x, y, true);
            }
        }
    }
    if mask.is_empty() {
        return Err(Error::FreeRegionInvisible);
    }
    Ok(mask)
}

/// Re-renders without `target` and returns the free-space mask.
pub fn free_space_mask(scene: &Scene, target: EntityId, cam: &Camera) -> Result<Mask> {
    let removed = rasterize(&scene.without_object(target), cam);
    free_space_mask_in(&removed, scene, target, cam)
}

pub fn relation_target_mask(
    scene: &Scene,
    tuple: &RelationTuple,
    kind: SampleKind,
    cam: &Camera,
    fb: &FrameBuffers,
) -> Result<Mask> {
    match kind {
        SampleKind::ObjectRef => Ok(instance_mask(fb, tuple.subject)),
        SampleKind::SpaceRef => free_space_mask(scene, tuple.subject, cam),
        other => Err(Error::Invalid(format!("{other} samples have no target mask"))),
    }
}

/// A finished object or free-space reference sample.
#[derive(Debug, Clone)]
pub struct AffordanceSample {
    pub kind: SampleKind,
    pub tuple: RelationTuple,
    pub query: String,
    pub points: PointSet,
    /// the sampled pixels before normalization and rounding
    pub pixels: Vec<(u32, u32)>,
    pub mask: Mask,
    pub prompts: Vec<VisualPrompt>,
    /// rendered view with prompts drawn
    pub image: RgbImage,
}

impl AffordanceSample {
    pub fn answer(&self) -> String {
        self.points.to_string()
    }
}

/// Whether the subject can be removed for a free-space sample: it must rest
/// on a recorded surface and hold nothing.
pub fn space_ref_eligible(scene: &Scene, subject: EntityId) -> bool {
    let Some(obj) = scene.object(subject) else {
        return false;
    };
    scene.surface(obj.support).is_some()
        && !scene
            .surfaces
            .iter()
            .filter(|s| s.parent_body == subject)
            .any(|s| scene.objects.iter().any(|o| o.support == s.id))
}

/// One rendered view to draw samples from. `base` is the full render of
/// `scene` from `cam`.
#[derive(Debug, Clone, Copy)]
pub struct ViewContext<'a> {
    pub scene: &'a Scene,
    pub cam: &'a Camera,
    pub base: &'a FrameBuffers,
    pub table: &'a TemplateTable,
    pub cfg: &'a AffordanceConfig,
}

pub fn make_sample<R: Rng + ?Sized>(
    ctx: &ViewContext<'_>,
    tuple: &RelationTuple,
    kind: SampleKind,
    rng: &mut R,
) -> Result<AffordanceSample> {
    let ViewContext {
        scene,
        cam,
        base,
        table,
        cfg,
    } = *ctx;
    let removed;
    let (view, mask) = match kind {
        SampleKind::ObjectRef => (base, instance_mask(base, tuple.subject)),
        SampleKind::SpaceRef => {
            if !space_ref_eligible(scene, tuple.subject) {
                return Err(Error::UnreferencableTarget(format!(
                    "object {} cannot be removed",
                    tuple.subject
                )));
            }
            removed = rasterize(&scene.without_object(tuple.subject), cam);
            let m = free_space_mask_in(&removed, scene, tuple.subject, cam)?;
            (&removed, m)
        }
        other => return Err(Error::Invalid(format!("{other} samples are not generated from scenes"))),
    };
    let ref_masks: Vec<Mask> = tuple.refs.iter().map(|&r| instance_mask(view, r)).collect();
    if ref_masks.iter().any(Mask::is_empty) {
        return Err(Error::UnreferencableTarget("reference hidden".into()));
    }
    let prompts = prompts_for_masks(&ref_masks.iter().collect::<Vec<_>>(), cfg.prompt_stroke)?;
    let perim = perimeter_mask(&prompts, view.width, view.height);
    let candidates = answerable_pixels(&mask, Some(&perim));
    if candidates.is_empty() {
        return Err(Error::UnreferencableTarget("no answerable pixel".into()));
    }
    let n = rng.random_range(cfg.points_per_sample[0]..=cfg.points_per_sample[1]);
    let sampled = sample_points_in_mask(&candidates, n, rng)?;
    let query = instantiate_template(table, tuple, scene, kind, rng)?;
    let image = draw_prompt(&rgb_image(view)?, &prompts)?;
    Ok(AffordanceSample {
        kind,
        tuple: tuple.clone(),
        query,
        points: sampled.points,
        pixels: sampled.pixels,
        mask,
        prompts,
        image,
    })
}
