//! End-to-end generation: layout, placement, cameras, relations and
//! samples per scene, and the on-disk dataset layout.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::affordance::{make_sample, space_ref_eligible, AffordanceConfig, AffordanceSample, SampleKind, TemplateTable, ViewContext};
use crate::config::{generation_hash, PipelineConfig};
use crate::datamix::InstructionSample;
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::evalkit::{InstructionRecord, INSTRUCTIONS_FILE};
use crate::imageio::{encode_depth_mm, encode_instances, encode_mask, encode_rgb, rgb_image, write_file};
use crate::procgen::{generate_layout, place_objects, sample_cameras, AssetRepository, CameraView, GenConfig};
use crate::raster::rasterize;
use crate::relations::RelationParams;
use crate::scene::{Scene, SceneDocument};
use crate::stream;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const GEN_FORMAT_VERSION: u32 = 1;

/// Everything needed to generate scenes, resolved and validated.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub gen: GenConfig,
    pub relations: RelationParams,
    pub affordance: AffordanceConfig,
    pub assets: AssetRepository,
    pub templates: TemplateTable,
}

#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub id: String,
    pub camera: u32,
    pub sample: AffordanceSample,
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub index: usize,
    pub scene: Scene,
    pub views: Vec<CameraView>,
    pub samples: Vec<GeneratedSample>,
    /// dropped samples by reason
    pub drops: BTreeMap<String, usize>,
}

impl GeneratedScene {
    /// Sum of relation tuples over the accepted views.
    pub fn relation_pairs(&self) -> usize {
        self.views.iter().map(|v| v.check.tuples.len()).sum()
    }
}

pub fn scene_id(index: usize) -> String {
    format!("{index:05}")
}

impl Pipeline {
    pub fn new(
        gen: GenConfig,
        relations: RelationParams,
        affordance: AffordanceConfig,
        assets: AssetRepository,
        templates: TemplateTable,
    ) -> Result<Self> {
        gen.validate()?;
        affordance.validate()?;
        templates.validate()?;
        if assets.is_empty() {
            return Err(Error::EmptyRepository);
        }
        Ok(Pipeline {
            gen,
            relations,
            affordance,
            assets,
            templates,
        })
    }

    /// Builtin assets and templates.
    pub fn with_defaults(gen: GenConfig) -> Result<Self> {
        Self::new(
            gen,
            RelationParams::default(),
            AffordanceConfig::default(),
            AssetRepository::builtin(),
            TemplateTable::default(),
        )
    }

    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(
            cfg.gen.clone(),
            cfg.relations,
            cfg.affordance.clone(),
            cfg.load_assets()?,
            cfg.load_templates()?,
        )
    }

    pub fn config_hash(&self) -> String {
        generation_hash(&self.gen, &self.relations, &self.affordance, &self.templates, &self.assets)
    }

    /// The scene and accepted views for one index, without samples.
    pub fn generate_views(&self, index: usize) -> Result<(Scene, Vec<CameraView>)> {
        let root = self.gen.seed;
        let scene_seed = stream!(root, "scene", index, "seed").next_u64();
        let layout = generate_layout(&self.gen, &mut stream!(root, "scene", index, "layout"), scene_seed)?;
        let scene = place_objects(&layout, &self.assets, &self.gen, &mut stream!(root, "scene", index, "placement"))?;
        scene.validate()?;
        let views = sample_cameras(
            &scene,
            rasterize,
            &self.gen,
            &self.relations,
            &mut stream!(root, "scene", index, "cameras"),
        );
        Ok((scene, views))
    }

    /// One scene with its samples; a scene-level failure is an error.
    pub fn generate_scene(&self, index: usize) -> Result<GeneratedScene> {
        let root = self.gen.seed;
        let (scene, views) = self.generate_views(index)?;
        let mut samples = Vec::new();
        let mut drops = BTreeMap::new();
        if views.len() < self.gen.cameras_per_scene {
            *drops.entry("camera_shortfall".to_string()).or_default() += self.gen.cameras_per_scene - views.len();
        }
        for view in &views {
            let ctx = ViewContext {
                scene: &scene,
                cam: &view.camera,
                base: &view.buffers,
                table: &self.templates,
                cfg: &self.affordance,
            };
            let mut tuples = view.check.tuples.clone();
            tuples.shuffle(&mut stream!(root, "scene", index, "view", view.id, "select"));
            tuples.truncate(self.affordance.max_tuples_per_view);
            let jobs: Vec<(usize, SampleKind)> = tuples
                .iter()
                .enumerate()
                .flat_map(|(k, t)| {
                    let space = space_ref_eligible(&scene, t.subject);
                    [(k, SampleKind::ObjectRef)]
                        .into_iter()
                        .chain(space.then_some((k, SampleKind::SpaceRef)))
                })
                .collect();
            let made: Vec<_> = jobs
                .par_iter()
                .map(|&(k, kind)| {
                    let mut rng = stream!(root, "scene", index, "view", view.id, "tuple", k, kind.as_str());
                    (k, kind, make_sample(&ctx, &tuples[k], kind, &mut rng))
                })
                .collect();
            for (k, kind, res) in made {
                match res {
                    Ok(sample) => samples.push(GeneratedSample {
                        id: format!("{}_{}_{k:02}_{kind}", scene_id(index), view.id),
                        camera: view.id,
                        sample,
                    }),
                    Err(e) => {
                        log::debug!("scene {index} view {} tuple {k} {kind}: {e}", view.id);
                        *drops.entry(format!("{kind}:{}", e.kind_name())).or_default() += 1;
                    }
                }
            }
        }
        Ok(GeneratedScene {
            index,
            scene,
            views,
            samples,
            drops,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenManifest {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub scenes_requested: usize,
    pub scenes_generated: usize,
    pub views: usize,
    /// (image, relation) pairs: relation tuples summed over views
    pub relation_pairs: usize,
    pub samples: BTreeMap<SampleKind, usize>,
    pub drops: BTreeMap<String, usize>,
    /// sha256 of each jsonl file
    pub files: BTreeMap<String, String>,
    /// sha256 over every written file's path and digest, in path order
    pub outputs_digest: String,
}

struct Writer<'a> {
    out: &'a Path,
    digests: BTreeMap<String, String>,
}

impl Writer<'_> {
    fn put(&mut self, rel: String, bytes: &[u8]) -> Result<()> {
        write_file(&self.out.join(&rel), bytes)?;
        self.digests.insert(rel, sha256_hex(bytes));
        Ok(())
    }
}

fn jsonl_line<T: Serialize>(buf: &mut String, v: &T) -> Result<()> {
    buf.push_str(&serde_json::to_string(v)?);
    buf.push('\n');
    Ok(())
}

/// Generates `gen.n_scenes` scenes with `workers` threads and writes the
/// dataset under `out`. Output bytes do not depend on `workers`.
pub fn run_gen(pipeline: &Pipeline, out: &Path, workers: usize) -> Result<GenManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let n = pipeline.gen.n_scenes;
    let batch = pool.current_num_threads().max(1) * 2;
    let mut w = Writer {
        out,
        digests: BTreeMap::new(),
    };
    let (mut annotations, mut samples_jsonl, mut instructions) = (String::new(), String::new(), String::new());
    let mut manifest = GenManifest {
        version: GEN_FORMAT_VERSION,
        config_hash: pipeline.config_hash(),
        seed: pipeline.gen.seed,
        scenes_requested: n,
        scenes_generated: 0,
        views: 0,
        relation_pairs: 0,
        samples: SampleKind::ALL[..2].iter().map(|&k| (k, 0)).collect(),
        drops: BTreeMap::new(),
        files: BTreeMap::new(),
        outputs_digest: String::new(),
    };
    for start in (0..n).step_by(batch) {
        let results: Vec<(usize, Result<GeneratedScene>)> = pool.install(|| {
            (start..(start + batch).min(n))
                .into_par_iter()
                .map(|i| (i, pipeline.generate_scene(i)))
                .collect()
        });
        for (index, res) in results {
            let g = match res {
                Ok(g) => g,
                Err(e) => {
                    log::warn!("scene {index} dropped: {e}");
                    *manifest.drops.entry(format!("scene:{}", e.kind_name())).or_default() += 1;
                    continue;
                }
            };
            write_scene(&mut w, &g, &mut annotations, &mut samples_jsonl, &mut instructions)?;
            manifest.scenes_generated += 1;
            manifest.views += g.views.len();
            manifest.relation_pairs += g.relation_pairs();
            for s in &g.samples {
                *manifest.samples.entry(s.sample.kind).or_default() += 1;
            }
            for (k, v) in &g.drops {
                *manifest.drops.entry(k.clone()).or_default() += v;
            }
            log::info!(
                "scene {index}: {} views, {} pairs, {} samples",
                g.views.len(),
                g.relation_pairs(),
                g.samples.len()
            );
        }
    }
    for (name, body) in [
        (ANNOTATIONS_FILE, &annotations),
        (SAMPLES_FILE, &samples_jsonl),
        (INSTRUCTIONS_FILE, &instructions),
    ] {
        w.put(name.to_string(), body.as_bytes())?;
        manifest.files.insert(name.to_string(), w.digests[name].clone());
    }
    let listing: String = w.digests.iter().map(|(p, d)| format!("{p} {d}\n")).collect();
    manifest.outputs_digest = sha256_hex(listing.as_bytes());
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&out.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write_scene(
    w: &mut Writer<'_>,
    g: &GeneratedScene,
    annotations: &mut String,
    samples: &mut String,
    instructions: &mut String,
) -> Result<()> {
    let sid = scene_id(g.index);
    w.put(format!("scenes/{sid}.json"), SceneDocument::from_scene(&g.scene).to_json().as_bytes())?;
    for v in &g.views {
        let view = format!("{sid}_{}", v.id);
        let render = format!("renders/{view}.png");
        let depth = format!("depth/{view}.png");
        let inst = format!("instances/{view}.png");
        w.put(render.clone(), &encode_rgb(&rgb_image(&v.buffers)?))?;
        w.put(depth.clone(), &encode_depth_mm(&v.buffers))?;
        w.put(inst.clone(), &encode_instances(&v.buffers)?)?;
        jsonl_line(
            annotations,
            &json!({
                "scene": g.index,
                "camera": v.id,
                "image": render,
                "depth": depth,
                "instances": inst,
                "intrinsics": v.camera,
                "visible_objects": v.check.visible_objects,
                "visible": v.check.visible,
                "tuples": v.check.tuples,
            }),
        )?;
    }
    for s in &g.samples {
        let image = format!("images/{}.png", s.id);
        let mask = format!("masks/{}.png", s.id);
        w.put(image.clone(), &encode_rgb(&s.sample.image))?;
        w.put(mask.clone(), &encode_mask(&s.sample.mask))?;
        let record = InstructionSample {
            id: s.id.clone(),
            image: image.clone(),
            query: s.sample.query.clone(),
            answer: s.sample.answer(),
            kind: s.sample.kind,
            annotations: Some(json!({
                "scene": g.index,
                "camera": s.camera,
                "tuple": s.sample.tuple,
                "mask": mask,
                "pixels": s.sample.pixels,
                "prompts": s.sample.prompts,
            })),
        };
        jsonl_line(samples, &record)?;
        jsonl_line(
            instructions,
            &InstructionRecord {
                id: s.id.clone(),
                image,
                mask,
                instruction: s.sample.query.clone(),
            },
        )?;
    }
    Ok(())
}
