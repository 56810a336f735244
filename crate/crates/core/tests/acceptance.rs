//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use pointgen_core::affordance::{format_points, free_space_mask, NormPoint, PointSet, SampleKind};
use pointgen_core::datamix::{assemble_mix, convert_detection, DetectionRecord, InstructionSample, MixSpec};
use pointgen_core::evalkit::{accuracy, baseline_bbox_points, evaluate, parse_points, BenchmarkRecord, NormRect, Prediction};
use pointgen_core::pipeline::{run_gen, Pipeline, ANNOTATIONS_FILE, MANIFEST_FILE, SAMPLES_FILE};
use pointgen_core::procgen::GenConfig;
use pointgen_core::raster::{deproject, instance_mask, project, rasterize, Camera, Mask};
use pointgen_core::relations::{compute_relations, RelationParams};
use pointgen_core::scene::EntityId;
use pointgen_core::{evalkit::INSTRUCTIONS_FILE, stream};
use rand::Rng;
use regex::Regex;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Answer texts and masks kept from the soundness run for later criteria.
struct Generated {
    answers: Vec<String>,
    masks: Vec<Mask>,
}

fn label_soundness(keep: &mut Option<Generated>) -> Outcome {
    const LIMIT: Duration = Duration::from_secs(600);
    let start = Instant::now();
    let p = Pipeline::with_defaults(GenConfig {
        seed: 1001,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let mut counts = BTreeMap::<SampleKind, usize>::new();
    let (mut points, mut bad) = (0usize, 0usize);
    let mut out = Generated {
        answers: vec![],
        masks: vec![],
    };
    let mut index = 0;
    while out.answers.len() < 1000 {
        let g = p.generate_scene(index).map_err(|e| format!("scene {index}: {e}"))?;
        index += 1;
        for s in &g.samples {
            let view = g.views.iter().find(|v| v.id == s.camera).unwrap();
            let subject = s.sample.tuple.subject;
            // recompute the target mask from the scene alone
            let mask = match s.sample.kind {
                SampleKind::ObjectRef => instance_mask(&rasterize(&g.scene, &view.camera), subject),
                _ => free_space_mask(&g.scene, subject, &view.camera).map_err(|e| format!("{}: {e}", s.id))?,
            };
            check(mask == s.sample.mask, || format!("{}: stored mask differs from recomputed", s.id))?;
            for &(x, y) in &s.sample.pixels {
                points += 1;
                if !mask.get(x, y) {
                    bad += 1;
                }
            }
            *counts.entry(s.sample.kind).or_default() += 1;
            out.answers.push(s.sample.answer());
            out.masks.push(s.sample.mask.clone());
        }
    }
    let elapsed = start.elapsed();
    *keep = Some(out);
    check(bad == 0, || format!("{bad} of {points} GT points outside their masks"))?;
    check(counts.len() == 2, || format!("kinds present: {counts:?}"))?;
    check(elapsed <= LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} samples ({counts:?}) from {index} scenes, {points} points, 0 outside mask, {:.1}s",
        counts.values().sum::<usize>(),
        elapsed.as_secs_f64()
    ))
}

fn visible_by_recount(scene: &pointgen_core::scene::Scene, cam: &Camera, min_px: usize) -> (BTreeSet<EntityId>, BTreeSet<EntityId>) {
    let fb = rasterize(scene, cam);
    let counts = common::recount_pixels(&fb);
    let big: BTreeSet<EntityId> = counts.into_iter().filter(|&(_, n)| n >= min_px).map(|(id, _)| id).collect();
    let objects: BTreeSet<EntityId> = scene.objects.iter().map(|o| o.id).filter(|id| big.contains(id)).collect();
    let surfaces = scene.surfaces.iter().map(|s| s.id).filter(|id| big.contains(id));
    let all = objects.iter().copied().chain(surfaces).collect();
    (objects, all)
}

fn camera_filter() -> Outcome {
    const MIN_OBJECTS: usize = 3;
    const MIN_PIXELS: usize = 100;
    let p = Pipeline::with_defaults(GenConfig {
        seed: 2002,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let params = RelationParams::default();
    let mut views = 0;
    for i in 0..100 {
        let (scene, cams) = p.generate_views(i).map_err(|e| format!("scene {i}: {e}"))?;
        for v in &cams {
            let (objects, visible) = visible_by_recount(&scene, &v.camera, MIN_PIXELS);
            check(objects.len() >= MIN_OBJECTS, || format!("scene {i} camera {}: {} visible objects", v.id, objects.len()))?;
            let rels = common::oracle_relations(&scene, &v.camera, &visible, &params);
            check(rels.iter().any(|(_, _, refs)| refs.iter().all(|r| objects.contains(r))), || {
                format!("scene {i} camera {}: no object-object relation", v.id)
            })?;
            views += 1;
        }
    }
    Ok(format!("{views} emitted cameras over 100 scenes re-audited, 0 violations"))
}

fn relation_oracle() -> Outcome {
    let p = Pipeline::with_defaults(GenConfig {
        seed: 3003,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let params = RelationParams::default();
    let (mut views, mut tuples) = (0, 0);
    for i in 0..50 {
        let (scene, cams) = p.generate_views(i).map_err(|e| format!("scene {i}: {e}"))?;
        for v in &cams {
            let got: BTreeSet<_> = compute_relations(&scene, &v.camera, v.id, &v.check.visible, &params)
                .into_iter()
                .map(|t| (t.subject, t.relation, t.refs))
                .collect();
            let want = common::oracle_relations(&scene, &v.camera, &v.check.visible, &params);
            check(got == want, || {
                format!(
                    "scene {i} camera {}: {} extra, {} missing",
                    v.id,
                    got.difference(&want).count(),
                    want.difference(&got).count()
                )
            })?;
            views += 1;
            tuples += got.len();
        }
    }
    Ok(format!("50 scenes, {views} views, {tuples} tuples, sets identical"))
}

fn scale_ratio() -> Outcome {
    let p = Pipeline::with_defaults(GenConfig {
        seed: 4004,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let mut total = 0;
    for i in 0..20 {
        let (_, cams) = p.generate_views(i).map_err(|e| format!("scene {i}: {e}"))?;
        total += cams.iter().map(|v| v.check.tuples.len()).sum::<usize>();
    }
    let avg = total as f64 / 20.0;
    check(avg >= 50.0, || format!("{avg:.1} pairs per scene"))?;
    Ok(format!("{avg:.1} (image, relation) pairs per scene over 20 scenes (>= 50)"))
}

fn format_fidelity(gen: &Generated) -> Outcome {
    let answer = Regex::new(r"^\[\(\d\.\d{2}, \d\.\d{2}\)(, \(\d\.\d{2}, \d\.\d{2}\))*\]$").unwrap();
    for a in &gen.answers {
        check(answer.is_match(a), || format!("answer {a:?} does not match the tuple syntax"))?;
    }
    let mut rng = stream!(5005, "pointsets");
    for k in 0..10_000 {
        let n = rng.random_range(1..=50);
        let pts: Vec<NormPoint> = (0..n).map(|_| NormPoint::new(rng.random(), rng.random())).collect();
        let set = PointSet::new(pts).map_err(|e| e.to_string())?;
        let back = parse_points(&set.to_string()).map_err(|e| format!("set {k}: {e}"))?;
        check(back == set.points(), || format!("set {k} did not round-trip"))?;
    }
    let det = convert_detection(&[DetectionRecord {
        id: None,
        image: "a.jpg".into(),
        width: 100,
        height: 100,
        category: "cushions".into(),
        boxes: vec![[45.0, 35.0, 8.0, 6.0], [49.5, 39.5, 7.0, 5.0]],
    }])
    .map_err(|e| e.to_string())?;
    check(det[0].answer == "[(0.49, 0.38, 0.08, 0.06), (0.53, 0.42, 0.07, 0.05)]", || {
        format!("detection answer {:?}", det[0].answer)
    })?;
    Ok(format!(
        "{} generated answers match, 10000 point sets round-trip, detection format exact",
        gen.answers.len()
    ))
}

fn recount(points: &[NormPoint], mask: &Mask) -> f64 {
    let (w, h) = (mask.width(), mask.height());
    let inside = points
        .iter()
        .filter(|p| {
            let x = (p.x * (w - 1) as f64).round() as u32;
            let y = (p.y * (h - 1) as f64).round() as u32;
            mask.pixels().any(|q| q == (x, y))
        })
        .count();
    inside as f64 / points.len() as f64
}

fn metric(gen: &Generated) -> Outcome {
    let mut rng = stream!(6006, "metric");
    for case in 0..1000 {
        let (w, h) = (rng.random_range(1..60u32), rng.random_range(1..60u32));
        let density: f64 = rng.random();
        let mask = Mask::from_fn(w, h, |_, _| rng.random::<f64>() < density);
        let n = rng.random_range(1..=50);
        let pts: Vec<NormPoint> = (0..n).map(|_| NormPoint::new(rng.random(), rng.random())).collect();
        let (a, b) = (accuracy(&pts, &mask), recount(&pts, &mask));
        check(a == b, || format!("case {case}: accuracy {a} vs recount {b}"))?;
    }
    let half = Mask::from_fn(11, 11, |x, _| x <= 5);
    let four = [(0.1, 0.1), (0.4, 0.9), (0.7, 0.1), (0.9, 0.9)].map(|(x, y)| NormPoint::new(x, y));
    let a = accuracy(&four, &half);
    check(a == 0.5, || format!("2-of-4 case scored {a}"))?;
    let records: Vec<BenchmarkRecord> = gen
        .masks
        .iter()
        .enumerate()
        .map(|(i, m)| BenchmarkRecord {
            id: format!("s{i}"),
            image: Default::default(),
            instruction: String::new(),
            gt_mask: m.clone(),
        })
        .collect();
    let preds: Vec<Prediction> = (0..3)
        .flat_map(|run| {
            gen.answers.iter().enumerate().map(move |(i, t)| Prediction {
                record_id: format!("s{i}"),
                run_id: run,
                text: t.clone(),
            })
        })
        .collect();
    let rep = evaluate(&records, &preds, 3).map_err(|e| e.to_string())?;
    check(rep.mean_pct == 100.0 && rep.std_pct == 0.0, || {
        format!("self-eval {:.2} ± {:.2}", rep.mean_pct, rep.std_pct)
    })?;
    Ok(format!(
        "1000 recount cases equal, 2-of-4 = 0.50, self-eval {:.2} ± {:.2} over {} records x 3 runs",
        rep.mean_pct,
        rep.std_pct,
        records.len()
    ))
}

fn geometry() -> Outcome {
    let mut rng = stream!(7007, "frustum");
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let eye = Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(0.2..3.0));
        let target = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
        let pose = Camera::look_at_pose(eye, target).map_err(|e| e.to_string())?;
        let cam = Camera::from_vertical_fov(640, 480, rng.random_range(30.0..90.0), pose).map_err(|e| e.to_string())?;
        // a world point inside the frustum
        let p = deproject(rng.random_range(0.0..639.0), rng.random_range(0.0..479.0), rng.random_range(0.05..20.0), &cam)
            .map_err(|e| e.to_string())?;
        let (u, v, d) = project(&p, &cam).map_err(|e| e.to_string())?;
        let q = deproject(u, v, d, &cam).map_err(|e| e.to_string())?;
        let rel = (q - p).norm() / p.norm().max(1e-12);
        worst = worst.max(rel);
        check(rel <= 1e-6, || format!("point {k}: relative error {rel:e}"))?;
    }
    let p = Pipeline::with_defaults(common::small_scene_config(7008)).map_err(|e| e.to_string())?;
    let mut pixels = 0;
    for i in 0..10 {
        let (scene, _) = p.generate_views(i).map_err(|e| format!("scene {i}: {e}"))?;
        let cam = common::overview_camera(&scene, 160, 120);
        pixels += common::audit_depth(&scene, &cam).map_err(|e| format!("scene {i}: {e}"))?;
    }
    Ok(format!(
        "round trip worst relative error {worst:.1e} over 1000 points; {pixels} depth pixels on hit planes within 1e-3 m over 10 scenes"
    ))
}

fn determinism() -> Outcome {
    let cfg = GenConfig {
        seed: 8008,
        n_scenes: 4,
        image_size: [320, 240],
        cameras_per_scene: 2,
        ..Default::default()
    };
    let p = Pipeline::with_defaults(cfg).map_err(|e| e.to_string())?;
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, workers) in dirs.iter().zip([1, 1, 8]) {
        run_gen(&p, d.path(), workers).map_err(|e| e.to_string())?;
    }
    let mix = |d: &Path| -> Result<String, String> {
        let samples: Vec<InstructionSample> =
            pointgen_core::evalkit::read_jsonl(&d.join(SAMPLES_FILE)).map_err(|e| e.to_string())?;
        let mut sources = BTreeMap::new();
        for s in samples {
            sources.entry(s.kind).or_insert_with(Vec::new).push(s);
        }
        let out = assemble_mix(&sources, &MixSpec::with_counts([40, 40, 0, 0], 1)).map_err(|e| e.to_string())?;
        Ok(out.jsonl + &serde_json::to_string(&out.manifest).unwrap())
    };
    let files = [SAMPLES_FILE, ANNOTATIONS_FILE, INSTRUCTIONS_FILE, MANIFEST_FILE];
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap_or_default();
    for f in files {
        let base = read(dirs[0].path(), f);
        check(!base.is_empty(), || format!("{f} is empty"))?;
        check(base == read(dirs[1].path(), f), || format!("{f} differs between serial runs"))?;
        check(base == read(dirs[2].path(), f), || format!("{f} differs between 1 and 8 workers"))?;
    }
    let m0 = mix(dirs[0].path())?;
    check(m0 == mix(dirs[1].path())? && m0 == mix(dirs[2].path())?, || "mixed dataset differs".into())?;
    Ok("jsonl files, manifests and mixed dataset byte-identical across 2 serial runs and 8 workers".into())
}

fn baseline() -> Outcome {
    let mut rng = stream!(9009, "bbox");
    for case in 0..1000 {
        let x0: f64 = rng.random_range(0.0..0.95);
        let y0: f64 = rng.random_range(0.0..0.95);
        let r = NormRect {
            x0,
            y0,
            x1: rng.random_range(x0 + 1e-3..=1.0),
            y1: rng.random_range(y0 + 1e-3..=1.0),
        };
        let k = rng.random_range(1..=50);
        let pts = baseline_bbox_points(r, k);
        check(pts.len() == k, || format!("case {case}: {} points for k={k}", pts.len()))?;
        check(pts.iter().all(|p| p.x > r.x0 && p.x < r.x1 && p.y > r.y0 && p.y < r.y1), || {
            format!("case {case}: point on or outside {r:?}")
        })?;
    }
    let unit = NormRect {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };
    let want = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)].map(|(x, y)| NormPoint::new(x, y));
    let got = baseline_bbox_points(unit, 4);
    check(got == want, || format!("k=4 unit square gave {}", format_points(&got)))?;
    Ok("1000 random boxes all strictly interior; k=4 unit square exact".into())
}

fn mix_integrity() -> Outcome {
    let sources: BTreeMap<SampleKind, Vec<InstructionSample>> = SampleKind::ALL
        .into_iter()
        .zip([4000, 4000, 7000, 1500])
        .map(|(kind, n)| {
            let v = (0..n)
                .map(|i| InstructionSample {
                    id: format!("{kind}-{i}"),
                    image: format!("{kind}/{i}.png"),
                    query: "q".into(),
                    answer: "[(0.50, 0.50)]".into(),
                    kind,
                    annotations: None,
                })
                .collect();
            (kind, v)
        })
        .collect();
    let out = assemble_mix(&sources, &MixSpec::scaled(0.01, 10)).map_err(|e| e.to_string())?;
    let mut per_kind = BTreeMap::<SampleKind, usize>::new();
    for line in out.jsonl.lines() {
        let s: InstructionSample = serde_json::from_str(line).map_err(|e| e.to_string())?;
        *per_kind.entry(s.kind).or_default() += 1;
    }
    let got: Vec<usize> = SampleKind::ALL.iter().map(|k| per_kind.get(k).copied().unwrap_or(0)).collect();
    check(got == [3470, 3200, 6650, 1000], || format!("per-kind counts {got:?}"))?;
    check(out.manifest.realized == per_kind, || "manifest disagrees with lines".into())?;
    Ok(format!("per-kind counts {got:?}"))
}

fn run(n: u8, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = t.elapsed().as_secs_f64();
    match res {
        Ok(detail) => {
            println!("PASS [{n:>2}] {name}: {detail} ({secs:.1}s)");
            true
        }
        Err(why) => {
            println!("FAIL [{n:>2}] {name}: {why} ({secs:.1}s)");
            false
        }
    }
}

fn main() {
    let mut gen = None;
    let mut ok = run(1, "label soundness", || label_soundness(&mut gen));
    let gen = gen.unwrap_or(Generated {
        answers: vec![],
        masks: vec![],
    });
    ok &= run(2, "camera filter fidelity", camera_filter);
    ok &= run(3, "relation oracle equivalence", relation_oracle);
    ok &= run(4, "scale ratio", scale_ratio);
    ok &= run(5, "format fidelity", || format_fidelity(&gen));
    ok &= run(6, "metric correctness", || metric(&gen));
    ok &= run(7, "geometry", geometry);
    ok &= run(8, "determinism", determinism);
    ok &= run(9, "baseline sampler", baseline);
    ok &= run(10, "mix integrity", mix_integrity);
    if !ok {
        std::process::exit(1);
    }
}
