//! Per-scene yield with the default config: `cargo run --release --example scene_stats -- 5`

use std::time::Instant;

use pointgen_core::pipeline::Pipeline;
use pointgen_core::procgen::GenConfig;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let p = Pipeline::with_defaults(GenConfig::default()).expect("default pipeline");
    let start = Instant::now();
    let (mut pairs, mut samples) = (0, 0);
    for i in 0..n {
        let t = Instant::now();
        match p.generate_scene(i) {
            Ok(g) => {
                println!(
                    "scene {i}: {} objects, {} views, {} pairs, {} samples, drops {:?} ({:.2}s)",
                    g.scene.objects.len(),
                    g.views.len(),
                    g.relation_pairs(),
                    g.samples.len(),
                    g.drops,
                    t.elapsed().as_secs_f64()
                );
                pairs += g.relation_pairs();
                samples += g.samples.len();
            }
            Err(e) => println!("scene {i}: dropped ({e})"),
        }
    }
    println!(
        "{:.1} pairs/scene, {samples} samples in {:.1}s",
        pairs as f64 / n as f64,
        start.elapsed().as_secs_f64()
    );
}
