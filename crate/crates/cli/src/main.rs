use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use pointgen_core::affordance::SampleKind;
use pointgen_core::config::PipelineConfig;
use pointgen_core::datamix::{assemble_mix, convert_detection, passthrough_vqa, write_mix, DetectionRecord, InstructionSample};
use pointgen_core::evalkit::{evaluate, load_benchmark, parse_points, read_jsonl, Prediction};
use pointgen_core::imageio::{encode_rgb, read_mask, read_rgb, write_file};
use pointgen_core::pipeline::{run_gen, Pipeline, SAMPLES_FILE};
use pointgen_core::viz::render_overlay;
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "pointgen", version, about = "Spatial-affordance instruction data generator and points-in-mask evaluator")]
struct Cli {
    /// pipeline config (TOML); built-in defaults when absent
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// root seed, overriding the config
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// worker threads, 0 for all cores
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate scenes, renders and labelled samples
    Gen,
    /// Assemble the mixed training dataset
    Mix {
        /// samples.jsonl files from `gen`; defaults to the one in the config's output dir
        #[arg(long)]
        samples: Vec<PathBuf>,
        /// external VQA records, one JSON object per line
        #[arg(long)]
        vqa: Option<PathBuf>,
        /// detection records, one JSON object per line
        #[arg(long)]
        detection: Option<PathBuf>,
    },
    /// Score predictions against a benchmark directory
    Eval {
        /// directory holding images/, masks/ and instructions.jsonl
        #[arg(long)]
        benchmark: PathBuf,
        /// JSONL of {record_id, run_id, text}
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value_t = 3)]
        runs: usize,
    },
    /// Draw the mask and points of one sample over its image
    Viz {
        /// samples.jsonl written by `gen`
        #[arg(long)]
        samples: PathBuf,
        /// sample id
        #[arg(long)]
        id: String,
        /// predicted points, e.g. "[(0.50, 0.40)]"
        #[arg(long)]
        points: Option<String>,
    },
    /// Print the effective config as TOML
    Config,
    /// Built-in asset set
    Assets {
        #[command(subcommand)]
        cmd: AssetsCommand,
    },
}

#[derive(Debug, Subcommand)]
enum AssetsCommand {
    /// Write the asset manifest and OBJ meshes
    Export,
}

impl Cli {
    fn load_config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.gen.seed = s;
            cfg.mix.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

fn cmd_gen(cfg: &PipelineConfig) -> Result<()> {
    let pipeline = Pipeline::from_config(cfg)?;
    let m = run_gen(&pipeline, &cfg.output_dir, cfg.workers)?;
    let samples: usize = m.samples.values().sum();
    println!(
        "{} of {} scenes, {} views, {} relation pairs, {} samples -> {}",
        m.scenes_generated,
        m.scenes_requested,
        m.views,
        m.relation_pairs,
        samples,
        cfg.output_dir.display()
    );
    for (reason, n) in &m.drops {
        println!("dropped {n} ({reason})");
    }
    if samples == 0 && m.drops.is_empty() {
        bail!("no samples generated");
    }
    Ok(())
}

fn cmd_mix(cfg: &PipelineConfig, samples: &[PathBuf], vqa: Option<&Path>, detection: Option<&Path>) -> Result<()> {
    let default_samples = [cfg.output_dir.join(SAMPLES_FILE)];
    let files = if samples.is_empty() { &default_samples[..] } else { samples };
    let mut sources: BTreeMap<SampleKind, Vec<InstructionSample>> = BTreeMap::new();
    for f in files {
        for s in read_jsonl::<InstructionSample>(f)? {
            sources.entry(s.kind).or_default().push(s);
        }
    }
    if let Some(p) = vqa {
        let (kept, skipped) = passthrough_vqa(&read_jsonl::<Value>(p)?);
        if skipped > 0 {
            log::warn!("{skipped} VQA records skipped");
        }
        sources.entry(SampleKind::Vqa).or_default().extend(kept);
    }
    if let Some(p) = detection {
        let records = read_jsonl::<DetectionRecord>(p)?;
        sources.entry(SampleKind::Detection).or_default().extend(convert_detection(&records)?);
    }
    let mix = assemble_mix(&sources, &cfg.mix)?;
    let dir = cfg.output_dir.join("mix");
    write_mix(&dir, &mix)?;
    for kind in SampleKind::ALL {
        let got = mix.manifest.realized.get(&kind).copied().unwrap_or(0);
        let want = mix.manifest.requested.get(&kind).copied().unwrap_or(0);
        println!("{kind:<12} {got:>8} / {want}");
        if got < want {
            log::warn!("{kind}: short by {}", want - got);
        }
    }
    println!("{} lines -> {}", mix.manifest.lines, dir.display());
    Ok(())
}

fn cmd_eval(cfg: &PipelineConfig, benchmark: &Path, predictions: &Path, runs: usize) -> Result<()> {
    let records = load_benchmark(benchmark)?;
    let preds = read_jsonl::<Prediction>(predictions)?;
    let report = evaluate(&records, &preds, runs)?;
    let dir = cfg.output_dir.join("eval");
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_file(&dir.join("report.json"), json.as_bytes())?;
    let table = format!("{report}\n");
    write_file(&dir.join("report.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn cmd_viz(cfg: &PipelineConfig, samples: &Path, id: &str, points: Option<&str>) -> Result<()> {
    let base = samples.parent().unwrap_or(Path::new("."));
    let sample = read_jsonl::<InstructionSample>(samples)?
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| anyhow!("no sample {id} in {}", samples.display()))?;
    let image = read_rgb(&base.join(&sample.image))?;
    let mask = match sample.annotations.as_ref().and_then(|a| a.get("mask")).and_then(Value::as_str) {
        Some(m) => Some(read_mask(&base.join(m))?),
        None => None,
    };
    let gt = parse_points(&sample.answer).unwrap_or_default();
    let pred = match points {
        Some(t) => parse_points(t).context("parsing --points")?,
        None => vec![],
    };
    let out = render_overlay(&image, mask.as_ref(), &gt, &pred)?;
    let path = cfg.output_dir.join("viz").join(format!("{id}.png"));
    write_file(&path, &encode_rgb(&out))?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.load_config()?;
    match &cli.cmd {
        Command::Gen => cmd_gen(&cfg),
        Command::Mix { samples, vqa, detection } => cmd_mix(&cfg, samples, vqa.as_deref(), detection.as_deref()),
        Command::Eval {
            benchmark,
            predictions,
            runs,
        } => cmd_eval(&cfg, benchmark, predictions, *runs),
        Command::Viz { samples, id, points } => cmd_viz(&cfg, samples, id, points.as_deref()),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Assets {
            cmd: AssetsCommand::Export,
        } => {
            let dir = cfg.output_dir.join("assets");
            cfg.load_assets()?.export(&dir)?;
            println!("{}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
