//! Points-in-mask scoring over a benchmark directory with multi-run
//! aggregation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::affordance::NormPoint;
use crate::error::{Error, Result};
use crate::imageio;
use crate::raster::Mask;

pub const INSTRUCTIONS_FILE: &str = "instructions.jsonl";

static PAIR: LazyLock<Regex> = LazyLock::new(|| {
    let num = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";
    Regex::new(&format!(r"\(\s*{num}\s*,\s*{num}\s*\)")).expect("valid pattern")
});

/// Every `(x, y)` pair in the text. Pairs with a coordinate outside [0, 1]
/// are dropped; no surviving pair is an error.
pub fn parse_points(text: &str) -> Result<Vec<NormPoint>> {
    let pts: Vec<NormPoint> = PAIR
        .captures_iter(text)
        .filter_map(|c| {
            let x: f64 = c[1].parse().ok()?;
            let y: f64 = c[2].parse().ok()?;
            let p = NormPoint::new(x, y);
            p.in_unit_square().then_some(p)
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::Unparseable);
    }
    Ok(pts)
}

/// Fraction of points whose pixel lies in the mask.
pub fn accuracy(points: &[NormPoint], mask: &Mask) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (w, h) = (mask.width(), mask.height());
    let hits = points
        .iter()
        .filter(|p| {
            let (x, y) = p.to_pixel(w, h);
            mask.get(x, y)
        })
        .count();
    hits as f64 / points.len() as f64
}

/// Normalized rectangle, top-left and bottom-right corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// `k` points on a ceil(sqrt(k)) grid at cell centers, row-major. A
/// degenerate rectangle yields its center.
pub fn baseline_bbox_points(bbox: NormRect, k: usize) -> Vec<NormPoint> {
    let center = NormPoint::new((bbox.x0 + bbox.x1) / 2.0, (bbox.y0 + bbox.y1) / 2.0);
    if k <= 1 || !(bbox.x1 > bbox.x0 && bbox.y1 > bbox.y0) {
        return vec![center];
    }
    let g = (k as f64).sqrt().ceil() as usize;
    let (w, h) = (bbox.x1 - bbox.x0, bbox.y1 - bbox.y0);
    (0..g)
        .flat_map(|r| (0..g).map(move |c| (r, c)))
        .take(k)
        .map(|(r, c)| {
            NormPoint::new(
                bbox.x0 + w * (c as f64 + 0.5) / g as f64,
                bbox.y0 + h * (r as f64 + 0.5) / g as f64,
            )
        })
        .collect()
}

/// One line of `instructions.jsonl`; paths are relative to the benchmark
/// directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub id: String,
    pub image: String,
    pub mask: String,
    pub instruction: String,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    pub id: String,
    pub image: PathBuf,
    pub instruction: String,
    pub gt_mask: Mask,
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Loads `instructions.jsonl` and the referenced masks.
pub fn load_benchmark(dir: &Path) -> Result<Vec<BenchmarkRecord>> {
    let records: Vec<InstructionRecord> = read_jsonl(&dir.join(INSTRUCTIONS_FILE))?;
    records
        .into_par_iter()
        .map(|r| {
            let image = dir.join(&r.image);
            let gt_mask = imageio::read_mask(&dir.join(&r.mask))?;
            let dims = imageio::image_dimensions(&image)?;
            if dims != (gt_mask.width(), gt_mask.height()) {
                return Err(Error::Invalid(format!(
                    "{}: mask is {}x{}, image is {}x{}",
                    r.id,
                    gt_mask.width(),
                    gt_mask.height(),
                    dims.0,
                    dims.1
                )));
            }
            Ok(BenchmarkRecord {
                id: r.id,
                image,
                instruction: r.instruction,
                gt_mask,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: String,
    pub run_id: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: u32,
    pub mean: f64,
    pub unparseable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub runs: usize,
    pub records: usize,
    /// accuracy per record id, one entry per run
    pub per_record: BTreeMap<String, Vec<f64>>,
    pub per_run: Vec<RunSummary>,
    /// mean of the run means, percent, two decimals
    pub mean_pct: f64,
    /// population std of the run means, percent, two decimals
    pub std_pct: f64,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>10} {:>12}", "run", "accuracy", "unparseable")?;
        for r in &self.per_run {
            writeln!(f, "{:<8} {:>10.2} {:>12}", r.run_id, r.mean * 100.0, r.unparseable)?;
        }
        write!(
            f,
            "{} records, {} runs: {:.2} ± {:.2}",
            self.records, self.runs, self.mean_pct, self.std_pct
        )
    }
}

fn pct2(v: f64) -> f64 {
    (v * 10000.0).round() / 100.0
}

/// Scores `runs` runs over the records. Every (record, run) pair needs
/// exactly one prediction, with run ids 0..runs. Unparseable text scores 0.
pub fn evaluate(records: &[BenchmarkRecord], predictions: &[Prediction], runs: usize) -> Result<EvalReport> {
    if runs == 0 || records.is_empty() {
        return Err(Error::CountMismatch("no records or runs".into()));
    }
    if predictions.len() != records.len() * runs {
        return Err(Error::CountMismatch(format!(
            "{} predictions for {} records x {} runs",
            predictions.len(),
            records.len(),
            runs
        )));
    }
    let index: HashMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    if index.len() != records.len() {
        return Err(Error::Invalid("duplicate record id".into()));
    }
    let mut slots: Vec<Vec<Option<&str>>> = vec![vec![None; runs]; records.len()];
    for p in predictions {
        let i = *index
            .get(p.record_id.as_str())
            .ok_or_else(|| Error::CountMismatch(format!("prediction for unknown record {}", p.record_id)))?;
        let run = p.run_id as usize;
        if run >= runs {
            return Err(Error::CountMismatch(format!("run id {} outside 0..{runs}", p.run_id)));
        }
        if slots[i][run].replace(p.text.as_str()).is_some() {
            return Err(Error::CountMismatch(format!(
                "duplicate prediction for {} run {}",
                p.record_id, p.run_id
            )));
        }
    }
    let scored: Vec<Vec<(f64, bool)>> = records
        .par_iter()
        .zip(slots.par_iter())
        .map(|(rec, texts)| {
            texts
                .iter()
                .map(|t| match parse_points(t.expect("all slots filled")) {
                    Ok(pts) => (accuracy(&pts, &rec.gt_mask), false),
                    Err(_) => (0.0, true),
                })
                .collect()
        })
        .collect();
    let per_run: Vec<RunSummary> = (0..runs)
        .map(|r| RunSummary {
            run_id: r as u32,
            mean: scored.iter().map(|s| s[r].0).sum::<f64>() / records.len() as f64,
            unparseable: scored.iter().filter(|s| s[r].1).count(),
        })
        .collect();
    let mean = per_run.iter().map(|r| r.mean).sum::<f64>() / runs as f64;
    let var = per_run.iter().map(|r| (r.mean - mean).powi(2)).sum::<f64>() / runs as f64;
    Ok(EvalReport {
        runs,
        records: records.len(),
        per_record: records
            .iter()
            .zip(&scored)
            .map(|(rec, s)| (rec.id.clone(), s.iter().map(|x| x.0).collect()))
            .collect(),
        per_run,
        mean_pct: pct2(mean),
        std_pct: pct2(var.sqrt()),
    })
}
