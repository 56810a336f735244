//! Conversion of external VQA and detection sources and assembly of the
//! four-source instruction mix.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::affordance::{round2, SampleKind};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::imageio::write_file;
use crate::stream;

pub const MIX_FORMAT_VERSION: u32 = 1;
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const MIX_MANIFEST_FILE: &str = "mix_manifest.json";

/// Default per-kind sizes, in [`SampleKind::ALL`] order.
pub const DEFAULT_MIX: [usize; 4] = [347_000, 320_000, 665_000, 100_000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionSample {
    pub id: String,
    pub image: String,
    pub query: String,
    pub answer: String,
    pub kind: SampleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub category: String,
    /// pixel boxes as [x, y, w, h], top-left origin
    pub boxes: Vec<[f64; 4]>,
}

/// `[(0.49, 0.38, 0.08, 0.06), ...]`
pub fn format_boxes(boxes: &[[f64; 4]]) -> String {
    let body: Vec<String> = boxes
        .iter()
        .map(|b| {
            format!(
                "({:.2}, {:.2}, {:.2}, {:.2})",
                round2(b[0]),
                round2(b[1]),
                round2(b[2]),
                round2(b[3])
            )
        })
        .collect();
    format!("[{}]", body.join(", "))
}

/// One sample per record: all instances of the category as normalized
/// (cx, cy, w, h).
pub fn convert_detection(records: &[DetectionRecord]) -> Result<Vec<InstructionSample>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.width == 0 || r.height == 0 {
                return Err(Error::Invalid(format!("{}: zero image size", r.image)));
            }
            let (w, h) = (r.width as f64, r.height as f64);
            let boxes = r
                .boxes
                .iter()
                .map(|&[x, y, bw, bh]| {
                    if x < 0.0 || y < 0.0 || bw < 0.0 || bh < 0.0 || x + bw > w || y + bh > h {
                        return Err(Error::Invalid(format!(
                            "{}: box {:?} outside {}x{}",
                            r.image,
                            [x, y, bw, bh],
                            r.width,
                            r.height
                        )));
                    }
                    Ok([(x + bw / 2.0) / w, (y + bh / 2.0) / h, bw / w, bh / h])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(InstructionSample {
                id: r.id.clone().unwrap_or_else(|| format!("detection_{i:06}")),
                image: r.image.clone(),
                query: format!("Find all instances of {}.", r.category),
                answer: format_boxes(&boxes),
                kind: SampleKind::Detection,
                annotations: None,
            })
        })
        .collect()
}

/// VQA records copied verbatim. Records missing `image`, `question` or
/// `answer` are skipped; the second value counts them.
pub fn passthrough_vqa(records: &[Value]) -> (Vec<InstructionSample>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for (i, r) in records.iter().enumerate() {
        let field = |k: &str| r.get(k).and_then(Value::as_str).map(str::to_string);
        match (field("image"), field("question"), field("answer")) {
            (Some(image), Some(query), Some(answer)) => out.push(InstructionSample {
                id: field("id").unwrap_or_else(|| format!("vqa_{i:06}")),
                image,
                query,
                answer,
                kind: SampleKind::Vqa,
                annotations: None,
            }),
            _ => skipped += 1,
        }
    }
    (out, skipped)
}

/// Per-kind counts. A missing count falls back to the default size times
/// `scale`, rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSpec {
    pub object_ref: Option<usize>,
    pub space_ref: Option<usize>,
    pub vqa: Option<usize>,
    pub detection: Option<usize>,
    pub scale: f64,
    pub seed: u64,
}

impl Default for MixSpec {
    fn default() -> Self {
        MixSpec {
            object_ref: None,
            space_ref: None,
            vqa: None,
            detection: None,
            scale: 1.0,
            seed: 0,
        }
    }
}

impl MixSpec {
    pub fn with_counts(counts: [usize; 4], seed: u64) -> Self {
        MixSpec {
            object_ref: Some(counts[0]),
            space_ref: Some(counts[1]),
            vqa: Some(counts[2]),
            detection: Some(counts[3]),
            scale: 1.0,
            seed,
        }
    }

    pub fn scaled(scale: f64, seed: u64) -> Self {
        MixSpec {
            scale,
            seed,
            ..Default::default()
        }
    }

    pub fn counts(&self) -> [usize; 4] {
        let explicit = [self.object_ref, self.space_ref, self.vqa, self.detection];
        std::array::from_fn(|i| explicit[i].unwrap_or_else(|| (DEFAULT_MIX[i] as f64 * self.scale).round() as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::Invalid(format!("mix scale {}", self.scale)));
        }
        if self.counts().iter().all(|&c| c == 0) {
            return Err(Error::Invalid("mix requests zero samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixManifest {
    pub version: u32,
    pub seed: u64,
    pub spec_hash: String,
    pub requested: BTreeMap<SampleKind, usize>,
    pub available: BTreeMap<SampleKind, usize>,
    pub realized: BTreeMap<SampleKind, usize>,
    pub shortfall: BTreeMap<SampleKind, usize>,
    pub lines: usize,
    pub dataset_sha256: String,
}

#[derive(Debug, Clone)]
pub struct MixOutput {
    /// the dataset file contents, one sample per line
    pub jsonl: String,
    pub manifest: MixManifest,
}

/// Takes the requested count from each source, preferring the lowest
/// sha256 of the sample id so the selection does not depend on the shuffle
/// seed, then shuffles all lines together.
pub fn assemble_mix(sources: &BTreeMap<SampleKind, Vec<InstructionSample>>, spec: &MixSpec) -> Result<MixOutput> {
    spec.validate()?;
    if sources.values().all(Vec::is_empty) {
        return Err(Error::EmptyMix);
    }
    let counts = spec.counts();
    let mut requested = BTreeMap::new();
    let mut available = BTreeMap::new();
    let mut realized = BTreeMap::new();
    let mut shortfall = BTreeMap::new();
    let mut picked: Vec<(String, String)> = Vec::new();
    for (kind, want) in SampleKind::ALL.into_iter().zip(counts) {
        let pool = sources.get(&kind).map(Vec::as_slice).unwrap_or_default();
        if let Some(bad) = pool.iter().find(|s| s.kind != kind) {
            return Err(Error::Invalid(format!("sample {} has kind {} in the {kind} source", bad.id, bad.kind)));
        }
        let mut keyed: Vec<(String, String)> = pool
            .iter()
            .map(|s| Ok((sha256_hex(s.id.as_bytes()), serde_json::to_string(s)?)))
            .collect::<Result<_>>()?;
        keyed.sort();
        keyed.truncate(want);
        requested.insert(kind, want);
        available.insert(kind, pool.len());
        realized.insert(kind, keyed.len());
        shortfall.insert(kind, want - keyed.len());
        if keyed.len() < want {
            log::warn!("{kind}: {} of {want} requested samples available", keyed.len());
        }
        picked.extend(keyed);
    }
    let mut lines: Vec<String> = picked.into_iter().map(|(_, line)| line).collect();
    lines.shuffle(&mut stream!(spec.seed, "mix", "shuffle"));
    let mut jsonl = String::new();
    for l in &lines {
        jsonl.push_str(l);
        jsonl.push('\n');
    }
    let manifest = MixManifest {
        version: MIX_FORMAT_VERSION,
        seed: spec.seed,
        spec_hash: sha256_hex(serde_json::to_string(spec)?.as_bytes()),
        requested,
        available,
        realized,
        shortfall,
        lines: lines.len(),
        dataset_sha256: sha256_hex(jsonl.as_bytes()),
    };
    Ok(MixOutput { jsonl, manifest })
}

pub fn write_mix(dir: &Path, mix: &MixOutput) -> Result<()> {
    write_file(&dir.join(DATASET_FILE), mix.jsonl.as_bytes())?;
    let mut m = serde_json::to_string_pretty(&mix.manifest)?;
    m.push('\n');
    write_file(&dir.join(MIX_MANIFEST_FILE), m.as_bytes())
}
