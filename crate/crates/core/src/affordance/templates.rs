use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PromptColor, SampleKind};
use crate::error::{Error, Result};
use crate::relations::{RelationTuple, RelationType};
use crate::scene::Scene;

pub const TEMPLATE_FORMAT_VERSION: u32 = 1;
pub const MIN_PARAPHRASES: usize = 3;

const DEFAULT_TABLE: &str = include_str!("../../templates/default.json");

/// Template key used by `On` when the reference is a support surface.
pub const ON_SURFACE_KEY: &str = "on_surface";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindTemplates {
    pub object_ref: Vec<String>,
    pub space_ref: Vec<String>,
}

/// Paraphrases per relation key. Slots: `{c1}` and `{c2}` take the marker
/// color words of the first and second reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateTable {
    pub version: u32,
    pub templates: BTreeMap<String, KindTemplates>,
}

impl Default for TemplateTable {
    fn default() -> Self {
        TemplateTable::from_json(DEFAULT_TABLE).expect("embedded template table is valid")
    }
}

/// Relation keys every table must cover.
pub fn required_keys() -> Vec<&'static str> {
    RelationType::ALL
        .iter()
        .map(|r| r.as_str())
        .chain(std::iter::once(ON_SURFACE_KEY))
        .collect()
}

impl TemplateTable {
    pub fn from_json(src: &str) -> Result<Self> {
        let t: TemplateTable = serde_json::from_str(src)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&src)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != TEMPLATE_FORMAT_VERSION {
            return Err(Error::Invalid(format!("template table version {}", self.version)));
        }
        for key in required_keys() {
            for kind in [SampleKind::ObjectRef, SampleKind::SpaceRef] {
                let list = self.lookup(key, kind)?;
                if list.len() < MIN_PARAPHRASES {
                    return Err(Error::Invalid(format!(
                        "{key}/{kind}: {} paraphrases, need {MIN_PARAPHRASES}",
                        list.len()
                    )));
                }
                let pair = key == RelationType::Between.as_str();
                for t in list {
                    if !t.contains("{c1}") || t.contains("{c2}") != pair {
                        return Err(Error::Invalid(format!("{key}/{kind}: bad slots in {t:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lookup(&self, key: &str, kind: SampleKind) -> Result<&[String]> {
        let missing = || Error::MissingTemplate {
            relation: key.to_string(),
            kind: kind.to_string(),
        };
        let entry = self.templates.get(key).ok_or_else(missing)?;
        let list = match kind {
            SampleKind::ObjectRef => &entry.object_ref,
            SampleKind::SpaceRef => &entry.space_ref,
            _ => return Err(missing()),
        };
        if list.is_empty() {
            return Err(missing());
        }
        Ok(list)
    }
}

pub fn template_key(tuple: &RelationTuple, scene: &Scene) -> &'static str {
    if tuple.relation == RelationType::On && tuple.refs.first().is_some_and(|&r| scene.surface(r).is_some()) {
        ON_SURFACE_KEY
    } else {
        tuple.relation.as_str()
    }
}

/// Picks a paraphrase for the tuple and fills the color slots.
pub fn instantiate_template<R: Rng + ?Sized>(
    table: &TemplateTable,
    tuple: &RelationTuple,
    scene: &Scene,
    kind: SampleKind,
    rng: &mut R,
) -> Result<String> {
    let list = table.lookup(template_key(tuple, scene), kind)?;
    let t = &list[rng.random_range(0..list.len())];
    Ok(t.replace("{c1}", PromptColor::Red.word())
        .replace("{c2}", PromptColor::Green.word()))
}
