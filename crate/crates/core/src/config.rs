//! The versioned pipeline configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affordance::{AffordanceConfig, TemplateTable};
use crate::datamix::MixSpec;
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::procgen::{AssetRepository, GenConfig};
use crate::relations::RelationParams;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    /// worker threads; 0 uses every core
    pub workers: usize,
    pub output_dir: PathBuf,
    /// asset directory with a manifest; the builtin set when absent
    pub assets_dir: Option<PathBuf>,
    /// template table JSON; the builtin table when absent
    pub templates: Option<PathBuf>,
    pub gen: GenConfig,
    pub relations: RelationParams,
    pub affordance: AffordanceConfig,
    pub mix: MixSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            workers: 0,
            output_dir: PathBuf::from("out"),
            assets_dir: None,
            templates: None,
            gen: GenConfig::default(),
            relations: RelationParams::default(),
            affordance: AffordanceConfig::default(),
            mix: MixSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(src)?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Invalid(format!(
                "config version {} (supported: {CONFIG_VERSION})",
                cfg.version
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        self.affordance.validate()?;
        self.mix.validate()?;
        for p in [&self.assets_dir, &self.templates].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Invalid(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn load_assets(&self) -> Result<AssetRepository> {
        match &self.assets_dir {
            Some(dir) => AssetRepository::load(dir),
            None => Ok(AssetRepository::builtin()),
        }
    }

    pub fn load_templates(&self) -> Result<TemplateTable> {
        match &self.templates {
            Some(p) => TemplateTable::load(p),
            None => Ok(TemplateTable::default()),
        }
    }
}

/// Digest of everything that shapes generated data: generation, relation
/// and affordance settings plus the resolved template table and asset
/// manifest. Worker count and output paths are left out.
pub fn generation_hash(
    gen: &GenConfig,
    relations: &RelationParams,
    affordance: &AffordanceConfig,
    table: &TemplateTable,
    assets: &AssetRepository,
) -> String {
    let asset_keys: Vec<(&str, &str, usize)> = assets
        .assets()
        .iter()
        .map(|a| (a.key.as_str(), a.category.as_str(), a.mesh.triangles().len()))
        .collect();
    let doc = serde_json::json!({
        "version": CONFIG_VERSION,
        "gen": gen,
        "relations": relations,
        "affordance": affordance,
        "templates": table,
        "assets": asset_keys,
    });
    sha256_hex(doc.to_string().as_bytes())
}
