use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("object not over surface")]
    NotOverSurface,

    #[error("layout failed: no support surface could be placed")]
    LayoutFailed,

    #[error("asset repository is empty")]
    EmptyRepository,

    #[error("behind camera (camera-frame z = {0})")]
    BehindCamera(f64),

    #[error("invalid depth {0}: must be > 0")]
    InvalidDepth(f64),

    #[error("no valid depth under any of the given points")]
    NoValidDepth,

    #[error("unreferencable target: {0}")]
    UnreferencableTarget(String),

    #[error("free region invisible")]
    FreeRegionInvisible,

    #[error("degenerate prompt box")]
    DegeneratePrompt,

    #[error("too many visual prompts ({0}, at most 2)")]
    TooManyPrompts(usize),

    #[error("missing template for key {relation}/{kind}")]
    MissingTemplate { relation: String, kind: String },

    #[error("all mix sources are empty")]
    EmptyMix,

    #[error("unparseable prediction")]
    Unparseable,

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("mesh parse error at {path}:{line}: {msg}")]
    MeshParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    /// Short stable name for drop counters.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::NotOverSurface => "not_over_surface",
            Error::LayoutFailed => "layout_failed",
            Error::EmptyRepository => "empty_repository",
            Error::BehindCamera(_) => "behind_camera",
            Error::InvalidDepth(_) => "invalid_depth",
            Error::NoValidDepth => "no_valid_depth",
            Error::UnreferencableTarget(_) => "unreferencable_target",
            Error::FreeRegionInvisible => "free_region_invisible",
            Error::DegeneratePrompt => "degenerate_prompt",
            Error::TooManyPrompts(_) => "too_many_prompts",
            Error::MissingTemplate { .. } => "missing_template",
            Error::EmptyMix => "empty_mix",
            Error::Unparseable => "unparseable",
            Error::CountMismatch(_) => "count_mismatch",
            Error::Invalid(_) => "invalid",
            Error::MeshParse { .. } => "mesh_parse",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Toml(_) => "toml",
            Error::Image { .. } => "image",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
