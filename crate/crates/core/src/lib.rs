//! Procedural generation of spatial-affordance instruction data and a
//! points-in-mask evaluation harness.

pub mod affordance;
pub mod config;
pub mod datamix;
mod digest;
pub mod error;
pub mod evalkit;
pub mod imageio;
pub mod pipeline;
pub mod procgen;
pub mod raster;
pub mod relations;
pub mod rng;
pub mod scene;
pub mod viz;

pub use error::{Error, Result};
pub use digest::sha256_hex;
