//! Ground-truth scene generation: parametric objects, trajectories and
//! stereo event streams.

pub mod export;
pub mod primitive;
pub mod render;
pub mod trajectory;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::StereoRig;
use crate::config::PipelineConfig;
use crate::error::Result;

pub use export::{export_scene, import_scene, SceneFiles};
pub use primitive::{make_primitive, PrimitiveKind};
pub use render::{render_events, EventRateSpec, NoiseSpec, RenderOptions, RenderedCamera, RenderedScene, NOISE_LABEL};
pub use trajectory::{pose_at, TrajectoryKind, TrajectorySpec};

/// Rig given inline or as a path relative to the scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RigSource {
    Path(PathBuf),
    Inline(serde_json::Value),
}

/// Scene description consumed by `simulate` and `run-all`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub model: PrimitiveKind,
    pub trajectory: TrajectorySpec,
    pub rig: RigSource,
    pub rate: EventRateSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub render: RenderOptions,
    /// Settings for the reconstruction and tracking stages of `run-all`.
    #[serde(default)]
    pub pipeline: PipelineConfig,
    /// RPE window, seconds.
    #[serde(default = "default_delta")]
    pub eval_delta: f64,
}

fn default_delta() -> f64 {
    1.0
}

impl SceneConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Resolves the rig; relative paths are taken from `base_dir`.
    pub fn rig(&self, base_dir: &Path) -> Result<StereoRig> {
        match &self.rig {
            RigSource::Path(p) => StereoRig::load(&base_dir.join(p)),
            RigSource::Inline(v) => StereoRig::from_json(&v.to_string()),
        }
    }
}
