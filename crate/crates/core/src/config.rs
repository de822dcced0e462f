use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::event::ClusterParams;
use crate::init::InitParams;
use crate::track::TrackParams;

/// Every tunable of reconstruction and tracking. Missing fields take their
/// defaults, so `{}` is a valid file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub cluster: ClusterParams,
    pub init: InitParams,
    pub tracking: TrackParams,
    /// Seeds line extraction.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.cluster.validate()?;
        self.init.validate()?;
        self.tracking.validate()
    }

    /// Initialization settings with the configured seed applied.
    pub fn init_params(&self) -> InitParams {
        let mut p = self.init;
        p.extraction.seed = self.seed;
        p
    }
}
