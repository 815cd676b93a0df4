//! JSON run configuration. All quantities are SI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::DetectionConfig;
use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::model::{LeakScenario, PipelineSpec};
use crate::series::SeriesControl;

/// Explicit pipeline parameters; `base_flux` is derived when absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineParams {
    pub length: f64,
    pub diameter: f64,
    pub two_a: f64,
    pub sound_speed: f64,
    pub inlet_pressure: f64,
    pub outlet_pressure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_flux: Option<f64>,
}

/// Either a preset name or explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PipelineConfig {
    Preset(String),
    Explicit(PipelineParams),
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::Preset("paper-ref".into())
    }
}

impl PipelineConfig {
    pub fn resolve(&self) -> Result<PipelineSpec> {
        match self {
            PipelineConfig::Preset(name) => PipelineSpec::preset(name),
            PipelineConfig::Explicit(p) => PipelineSpec::new(
                p.length,
                p.diameter,
                p.two_a,
                p.sound_speed,
                p.inlet_pressure,
                p.outlet_pressure,
                p.base_flux,
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leak: Option<LeakScenario>,
    pub series: SeriesControl,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Resolves the pipeline and checks every section against it.
    pub fn validate(&self) -> Result<PipelineSpec> {
        let spec = self.pipeline.resolve()?;
        self.series.validate()?;
        if let Some(leak) = &self.leak {
            leak.validate(&spec).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(fd) = &self.fd {
            fd.validate(&spec)?;
        }
        if let Some(det) = &self.detection {
            det.resolve(&spec)?;
        }
        Ok(spec)
    }
}
