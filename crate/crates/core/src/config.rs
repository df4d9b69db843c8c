//! Evaluation configuration, read from a sectioned TOML file.
//!
//! Every numeric default lives here so that the dumped effective
//! configuration fully describes a run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{Aggregation, MetricDescriptor, MetricGroup};
use crate::pairwise::PairwiseConfig;
use crate::safety_potential::SafetyProcedureParams;
use crate::tracks_csv::TrackSchema;
use crate::traffic_quality::TqConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Standard metric names.
pub mod names {
    pub const TQ_MACRO: &str = "TQ_macro";
    pub const TQ_MICRO: &str = "TQ_micro";
    pub const TQ_NANO: &str = "TQ_nano";
    pub const TQ_INDI: &str = "TQ_indi";
    pub const TJ: &str = "TJ";
    pub const GT: &str = "GT";
    pub const ET: &str = "ET";
    pub const PET: &str = "PET";
    pub const SP: &str = "SP";
    pub const WTTC: &str = "WTTC";
    pub const DIST: &str = "Dist";
    pub const TTC: &str = "TTC";

    /// Default axis order: groups contiguous.
    pub const DEFAULT_ORDER: [&str; 12] =
        [TQ_MACRO, TQ_MICRO, TQ_NANO, TQ_INDI, TJ, GT, ET, PET, SP, WTTC, DIST, TTC];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Include pedestrians and bicycles in vehicle-only metrics (TQ, SP).
    pub include_vrus: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self { include_vrus: false }
    }
}

/// Per-metric switches and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub enabled: bool,
    pub alpha: f64,
    pub aggregation: Aggregation,
    /// Raw criticality threshold used for the threshold circle (decreasing metrics).
    pub threshold: f64,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self { enabled: true, alpha: 1.0, aggregation: Aggregation::Max, threshold: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FingerprintConfig {
    pub axis_order: Vec<String>,
    /// Threshold-circle radius on axes of increasing metrics.
    pub increasing_threshold_radius: f64,
    /// Metrics whose raw values decide ground-truth criticality.
    pub ground_truth: Vec<String>,
    /// Raw threshold (s) below or at which a ground-truth metric marks a scene critical.
    pub ground_truth_threshold: f64,
    /// Normalised value at or above which a candidate metric predicts criticality.
    pub prediction_radius: f64,
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        Self {
            axis_order: names::DEFAULT_ORDER.iter().map(|s| s.to_string()).collect(),
            increasing_threshold_radius: (-1.5f64).exp(),
            ground_truth: vec![names::TTC.into(), names::PET.into()],
            ground_truth_threshold: 1.5,
            prediction_radius: (-1.5f64).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    /// Name of the track schema (built-in or from `[schemas]`).
    pub schema: String,
    /// Worker threads for scene evaluation; 0 picks the number of cores.
    pub workers: usize,
    pub formats: Vec<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { schema: "interaction".into(), workers: 0, formats: vec!["json".into(), "csv".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    pub run: RunSection,
    pub scene: SceneConfig,
    pub pairwise: PairwiseConfig,
    pub tq: TqConfig,
    pub safety: SafetyProcedureParams,
    pub fingerprint: FingerprintConfig,
    pub metrics: BTreeMap<String, MetricSettings>,
    pub schemas: BTreeMap<String, TrackSchema>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            run: RunSection::default(),
            scene: SceneConfig::default(),
            pairwise: PairwiseConfig::default(),
            tq: TqConfig::default(),
            safety: SafetyProcedureParams::default(),
            fingerprint: FingerprintConfig::default(),
            metrics: names::DEFAULT_ORDER.iter().map(|n| (n.to_string(), MetricSettings::default())).collect(),
            schemas: BTreeMap::new(),
        }
    }
}

impl EvaluationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: EvaluationConfig = toml::from_str(text)?;
        // metrics missing from a partial file keep their defaults
        for n in names::DEFAULT_ORDER {
            cfg.metrics.entry(n.to_string()).or_default();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn metric(&self, name: &str) -> MetricSettings {
        self.metrics.get(name).cloned().unwrap_or_default()
    }

    /// Applies the per-metric α and aggregation overrides to a descriptor.
    pub fn configure(&self, mut d: MetricDescriptor) -> MetricDescriptor {
        let s = self.metric(&d.name);
        d.alpha = s.alpha;
        d.aggregation = s.aggregation;
        d
    }

    pub fn schema(&self) -> Result<TrackSchema, ConfigError> {
        let name = &self.run.schema;
        self.schemas
            .get(name)
            .cloned()
            .or_else(|| TrackSchema::builtin(name))
            .ok_or_else(|| ConfigError::Invalid(format!("unknown schema '{name}'")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        for (name, m) in &self.metrics {
            if !(m.alpha > 0.0) {
                return invalid(format!("metrics.{name}.alpha must be > 0"));
            }
            if !(m.threshold >= 0.0) {
                return invalid(format!("metrics.{name}.threshold must be >= 0"));
            }
        }
        let tq = &self.tq;
        if [tq.a_brake, tq.t_react, tq.nu_ref, tq.a_ref, tq.window, tq.eps_speed].iter().any(|v| !(*v > 0.0)) {
            return invalid("all [tq] values must be > 0".into());
        }
        self.safety.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.pairwise.zone_horizon > 0.0 && self.pairwise.lateral_gate > 0.0 && self.pairwise.heading_gate_deg > 0.0) {
            return invalid("all [pairwise] values must be > 0".into());
        }
        let fp = &self.fingerprint;
        if fp.axis_order.len() < 3 {
            return invalid("fingerprint.axis_order needs at least 3 axes".into());
        }
        if let Some(unknown) = fp.axis_order.iter().chain(&fp.ground_truth).find(|n| !self.metrics.contains_key(*n)) {
            return invalid(format!("unknown metric '{unknown}'"));
        }
        if !(0.0..=1.0).contains(&fp.increasing_threshold_radius) || !(0.0..=1.0).contains(&fp.prediction_radius) {
            return invalid("fingerprint radii must lie in [0, 1]".into());
        }
        if self.run.formats.is_empty() {
            return invalid("run.formats must name at least one format".into());
        }
        if let Some(f) = self.run.formats.iter().find(|f| !matches!(f.as_str(), "json" | "svg" | "csv")) {
            return invalid(format!("unknown output format '{f}'"));
        }
        self.schema()?;
        Ok(())
    }

    /// Group of a standard metric.
    pub fn group_of(name: &str) -> Option<MetricGroup> {
        use names::*;
        Some(match name {
            TQ_MACRO | TQ_MICRO | TQ_NANO | TQ_INDI => MetricGroup::TrafficQuality,
            TJ | GT | ET | PET => MetricGroup::Intersection,
            SP | WTTC | DIST => MetricGroup::Universal,
            TTC => MetricGroup::Following,
            _ => return None,
        })
    }
}
