//! Kiviat fingerprint of a scene and its area-based criticality score.
//!
//! Each metric becomes one of `n` equally spaced axes with its normalised
//! value as radius. The polygon through the radii is the fingerprint; its
//! area relative to the all-ones polygon is the holistic score. Because
//! triangle terms couple neighbouring axes, the axis order is part of the
//! configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EvaluationConfig;
use crate::framework::{normalize, Direction, MetricDescriptor, MetricGroup, Registry, SceneEvaluation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FingerprintError {
    #[error("a Kiviat polygon needs at least 3 axes, got {0}")]
    TooFewAxes(usize),
    #[error("prediction and ground-truth lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no scenes to classify")]
    Empty,
    #[error("axis '{0}' is not a registered metric")]
    UnknownAxis(String),
}

/// Ordered axes of a fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisLayout {
    pub axes: Vec<(String, MetricGroup)>,
}

impl AxisLayout {
    pub fn new(axes: Vec<(String, MetricGroup)>) -> Result<Self, FingerprintError> {
        if axes.len() < 3 {
            return Err(FingerprintError::TooFewAxes(axes.len()));
        }
        Ok(Self { axes })
    }

    /// Layout following `order`, taking groups from the registry.
    pub fn from_registry(registry: &Registry, order: &[String]) -> Result<Self, FingerprintError> {
        let axes = order
            .iter()
            .map(|name| {
                registry
                    .descriptor(name)
                    .map(|d| (name.clone(), d.group))
                    .ok_or_else(|| FingerprintError::UnknownAxis(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes)
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub group: MetricGroup,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub t: f64,
    pub axes: Vec<Axis>,
    pub area_total: f64,
    pub area_by_group: BTreeMap<MetricGroup, f64>,
}

/// Area of the Kiviat polygon relative to the all-ones polygon,
/// i.e. `Σ rᵢ·rᵢ₊₁ / n` with cyclic indexing.
pub fn kiviat_area(radii: &[f64]) -> Result<f64, FingerprintError> {
    let n = radii.len();
    if n < 3 {
        return Err(FingerprintError::TooFewAxes(n));
    }
    let sum: f64 = (0..n).map(|i| radii[i] * radii[(i + 1) % n]).sum();
    Ok(sum / n as f64)
}

/// Unnormalised polygon area `½·sin(2π/n)·Σ rᵢ·rᵢ₊₁`.
pub fn kiviat_area_raw(radii: &[f64]) -> Result<f64, FingerprintError> {
    let n = radii.len();
    let rel = kiviat_area(radii)?;
    Ok(rel * 0.5 * n as f64 * (2.0 * std::f64::consts::PI / n as f64).sin())
}

fn group_area_of(axes: &[Axis], group: MetricGroup) -> f64 {
    let n = axes.len();
    if n < 3 {
        return 0.0;
    }
    let sum: f64 = (0..n)
        .filter(|&i| axes[i].group == group && axes[(i + 1) % n].group == group)
        .map(|i| axes[i].radius * axes[(i + 1) % n].radius)
        .fold(0.0, |acc, x| acc + x);
    sum / n as f64
}

/// Area of the triangles between neighbouring axes of one group, relative
/// to the full all-ones polygon. Triangles straddling two groups count for
/// neither.
pub fn group_area(fingerprint: &Fingerprint, group: MetricGroup) -> f64 {
    group_area_of(&fingerprint.axes, group)
}

/// Fingerprint of an evaluation; undefined metrics get radius 0.
pub fn build_fingerprint(evaluation: &SceneEvaluation, layout: &AxisLayout) -> Fingerprint {
    let axes: Vec<Axis> = layout
        .axes
        .iter()
        .map(|(name, group)| Axis { name: name.clone(), group: *group, radius: evaluation.normalized(name).unwrap_or(0.0) })
        .collect();
    let radii: Vec<f64> = axes.iter().map(|a| a.radius).collect();
    let area_total = kiviat_area(&radii).unwrap_or(0.0);
    let area_by_group = MetricGroup::ALL.iter().map(|&g| (g, group_area_of(&axes, g))).collect();
    Fingerprint { t: evaluation.t, axes, area_total, area_by_group }
}

/// Reference polygon marking the criticality boundary on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCircle {
    pub radii: Vec<f64>,
    pub area: f64,
    pub area_by_group: BTreeMap<MetricGroup, f64>,
}

/// Threshold radius of one axis: the normalised raw threshold for
/// decreasing metrics, a configured radius for increasing ones.
pub fn threshold_radius(descriptor: &MetricDescriptor, raw_threshold: f64, increasing_radius: f64) -> f64 {
    match descriptor.direction {
        Direction::DecreasingCriticality => normalize(Some(raw_threshold.max(0.0)), descriptor).ok().flatten().unwrap_or(0.0),
        Direction::IncreasingCriticality => increasing_radius,
    }
}

/// Threshold circle for a layout, with raw thresholds per metric.
pub fn threshold_circle(
    layout: &AxisLayout,
    descriptors: &[MetricDescriptor],
    thresholds: &BTreeMap<String, f64>,
    increasing_radius: f64,
) -> ThresholdCircle {
    let axes: Vec<Axis> = layout
        .axes
        .iter()
        .map(|(name, group)| {
            let radius = descriptors
                .iter()
                .find(|d| &d.name == name)
                .map_or(0.0, |d| threshold_radius(d, thresholds.get(name).copied().unwrap_or(1.5), increasing_radius));
            Axis { name: name.clone(), group: *group, radius }
        })
        .collect();
    let radii: Vec<f64> = axes.iter().map(|a| a.radius).collect();
    ThresholdCircle {
        area: kiviat_area(&radii).unwrap_or(0.0),
        area_by_group: MetricGroup::ALL.iter().map(|&g| (g, group_area_of(&axes, g))).collect(),
        radii,
    }
}

/// Threshold circle built from a registry and the configured thresholds.
pub fn threshold_circle_for(registry: &Registry, layout: &AxisLayout, config: &EvaluationConfig) -> ThresholdCircle {
    let descriptors: Vec<MetricDescriptor> = registry.descriptors().cloned().collect();
    let thresholds = config.metrics.iter().map(|(k, v)| (k.clone(), v.threshold)).collect();
    threshold_circle(layout, &descriptors, &thresholds, config.fingerprint.increasing_threshold_radius)
}

/// Ground truth: critical when any selected metric is defined with a raw
/// value at or below `threshold_raw`.
pub fn classify_scene(evaluation: &SceneEvaluation, ground_truth: &[String], threshold_raw: f64) -> bool {
    ground_truth.iter().any(|m| evaluation.raw(m).is_some_and(|v| v <= threshold_raw))
}

/// Candidate prediction: critical when the normalised value reaches `radius_threshold`.
pub fn predict_from_metric(evaluation: &SceneEvaluation, metric: &str, radius_threshold: f64) -> bool {
    evaluation.normalized(metric).is_some_and(|v| v >= radius_threshold)
}

/// Confusion-matrix entries as fractions of all scenes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl ConfusionCounts {
    /// Builds counts from fractions, rescaling so that they sum to 1.
    pub fn from_fractions(tp: f64, tn: f64, fp: f64, fn_: f64) -> Self {
        let total = tp + tn + fp + fn_;
        Self { tp: tp / total, tn: tn / total, fp: fp / total, fn_: fn_ / total }
    }

    /// True-positive rate; undefined without actual positives.
    pub fn sensitivity(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0.0).then(|| self.tp / d)
    }

    /// True-negative rate; undefined without actual negatives.
    pub fn specificity(&self) -> Option<f64> {
        let d = self.tn + self.fp;
        (d > 0.0).then(|| self.tn / d)
    }

    pub fn critical_fraction(&self) -> f64 {
        self.tp + self.fn_
    }
}

pub fn confusion(predicted: &[bool], actual: &[bool]) -> Result<ConfusionCounts, FingerprintError> {
    if predicted.len() != actual.len() {
        return Err(FingerprintError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(FingerprintError::Empty);
    }
    let mut c = [0usize; 4];
    for (&p, &a) in predicted.iter().zip(actual) {
        let idx = match (p, a) {
            (true, true) => 0,
            (false, false) => 1,
            (true, false) => 2,
            (false, true) => 3,
        };
        c[idx] += 1;
    }
    let n = predicted.len() as f64;
    Ok(ConfusionCounts { tp: c[0] as f64 / n, tn: c[1] as f64 / n, fp: c[2] as f64 / n, fn_: c[3] as f64 / n })
}
