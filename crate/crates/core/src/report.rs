//! Per-scene JSON reports, CSV summaries and classification reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{names, EvaluationConfig};
use crate::fingerprint::{
    build_fingerprint, classify_scene, confusion, predict_from_metric, AxisLayout, ConfusionCounts, Fingerprint,
    FingerprintError, ThresholdCircle,
};
use crate::framework::{MetricGroup, SceneEvaluation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub name: String,
    pub group: MetricGroup,
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
}

/// JSON record of one scene. Undefined metrics stay `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub t: f64,
    pub axes: Vec<AxisReport>,
    pub area_total: f64,
    pub area_by_group: BTreeMap<MetricGroup, f64>,
    pub critical_prediction: bool,
    pub ground_truth: bool,
}

impl SceneReport {
    pub fn new(evaluation: &SceneEvaluation, fingerprint: &Fingerprint, circle: &ThresholdCircle, config: &EvaluationConfig) -> Self {
        let axes = fingerprint
            .axes
            .iter()
            .map(|a| AxisReport {
                name: a.name.clone(),
                group: a.group,
                raw: evaluation.raw(&a.name),
                normalized: evaluation.normalized(&a.name),
            })
            .collect();
        let fp = &config.fingerprint;
        Self {
            t: evaluation.t,
            axes,
            area_total: fingerprint.area_total,
            area_by_group: fingerprint.area_by_group.clone(),
            critical_prediction: fingerprint.area_total >= circle.area,
            ground_truth: classify_scene(evaluation, &fp.ground_truth, fp.ground_truth_threshold),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Builds fingerprints and reports for a batch of evaluations.
pub fn scene_reports(
    evaluations: &[SceneEvaluation],
    layout: &AxisLayout,
    circle: &ThresholdCircle,
    config: &EvaluationConfig,
) -> Vec<(Fingerprint, SceneReport)> {
    evaluations
        .iter()
        .map(|e| {
            let fp = build_fingerprint(e, layout);
            let report = SceneReport::new(e, &fp, circle, config);
            (fp, report)
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// CSV summary: one row per scene with raw and normalised values of every
/// axis, total area and group areas. Undefined values are written as `NA`.
pub fn write_summary_csv<W: Write>(reports: &[SceneReport], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let Some(first) = reports.first() else {
        w.flush()?;
        return Ok(());
    };
    let mut header = vec!["t".to_string()];
    for a in &first.axes {
        header.push(format!("{}_raw", a.name));
        header.push(format!("{}_norm", a.name));
    }
    header.push("area_total".into());
    header.extend(MetricGroup::ALL.iter().map(|g| format!("area_{g}")));
    header.push("critical_prediction".into());
    header.push("ground_truth".into());
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.t.to_string()];
        for a in &r.axes {
            row.push(cell(a.raw));
            row.push(cell(a.normalized));
        }
        row.push(r.area_total.to_string());
        row.extend(MetricGroup::ALL.iter().map(|g| cell(r.area_by_group.get(g).copied())));
        row.push(r.critical_prediction.to_string());
        row.push(r.ground_truth.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a classification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub candidate: String,
    pub counts: ConfusionCounts,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub critical: f64,
    pub non_critical: f64,
}

impl ClassificationRow {
    pub fn new(candidate: &str, counts: ConfusionCounts) -> Self {
        let critical = counts.critical_fraction();
        Self {
            candidate: candidate.to_string(),
            sensitivity: counts.sensitivity(),
            specificity: counts.specificity(),
            counts,
            critical,
            non_critical: counts.tn + counts.fp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub scenes: usize,
    pub ground_truth: Vec<String>,
    pub threshold: f64,
    pub rows: Vec<ClassificationRow>,
}

/// Candidate predictors compared against the ground truth.
pub const CANDIDATE_SP: &str = "SP";
pub const CANDIDATE_TQ_AREA: &str = "TQ_area";

/// Scores SP and the traffic-quality group area against the ground-truth
/// classification of each scene.
pub fn classification_report(
    evaluations: &[SceneEvaluation],
    fingerprints: &[Fingerprint],
    circle: &ThresholdCircle,
    config: &EvaluationConfig,
) -> Result<ClassificationReport, FingerprintError> {
    let fp = &config.fingerprint;
    let actual: Vec<bool> = evaluations.iter().map(|e| classify_scene(e, &fp.ground_truth, fp.ground_truth_threshold)).collect();
    let sp: Vec<bool> = evaluations.iter().map(|e| predict_from_metric(e, names::SP, fp.prediction_radius)).collect();
    let tq_limit = circle.area_by_group.get(&MetricGroup::TrafficQuality).copied().unwrap_or(0.0);
    let tq: Vec<bool> = fingerprints
        .iter()
        .map(|f| {
            let has_tq = f.axes.iter().any(|a| a.group == MetricGroup::TrafficQuality);
            has_tq && f.area_by_group.get(&MetricGroup::TrafficQuality).copied().unwrap_or(0.0) >= tq_limit
        })
        .collect();
    Ok(ClassificationReport {
        scenes: evaluations.len(),
        ground_truth: fp.ground_truth.clone(),
        threshold: fp.ground_truth_threshold,
        rows: vec![
            ClassificationRow::new(CANDIDATE_SP, confusion(&sp, &actual)?),
            ClassificationRow::new(CANDIDATE_TQ_AREA, confusion(&tq, &actual)?),
        ],
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

impl ClassificationReport {
    /// Plain-text table, one line per candidate.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "scenes: {}  ground truth: {} <= {} s\n{:<10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8}\n",
            self.scenes,
            self.ground_truth.join("/"),
            self.threshold,
            "candidate",
            "TP",
            "TN",
            "FP",
            "FN",
            "Sens",
            "Spec",
            "critical",
            "uncrit"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6} {:>6} {:>8.3} {:>8.3}\n",
                r.candidate,
                r.counts.tp,
                r.counts.tn,
                r.counts.fp,
                r.counts.fn_,
                fmt_opt(r.sensitivity),
                fmt_opt(r.specificity),
                r.critical,
                r.non_critical
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
