//! Sensitivity and specificity of candidate predictors: first from
//! published confusion fractions, then from a synthetic scene batch.

use std::error::Error;

use traffic_fingerprint::fingerprint::{build_fingerprint, threshold_circle_for, AxisLayout, ConfusionCounts};
use traffic_fingerprint::report::{classification_report, ClassificationReport, ClassificationRow};
use traffic_fingerprint::{standard_registry, synthetic, EvaluationConfig, Evaluator};

fn main() -> Result<(), Box<dyn Error>> {
    let published = ClassificationReport {
        scenes: 0,
        ground_truth: vec!["TTC".into(), "PET".into()],
        threshold: 1.5,
        rows: vec![
            ClassificationRow::new("SP", ConfusionCounts::from_fractions(0.11, 0.48, 0.25, 0.16)),
            ClassificationRow::new("TQ_area", ConfusionCounts::from_fractions(0.23, 0.21, 0.52, 0.04)),
        ],
    };
    println!("intersection counts:\n{}", published.to_text());

    let cfg = EvaluationConfig::default();
    let registry = standard_registry(&cfg);
    let layout = AxisLayout::from_registry(&registry, &cfg.fingerprint.axis_order)?;
    let circle = threshold_circle_for(&registry, &layout, &cfg);
    let scenario = synthetic::following_scenario(18.0, 6.0, 40.0, 4.0, 0.1)?;
    let evals = Evaluator::new(&scenario, &registry, &cfg).evaluate_many(&scenario.frame_times())?;
    let fps: Vec<_> = evals.iter().map(|e| build_fingerprint(e, &layout)).collect();
    let report = classification_report(&evals, &fps, &circle, &cfg)?;
    println!("synthetic approach:\n{}", report.to_text());
    Ok(())
}
