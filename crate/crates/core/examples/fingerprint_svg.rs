//! Fingerprints of a critical and an uncritical scene, drawn together in
//! one radar chart with the threshold circle.
//!
//! `cargo run --example fingerprint_svg [out.svg]` (default: fingerprints.svg).

use std::error::Error;

use traffic_fingerprint::fingerprint::{build_fingerprint, group_area, threshold_circle_for, AxisLayout};
use traffic_fingerprint::framework::MetricGroup;
use traffic_fingerprint::{standard_registry, svg, synthetic, EvaluationConfig, Evaluator};

fn main() -> Result<(), Box<dyn Error>> {
    let cfg = EvaluationConfig::default();
    let registry = standard_registry(&cfg);
    let layout = AxisLayout::from_registry(&registry, &cfg.fingerprint.axis_order)?;
    let circle = threshold_circle_for(&registry, &layout, &cfg);

    let critical = synthetic::following_scenario(20.0, 5.0, 30.0, 4.0, 0.1)?;
    let calm = synthetic::sparse_scenario(3, 250.0, 10.0, 4.0, 0.1)?;
    let a = build_fingerprint(&Evaluator::new(&critical, &registry, &cfg).evaluate(1.0)?, &layout);
    let b = build_fingerprint(&Evaluator::new(&calm, &registry, &cfg).evaluate(1.0)?, &layout);

    println!("threshold circle area {:.4}", circle.area);
    for (label, fp) in [("critical", &a), ("uncritical", &b)] {
        println!("{label:>10}: area {:.4}", fp.area_total);
        for g in MetricGroup::ALL {
            println!("{:>12} {g}: {:.4}", "", group_area(fp, g));
        }
    }

    let path = std::env::args().nth(1).unwrap_or_else(|| "fingerprints.svg".into());
    std::fs::write(&path, svg::render_overlay(&[&a, &b], Some(&circle), "critical vs uncritical"))?;
    println!("chart written to {path}");
    Ok(())
}
