//! Registering an extra metric next to the standard set. The example adds
//! the smallest lateral clearance between any two agents.

use traffic_fingerprint::framework::{Direction, Metric, MetricDescriptor, MetricGroup, SceneContext, Scope};
use traffic_fingerprint::metrics::standard_descriptor;
use traffic_fingerprint::{standard_registry, synthetic, EvaluationConfig, Evaluator};

struct LateralClearance {
    descriptor: MetricDescriptor,
}

impl Metric for LateralClearance {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn evaluate(&self, ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
        ctx.pairs()
            .into_iter()
            .map(|(a, b)| {
                let lateral = a.direction().cross(b.position - a.position).abs();
                let clearance = (lateral - (a.width + b.width) / 2.0).max(0.0);
                (Scope::Pair(a.agent_id.clone(), b.agent_id.clone()), Some(clearance))
            })
            .collect()
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = EvaluationConfig::default();
    let ttc = standard_descriptor("TTC", &cfg).expect("standard metric");
    println!("standard TTC descriptor: {ttc:?}");

    let mut registry = standard_registry(&cfg);
    registry.push(Box::new(LateralClearance {
        descriptor: MetricDescriptor::new("LatClear", MetricGroup::Universal, Direction::DecreasingCriticality),
    }));

    let scenario = synthetic::dense_traffic_scenario(8, 30, 0.1)?;
    let eval = Evaluator::new(&scenario, &registry, &cfg).evaluate(1.0)?;
    for (name, v) in &eval.values {
        println!("{name:>9}: raw {:>10} normalised {:>8}", fmt(v.raw), fmt(v.normalized));
    }
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
}
