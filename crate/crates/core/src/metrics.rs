//! The standard metric set, bound to the [`Metric`] contract.

use crate::config::{names, EvaluationConfig};
use crate::framework::{Direction, Metric, MetricDescriptor, MetricGroup, Registry, SceneContext, Scope};
use crate::pairwise;
use crate::safety_potential::{safety_potential_from_sets, ClaimedSet};
use crate::traffic_quality as tq;

type Eval = fn(&SceneContext<'_>) -> Vec<(Scope, Option<f64>)>;

struct FnMetric {
    descriptor: MetricDescriptor,
    eval: Eval,
}

impl Metric for FnMetric {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn evaluate(&self, ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
        (self.eval)(ctx)
    }
}

fn tq_macro(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    vec![(Scope::Scene, tq::tq_macro(&ctx.vehicle_scene(), &ctx.config.tq))]
}

fn per_vehicle(ctx: &SceneContext<'_>, f: impl Fn(&crate::scene::Scene, &crate::scene::AgentState) -> Option<f64>) -> Vec<(Scope, Option<f64>)> {
    let scene = ctx.vehicle_scene();
    scene.states.iter().map(|s| (Scope::Agent(s.agent_id.clone()), f(&scene, s))).collect()
}

fn tq_micro(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    per_vehicle(ctx, |scene, s| tq::tq_micro(scene, &s.agent_id, &ctx.config.tq))
}

fn tq_nano(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    per_vehicle(ctx, |scene, s| tq::tq_nano(scene, &s.agent_id, &ctx.config.tq))
}

fn tq_indi(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    per_vehicle(ctx, |scene, s| ctx.scenario().track(&s.agent_id).and_then(|tr| tq::tq_indi(tr, scene.t, &ctx.config.tq)))
}

fn trajectory_distance(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    ctx.forward_zones()
        .iter()
        .map(|((a, b), z)| {
            let tj = pairwise::trajectory_distance(z, pairwise::ZoneSide::A).max(pairwise::trajectory_distance(z, pairwise::ZoneSide::B));
            (Scope::Pair(a.clone(), b.clone()), Some(tj))
        })
        .collect()
}

fn gap_time(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    ctx.forward_zones()
        .iter()
        .map(|((a, b), z)| {
            let gt = match (ctx.scene.get(a), ctx.scene.get(b)) {
                (Some(sa), Some(sb)) => pairwise::gap_time(sa, sb, z),
                _ => None,
            };
            (Scope::Pair(a.clone(), b.clone()), gt)
        })
        .collect()
}

fn history(ctx: &SceneContext<'_>, pick: fn(&crate::framework::PairHistory) -> Option<f64>) -> Vec<(Scope, Option<f64>)> {
    ctx.pairs()
        .into_iter()
        .filter_map(|(a, b)| {
            let h = ctx.index.pair_history(&a.agent_id, &b.agent_id)?;
            Some((Scope::Pair(a.agent_id.clone(), b.agent_id.clone()), pick(&h)))
        })
        .collect()
}

fn encroachment_time(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    history(ctx, |h| h.et)
}

fn post_encroachment_time(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    history(ctx, |h| h.pet)
}

fn safety_potential(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    let sets: Vec<ClaimedSet> = ctx.claimed_sets().values().cloned().collect();
    safety_potential_from_sets(&sets, &ctx.config.safety)
        .per_agent
        .into_iter()
        .map(|(id, v)| (Scope::Agent(id), Some(v)))
        .collect()
}

fn wttc(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    ctx.pairs()
        .into_iter()
        .map(|(a, b)| (Scope::Pair(a.agent_id.clone(), b.agent_id.clone()), pairwise::wttc(a, b)))
        .collect()
}

fn distance(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    ctx.pairs()
        .into_iter()
        .map(|(a, b)| (Scope::Pair(a.agent_id.clone(), b.agent_id.clone()), Some(pairwise::euclidean_distance(a, b))))
        .collect()
}

fn ttc(ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)> {
    let cfg = &ctx.config.pairwise;
    ctx.pairs()
        .into_iter()
        .filter_map(|(a, b)| {
            let (f, l) = pairwise::leader_follower(a, b, cfg.lateral_gate, cfg.heading_gate_deg.to_radians())?;
            Some((Scope::Pair(f.agent_id.clone(), l.agent_id.clone()), pairwise::ttc(f, l)))
        })
        .collect()
}

fn standard(name: &str) -> Option<(MetricDescriptor, Eval)> {
    use names::*;
    use Direction::*;
    use MetricGroup::*;
    let (group, direction, eval): (MetricGroup, Direction, Eval) = match name {
        TQ_MACRO => (TrafficQuality, IncreasingCriticality, tq_macro),
        TQ_MICRO => (TrafficQuality, IncreasingCriticality, tq_micro),
        TQ_NANO => (TrafficQuality, IncreasingCriticality, tq_nano),
        TQ_INDI => (TrafficQuality, IncreasingCriticality, tq_indi),
        TJ => (Intersection, DecreasingCriticality, trajectory_distance),
        GT => (Intersection, DecreasingCriticality, gap_time),
        ET => (Intersection, DecreasingCriticality, encroachment_time),
        PET => (Intersection, DecreasingCriticality, post_encroachment_time),
        SP => (Universal, IncreasingCriticality, safety_potential),
        WTTC => (Universal, DecreasingCriticality, wttc),
        DIST => (Universal, DecreasingCriticality, distance),
        TTC => (Following, DecreasingCriticality, ttc),
        _ => return None,
    };
    Some((MetricDescriptor::new(name, group, direction), eval))
}

/// Descriptor of a standard metric with configured α and aggregation.
pub fn standard_descriptor(name: &str, config: &EvaluationConfig) -> Option<MetricDescriptor> {
    standard(name).map(|(d, _)| config.configure(d))
}

/// One standard metric with configured α and aggregation.
pub fn standard_metric(name: &str, config: &EvaluationConfig) -> Option<Box<dyn Metric>> {
    standard(name).map(|(d, eval)| Box::new(FnMetric { descriptor: config.configure(d), eval }) as Box<dyn Metric>)
}

/// Registry of all enabled standard metrics, in default axis order.
pub fn standard_registry(config: &EvaluationConfig) -> Registry {
    let metrics = names::DEFAULT_ORDER
        .iter()
        .filter(|n| config.metric(n).enabled)
        .filter_map(|n| standard_metric(n, config))
        .collect();
    Registry::new(metrics)
}
