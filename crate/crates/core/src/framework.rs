//! Metric contract, normalisation, aggregation and scene evaluation.
//!
//! A metric produces raw values at scene, pair or agent scope. The
//! framework normalises every raw value onto [0, 1] (1 = critical) and
//! reduces pair/agent values to one scene value with the metric's
//! permutation-invariant aggregation.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EvaluationConfig;
use crate::pairwise::{self, ConflictZone};
use crate::safety_potential::{claimed_set_with_path, ClaimedSet, TrackPath};
use crate::scene::{AgentId, AgentState, Scenario, Scene, SceneError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric {name}: raw value {raw} is negative")]
    NegativeRaw { name: String, raw: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricGroup {
    TrafficQuality,
    Intersection,
    Universal,
    Following,
}

impl MetricGroup {
    pub const ALL: [MetricGroup; 4] =
        [MetricGroup::TrafficQuality, MetricGroup::Intersection, MetricGroup::Universal, MetricGroup::Following];
}

impl fmt::Display for MetricGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetricGroup::TrafficQuality => "TrafficQuality",
            MetricGroup::Intersection => "Intersection",
            MetricGroup::Universal => "Universal",
            MetricGroup::Following => "Following",
        };
        f.write_str(s)
    }
}

/// Whether small or large raw values indicate criticality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Small raw = critical (times, distances). Mapped through e^(−α·x).
    DecreasingCriticality,
    /// Large raw = critical, already on [0, 1]. Clamped.
    IncreasingCriticality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub group: MetricGroup,
    pub direction: Direction,
    /// Sensitivity of the exponential normalisation; > 0.
    pub alpha: f64,
    pub aggregation: Aggregation,
}

impl MetricDescriptor {
    pub fn new(name: &str, group: MetricGroup, direction: Direction) -> Self {
        Self { name: name.to_owned(), group, direction, alpha: 1.0, aggregation: Aggregation::Max }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Scene,
    Pair(AgentId, AgentId),
    Agent(AgentId),
}

/// One raw result of a metric before normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopedValue {
    pub scope: Scope,
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub descriptor: MetricDescriptor,
    pub scope: Scope,
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
}

/// Maps a raw metric value onto [0, 1] where 1 is critical.
pub fn normalize(raw: Option<f64>, descriptor: &MetricDescriptor) -> Result<Option<f64>, MetricError> {
    let Some(x) = raw else { return Ok(None) };
    if x < 0.0 {
        return Err(MetricError::NegativeRaw { name: descriptor.name.clone(), raw: x });
    }
    Ok(Some(match descriptor.direction {
        Direction::DecreasingCriticality => (-descriptor.alpha * x).exp(),
        Direction::IncreasingCriticality => x.clamp(0.0, 1.0),
    }))
}

/// Permutation-invariant reduction; undefined for an empty list.
pub fn aggregate(values: &[f64], how: Aggregation) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(match how {
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        // sort first so the floating-point sum does not depend on input order
        Aggregation::Mean => {
            let mut v = values.to_vec();
            v.sort_by(f64::total_cmp);
            v.iter().sum::<f64>() / v.len() as f64
        }
    })
}

/// A criticality metric evaluated on one scene.
pub trait Metric: Send + Sync {
    fn descriptor(&self) -> &MetricDescriptor;

    /// Raw values at any scope. Unsupported situations yield `None` raws
    /// or no entries at all.
    fn evaluate(&self, ctx: &SceneContext<'_>) -> Vec<(Scope, Option<f64>)>;
}

/// Ordered collection of metrics.
pub struct Registry {
    metrics: Vec<Box<dyn Metric>>,
}

impl Registry {
    pub fn new(metrics: Vec<Box<dyn Metric>>) -> Self {
        Self { metrics }
    }

    /// Appends a metric; a metric with the same name is replaced.
    pub fn push(&mut self, metric: Box<dyn Metric>) {
        let name = metric.descriptor().name.clone();
        self.metrics.retain(|m| m.descriptor().name != name);
        self.metrics.push(metric);
    }

    pub fn metrics(&self) -> &[Box<dyn Metric>] {
        &self.metrics
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &MetricDescriptor> {
        self.metrics.iter().map(|m| m.descriptor())
    }

    pub fn descriptor(&self, name: &str) -> Option<&MetricDescriptor> {
        self.descriptors().find(|d| d.name == name)
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.descriptors().map(|d| &d.name)).finish()
    }
}

/// Outcome of evaluating every registered metric on one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEvaluation {
    pub t: f64,
    /// Scene-level value of every registered metric.
    pub values: BTreeMap<String, MetricValue>,
    /// Pair/agent-level values behind each scene value.
    pub details: BTreeMap<String, Vec<ScopedValue>>,
}

impl SceneEvaluation {
    pub fn value(&self, name: &str) -> Option<&MetricValue> {
        self.values.get(name)
    }

    pub fn raw(&self, name: &str) -> Option<f64> {
        self.values.get(name).and_then(|v| v.raw)
    }

    pub fn normalized(&self, name: &str) -> Option<f64> {
        self.values.get(name).and_then(|v| v.normalized)
    }
}

/// Scenario-level PET/ET of one pair, computed from the complete recording.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHistory {
    pub zone: ConflictZone,
    pub pet: Option<f64>,
    pub et: Option<f64>,
}

/// Per-scenario data shared by all scene evaluations.
pub struct ScenarioIndex<'a> {
    scenario: &'a Scenario,
    paths: BTreeMap<AgentId, TrackPath>,
    recorded: BTreeMap<AgentId, crate::geometry::Polyline>,
    histories: RwLock<HashMap<(AgentId, AgentId), Option<Arc<PairHistory>>>>,
}

impl<'a> ScenarioIndex<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let paths = scenario.tracks().iter().map(|(id, tr)| (id.clone(), TrackPath::new(tr))).collect();
        let recorded = scenario.tracks().iter().map(|(id, tr)| (id.clone(), pairwise::recorded_path(tr))).collect();
        Self { scenario, paths, recorded, histories: RwLock::new(HashMap::new()) }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    /// PET/ET of a pair over the whole recording; `a < b` by id.
    pub fn pair_history(&self, a: &AgentId, b: &AgentId) -> Option<Arc<PairHistory>> {
        let key = (a.clone(), b.clone());
        if let Some(h) = self.histories.read().expect("history lock").get(&key) {
            return h.clone();
        }
        let computed = self.compute_history(a, b).map(Arc::new);
        self.histories.write().expect("history lock").entry(key).or_insert(computed).clone()
    }

    fn compute_history(&self, a: &AgentId, b: &AgentId) -> Option<PairHistory> {
        let (ta, tb) = (self.scenario.track(a)?, self.scenario.track(b)?);
        let zone = pairwise::zone_from_paths(ta.states().first()?, &self.recorded[a], tb.states().first()?, &self.recorded[b])?;
        let pa = pairwise::zone_passage(ta, &zone);
        let pb = pairwise::zone_passage(tb, &zone);
        let (pet, et) = match (pa, pb) {
            (Some(pa), Some(pb)) => {
                let (first, second) = pairwise::order_passages((a, pa), (b, pb));
                (Some(pairwise::pet_from_passages(first.1, second.1)), Some(first.1.t_exit - first.1.t_enter))
            }
            _ => (None, None),
        };
        Some(PairHistory { zone, pet, et })
    }
}

/// Everything a metric may look at for one scene, with lazily shared
/// intermediate results.
pub struct SceneContext<'a> {
    pub index: &'a ScenarioIndex<'a>,
    pub scene: Scene,
    pub config: &'a EvaluationConfig,
    claimed: OnceCell<BTreeMap<AgentId, ClaimedSet>>,
    zones: OnceCell<BTreeMap<(AgentId, AgentId), ConflictZone>>,
}

impl<'a> SceneContext<'a> {
    pub fn new(index: &'a ScenarioIndex<'a>, scene: Scene, config: &'a EvaluationConfig) -> Self {
        Self { index, scene, config, claimed: OnceCell::new(), zones: OnceCell::new() }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.index.scenario
    }

    /// Agents considered by vehicle-only metrics.
    pub fn vehicle_scene(&self) -> Scene {
        if self.config.scene.include_vrus {
            self.scene.clone()
        } else {
            self.scene.vehicles_only()
        }
    }

    /// Unordered agent pairs of the scene, ordered by id.
    pub fn pairs(&self) -> Vec<(&AgentState, &AgentState)> {
        let s = &self.scene.states;
        let mut out = Vec::with_capacity(s.len() * s.len().saturating_sub(1) / 2);
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let (a, b) = (&s[i], &s[j]);
                out.push(if a.agent_id <= b.agent_id { (a, b) } else { (b, a) });
            }
        }
        out
    }

    /// Claimed sets of the vehicle agents at the scene time.
    pub fn claimed_sets(&self) -> &BTreeMap<AgentId, ClaimedSet> {
        self.claimed.get_or_init(|| {
            let params = &self.config.safety;
            self.vehicle_scene()
                .states
                .iter()
                .filter_map(|s| {
                    let track = self.scenario().track(&s.agent_id)?;
                    let path = self.index.paths.get(&s.agent_id)?;
                    claimed_set_with_path(track, path, self.scene.t, params).map(|c| (s.agent_id.clone(), c))
                })
                .collect()
        })
    }

    /// Conflict zones of the future paths of every crossing pair.
    pub fn forward_zones(&self) -> &BTreeMap<(AgentId, AgentId), ConflictZone> {
        self.zones.get_or_init(|| {
            let horizon = self.config.pairwise.zone_horizon;
            let paths: BTreeMap<&AgentId, _> = self
                .scene
                .states
                .iter()
                .filter_map(|s| {
                    let tr = self.scenario().track(&s.agent_id)?;
                    Some((&s.agent_id, pairwise::future_path(tr, self.scene.t, horizon)?))
                })
                .collect();
            let mut out = BTreeMap::new();
            for (a, b) in self.pairs() {
                let (Some(pa), Some(pb)) = (paths.get(&a.agent_id), paths.get(&b.agent_id)) else { continue };
                if let Some(z) = pairwise::zone_from_paths(a, pa, b, pb) {
                    out.insert((a.agent_id.clone(), b.agent_id.clone()), z);
                }
            }
            out
        })
    }
}

/// Reduces scoped values to one scene value. For max/min the reported raw
/// is the raw of the entry holding the extreme normalised value.
fn reduce(descriptor: &MetricDescriptor, scoped: &[ScopedValue]) -> (Option<f64>, Option<f64>) {
    let defined: Vec<(f64, f64)> = scoped.iter().filter_map(|v| Some((v.raw?, v.normalized?))).collect();
    if defined.is_empty() {
        return (None, None);
    }
    let norms: Vec<f64> = defined.iter().map(|d| d.1).collect();
    let agg = aggregate(&norms, descriptor.aggregation);
    match descriptor.aggregation {
        Aggregation::Mean => {
            let raws: Vec<f64> = defined.iter().map(|d| d.0).collect();
            (aggregate(&raws, Aggregation::Mean), agg)
        }
        Aggregation::Max | Aggregation::Min => {
            let target = agg.expect("non-empty");
            let raw = defined.iter().find(|d| d.1 == target).map(|d| d.0);
            (raw, agg)
        }
    }
}

/// Evaluates a registry on scenes of one scenario.
pub struct Evaluator<'a> {
    index: ScenarioIndex<'a>,
    registry: &'a Registry,
    config: &'a EvaluationConfig,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario, registry: &'a Registry, config: &'a EvaluationConfig) -> Self {
        Self { index: ScenarioIndex::new(scenario), registry, config }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.index.scenario
    }

    pub fn evaluate(&self, t: f64) -> Result<SceneEvaluation, SceneError> {
        let scene = self.index.scenario.scene_at(t)?;
        let t = scene.t;
        let ctx = SceneContext::new(&self.index, scene, self.config);
        let mut values = BTreeMap::new();
        let mut details = BTreeMap::new();
        for metric in self.registry.metrics() {
            let d = metric.descriptor();
            let mut scoped: Vec<ScopedValue> = metric
                .evaluate(&ctx)
                .into_iter()
                .map(|(scope, raw)| {
                    // a negative raw is a metric bug; keep the scene evaluable
                    let normalized = normalize(raw, d).ok().flatten();
                    ScopedValue { scope, raw: normalized.and(raw), normalized }
                })
                .collect();
            scoped.sort_by(|x, y| x.scope.cmp(&y.scope));
            let (raw, normalized) = reduce(d, &scoped);
            values.insert(d.name.clone(), MetricValue { descriptor: d.clone(), scope: Scope::Scene, raw, normalized });
            details.insert(d.name.clone(), scoped);
        }
        Ok(SceneEvaluation { t, values, details })
    }

    /// Evaluates many scenes in parallel; results follow the order of `times`.
    pub fn evaluate_many(&self, times: &[f64]) -> Result<Vec<SceneEvaluation>, SceneError> {
        times.par_iter().map(|&t| self.evaluate(t)).collect()
    }
}

/// Evaluates one scene of a scenario.
pub fn evaluate_scene(
    scenario: &Scenario,
    t: f64,
    registry: &Registry,
    config: &EvaluationConfig,
) -> Result<SceneEvaluation, SceneError> {
    Evaluator::new(scenario, registry, config).evaluate(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec() -> MetricDescriptor {
        MetricDescriptor::new("TTC", MetricGroup::Following, Direction::DecreasingCriticality)
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(Some(0.0), &dec()).unwrap(), Some(1.0));
        assert_eq!(normalize(None, &dec()).unwrap(), None);
        assert!((normalize(Some(1.5), &dec()).unwrap().unwrap() - 0.22313016014842982).abs() < 1e-12);
        let inc = MetricDescriptor::new("TQ_nano", MetricGroup::TrafficQuality, Direction::IncreasingCriticality);
        assert_eq!(normalize(Some(1.4091), &inc).unwrap(), Some(1.0));
        assert!(matches!(normalize(Some(-0.1), &dec()), Err(MetricError::NegativeRaw { .. })));
    }

    #[test]
    fn alpha_changes_sensitivity() {
        let d = MetricDescriptor { alpha: 2.0, ..dec() };
        assert!((normalize(Some(1.0), &d).unwrap().unwrap() - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[0.2, 0.5], Aggregation::Max), Some(0.5));
        assert!((aggregate(&[0.2, 0.5], Aggregation::Mean).unwrap() - 0.35).abs() < 1e-15);
        assert_eq!(aggregate(&[0.2, 0.5], Aggregation::Min), Some(0.2));
        assert_eq!(aggregate(&[], Aggregation::Max), None);
        assert_eq!(aggregate(&[], Aggregation::Mean), None);
    }

    #[test]
    fn reduce_reports_raw_of_extreme_entry() {
        let d = dec();
        let scoped = vec![
            ScopedValue { scope: Scope::Agent("1".into()), raw: Some(3.0), normalized: normalize(Some(3.0), &d).unwrap() },
            ScopedValue { scope: Scope::Agent("2".into()), raw: Some(0.5), normalized: normalize(Some(0.5), &d).unwrap() },
            ScopedValue { scope: Scope::Agent("3".into()), raw: None, normalized: None },
        ];
        let (raw, norm) = reduce(&d, &scoped);
        assert_eq!(raw, Some(0.5));
        assert_eq!(norm, Some((-0.5f64).exp()));
        assert_eq!(reduce(&d, &scoped[2..]), (None, None));
    }
}
