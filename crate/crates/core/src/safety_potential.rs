//! Safety potential between pairs of agents.
//!
//! Every agent gets a claimed set: for each step of the time horizon an
//! occupied-set polygon spanning the positions reachable between a hard
//! braking manoeuvre and a reaction-delayed softer one, both following the
//! recorded path. The potential of agent A towards B sums the per-step
//! overlap of their occupied sets, weighted by A's remaining stop time.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_overlap_area, Aabb, Polygon, Polyline, Vec2};
use crate::scene::{AgentId, AgentState, Scenario, Scene, Track};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SafetyError {
    #[error("invalid safety procedure parameters: {0}")]
    InvalidParams(&'static str),
    #[error("agent {0} has no state at t={1}")]
    MissingState(AgentId, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SafetyProcedureParams {
    /// Hardest braking acceleration (m/s², negative).
    pub a_min: f64,
    /// Realistic braking acceleration after the reaction time (m/s², negative).
    pub a_slow: f64,
    /// Reaction time before realistic braking starts (s).
    pub t_react: f64,
    /// Prediction horizon (s).
    pub horizon: f64,
    /// Step of the claimed-set discretisation (s).
    pub dt_proc: f64,
    /// Safety margin around the footprint (m).
    pub margin: f64,
    /// Scale of the tanh mapping onto [0, 1) (m²·s).
    pub rho_scale: f64,
}

impl Default for SafetyProcedureParams {
    fn default() -> Self {
        Self { a_min: -8.0, a_slow: -4.0, t_react: 0.5, horizon: 4.0, dt_proc: 0.1, margin: 0.5, rho_scale: 10.0 }
    }
}

impl SafetyProcedureParams {
    pub fn validate(&self) -> Result<(), SafetyError> {
        if !(self.a_min <= self.a_slow && self.a_slow < 0.0) {
            return Err(SafetyError::InvalidParams("require a_min <= a_slow < 0"));
        }
        if !(self.horizon > 0.0 && self.dt_proc > 0.0) {
            return Err(SafetyError::InvalidParams("horizon and dt_proc must be positive"));
        }
        if !(self.margin >= 0.0 && self.t_react >= 0.0 && self.rho_scale > 0.0) {
            return Err(SafetyError::InvalidParams("margin and t_react must be >= 0, rho_scale > 0"));
        }
        Ok(())
    }

    /// Procedure times 0, dt_proc, …, horizon.
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        let n = (self.horizon / self.dt_proc).round() as usize;
        (0..=n).map(move |k| k as f64 * self.dt_proc)
    }
}

/// State along a braking procedure, relative to the procedure start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcedureState {
    pub t: f64,
    pub arc: f64,
    pub speed: f64,
}

/// Constant deceleration from `speed0`, frozen at standstill.
fn brake(speed0: f64, decel: f64, t: f64) -> (f64, f64) {
    let t_halt = speed0 / decel;
    if t >= t_halt {
        (speed0 * speed0 / (2.0 * decel), 0.0)
    } else {
        (speed0 * t - decel * t * t / 2.0, speed0 - decel * t)
    }
}

/// Hard braking at `a_min` from the first instant.
pub fn fast_procedure(speed0: f64, params: &SafetyProcedureParams, t: f64) -> ProcedureState {
    let (arc, speed) = brake(speed0, -params.a_min, t);
    ProcedureState { t, arc, speed }
}

/// Constant speed during the reaction time, then braking at `a_slow`.
pub fn slow_procedure(speed0: f64, params: &SafetyProcedureParams, t: f64) -> ProcedureState {
    let reaction = t.min(params.t_react);
    let (arc, speed) = brake(speed0, -params.a_slow, (t - params.t_react).max(0.0));
    ProcedureState { t, arc: speed0 * reaction + arc, speed }
}

/// Remaining stop time of the slow procedure at procedure time `t`, given
/// the slow-procedure speed at that time; floored at zero.
pub fn stop_time(slow_speed: f64, params: &SafetyProcedureParams, t: f64) -> f64 {
    (slow_speed / -params.a_slow - (params.t_react - t).max(0.0)).max(0.0)
}

/// Recorded path of a track with the arc position of every state.
#[derive(Debug, Clone)]
pub struct TrackPath {
    polyline: Polyline,
    state_arcs: Vec<f64>,
}

impl TrackPath {
    pub fn new(track: &Track) -> Self {
        let polyline = Polyline::new(track.states().iter().map(|s| s.position));
        // Polyline drops duplicate points; replay the same rule to map states onto arcs.
        let mut state_arcs = Vec::with_capacity(track.len());
        let mut idx = 0usize;
        let pts = polyline.points();
        for s in track.states() {
            while idx + 1 < pts.len() && pts[idx].distance(s.position) > 1e-9 {
                idx += 1;
            }
            state_arcs.push(if pts.is_empty() { 0.0 } else { polyline.arc_of_point(idx) });
        }
        Self { polyline, state_arcs }
    }

    /// Point and tangent `arc` meters ahead of the state with index `k`.
    pub fn position(&self, k: usize, arc: f64, heading: Vec2) -> (Vec2, Vec2) {
        let start = self.state_arcs[k];
        if start >= self.polyline.length() - 1e-12 {
            // recording exhausted: continue straight along the heading
            let end = self.polyline.points().last().copied().unwrap_or(Vec2::ZERO);
            let dir = heading.normalized().unwrap_or(Vec2::new(1.0, 0.0));
            return (end + dir * arc, dir);
        }
        self.polyline.point_at(start + arc, heading)
    }
}

/// Position and direction `arc` meters along the recorded path ahead of `t0`.
pub fn path_position(track: &Track, t0: f64, arc: f64) -> Option<(Vec2, Vec2)> {
    let k = track.index_at(t0)?;
    let path = TrackPath::new(track);
    let state = &track.states()[k];
    if arc <= 0.0 {
        return Some((state.position, state.direction()));
    }
    Some(path.position(k, arc, state.direction()))
}

fn occupied_between(
    state: &AgentState,
    fast: (Vec2, Vec2),
    slow: (Vec2, Vec2),
    params: &SafetyProcedureParams,
) -> Polygon {
    let chord = slow.0 - fast.0;
    let dir = chord.normalized().unwrap_or(fast.1);
    let half_len = state.length / 2.0 + params.margin;
    let half_wid = state.width / 2.0 + params.margin;
    let rear = fast.0 - dir * half_len;
    let front = slow.0 + dir * half_len;
    let center = (rear + front) * 0.5;
    Polygon::oriented_rect(center, dir, (front - rear).norm() / 2.0, half_wid)
}

fn anchors(state: &AgentState, path: &TrackPath, k: usize, fast_arc: f64, slow_arc: f64) -> ((Vec2, Vec2), (Vec2, Vec2)) {
    let heading = state.direction();
    let at = |arc: f64| {
        if arc <= 0.0 {
            (state.position, heading)
        } else {
            path.position(k, arc, heading)
        }
    };
    (at(fast_arc), at(slow_arc))
}

/// Occupied set of an agent at procedure time `t`: the margin-inflated
/// footprint swept from the hard-braking anchor to the soft-braking anchor.
pub fn occupied_set(state: &AgentState, track: &Track, params: &SafetyProcedureParams, t: f64) -> Option<Polygon> {
    let k = track.index_at(state.t)?;
    let path = TrackPath::new(track);
    let fast = fast_procedure(state.speed, params, t);
    let slow = slow_procedure(state.speed, params, t);
    let (a, b) = anchors(state, &path, k, fast.arc, slow.arc);
    Some(occupied_between(state, a, b, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimedEntry {
    pub t: f64,
    pub polygon: Polygon,
    pub t_stop: f64,
}

/// Occupied sets of one agent over the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimedSet {
    pub agent_id: AgentId,
    pub entries: Vec<ClaimedEntry>,
}

impl ClaimedSet {
    pub fn bbox(&self) -> Option<Aabb> {
        self.entries.iter().map(|e| e.polygon.bbox()).reduce(|a, b| a.union(&b))
    }
}

/// Claimed set of the agent of `track` starting at its state at `t0`.
pub fn claimed_set(track: &Track, t0: f64, params: &SafetyProcedureParams) -> Option<ClaimedSet> {
    let path = TrackPath::new(track);
    claimed_set_with_path(track, &path, t0, params)
}

pub(crate) fn claimed_set_with_path(track: &Track, path: &TrackPath, t0: f64, params: &SafetyProcedureParams) -> Option<ClaimedSet> {
    let k = track.index_at(t0)?;
    let state = &track.states()[k];
    let entries = params
        .steps()
        .map(|t| {
            let fast = fast_procedure(state.speed, params, t);
            let slow = slow_procedure(state.speed, params, t);
            let (a, b) = anchors(state, path, k, fast.arc, slow.arc);
            ClaimedEntry { t, polygon: occupied_between(state, a, b, params), t_stop: stop_time(slow.speed, params, t) }
        })
        .collect();
    Some(ClaimedSet { agent_id: state.agent_id.clone(), entries })
}

/// Stop-time weighted overlap of two claimed sets (weights from `a`).
pub fn rho_between(a: &ClaimedSet, b: &ClaimedSet) -> f64 {
    match (a.bbox(), b.bbox()) {
        (Some(x), Some(y)) if x.intersects(&y) => {}
        _ => return 0.0,
    }
    a.entries
        .iter()
        .zip(&b.entries)
        .map(|(ea, eb)| {
            if ea.t_stop == 0.0 {
                return 0.0;
            }
            convex_overlap_area(&ea.polygon, &eb.polygon) * ea.t_stop
        })
        .sum()
}

/// Actor-specific safety potential ρ_AB at scene time `t0` (m²·s).
pub fn rho(a: &AgentId, b: &AgentId, scenario: &Scenario, t0: f64, params: &SafetyProcedureParams) -> Result<f64, SafetyError> {
    let set = |id: &AgentId| {
        scenario
            .track(id)
            .and_then(|tr| claimed_set(tr, t0, params))
            .ok_or_else(|| SafetyError::MissingState(id.clone(), t0))
    };
    Ok(rho_between(&set(a)?, &set(b)?))
}

/// Maps ρ onto [0, 1) with a scaled tanh.
pub fn rho_norm(rho_raw: f64, params: &SafetyProcedureParams) -> f64 {
    (rho_raw / params.rho_scale).tanh()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SafetyPotential {
    /// Normalised ρ_AB for every ordered pair (A, B).
    pub per_pair: BTreeMap<(AgentId, AgentId), f64>,
    /// Maximum normalised ρ of each agent towards any other agent.
    pub per_agent: BTreeMap<AgentId, f64>,
}

/// Claimed sets for every agent of the scene.
pub fn scene_claimed_sets(scene: &Scene, scenario: &Scenario, params: &SafetyProcedureParams) -> Vec<ClaimedSet> {
    scene
        .states
        .iter()
        .filter_map(|s| scenario.track(&s.agent_id).and_then(|tr| claimed_set(tr, scene.t, params)))
        .collect()
}

/// Safety potential of every agent in the scene from precomputed claimed sets.
pub fn safety_potential_from_sets(sets: &[ClaimedSet], params: &SafetyProcedureParams) -> SafetyPotential {
    let mut out = SafetyPotential::default();
    for a in sets {
        let mut best = 0.0f64;
        for b in sets {
            if a.agent_id == b.agent_id {
                continue;
            }
            let v = rho_norm(rho_between(a, b), params);
            best = best.max(v);
            out.per_pair.insert((a.agent_id.clone(), b.agent_id.clone()), v);
        }
        out.per_agent.insert(a.agent_id.clone(), best);
    }
    out
}

/// Per-pair and per-agent safety potential of a scene.
pub fn scene_safety_potential(scene: &Scene, scenario: &Scenario, params: &SafetyProcedureParams) -> SafetyPotential {
    safety_potential_from_sets(&scene_claimed_sets(scene, scenario, params), params)
}
