//! Two-actor metrics: Euclidean distance, TTC, worst-case TTC and the
//! intersection family (PET, ET, GT, trajectory distance).
//!
//! The intersection metrics share a [`ConflictZone`]: the region where the
//! vehicle-width corridors of both agents overlap at the point where their
//! center-line paths cross.

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_overlap_area, Polygon, Polyline, Vec2};
use crate::scene::{wrap_angle, AgentId, AgentState, Track};

/// Minimum speed for an agent to count as moving.
pub const MOVING_SPEED: f64 = 0.1;

/// Longest corridor half-length used when building a conflict zone at a
/// shallow crossing angle.
const MAX_CORRIDOR_HALF_LENGTH: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairwiseConfig {
    /// Maximum lateral offset of the leader from the follower's heading ray (m).
    pub lateral_gate: f64,
    /// Maximum heading difference for a car-following pair (degrees).
    pub heading_gate_deg: f64,
    /// Look-ahead used to build future paths for GT and TJ (s).
    pub zone_horizon: f64,
}

impl Default for PairwiseConfig {
    fn default() -> Self {
        Self { lateral_gate: 2.0, heading_gate_deg: 30.0, zone_horizon: 5.0 }
    }
}

/// Center-to-center distance.
pub fn euclidean_distance(a: &AgentState, b: &AgentState) -> f64 {
    a.position.distance(b.position)
}

/// Orders two agents as (follower, leader) when they drive one behind the other.
pub fn leader_follower<'a>(
    a: &'a AgentState,
    b: &'a AgentState,
    lateral_gate: f64,
    heading_gate: f64,
) -> Option<(&'a AgentState, &'a AgentState)> {
    if wrap_angle(a.heading - b.heading).abs() > heading_gate {
        return None;
    }
    let dir = a.direction();
    let rel = b.position - a.position;
    if dir.cross(rel).abs() >= lateral_gate {
        return None;
    }
    let ahead = dir.dot(rel);
    if ahead > 0.0 {
        Some((a, b))
    } else if ahead < 0.0 {
        Some((b, a))
    } else {
        None
    }
}

/// Bumper gap divided by closing speed. Zero once the footprints touch;
/// undefined when the follower is not faster than the leader.
pub fn ttc(follower: &AgentState, leader: &AgentState) -> Option<f64> {
    let gap = euclidean_distance(follower, leader) - follower.length / 2.0 - leader.length / 2.0;
    if gap <= 0.0 {
        return Some(0.0);
    }
    let closing = follower.speed - leader.speed;
    (closing > 0.0).then(|| gap / closing)
}

/// Worst-case time to collision: both agents head straight at each other
/// at their current speeds, with footprints approximated by bounding circles.
pub fn wttc(a: &AgentState, b: &AgentState) -> Option<f64> {
    let clearance = euclidean_distance(a, b) - a.bounding_radius() - b.bounding_radius();
    if clearance <= 0.0 {
        return Some(0.0);
    }
    let closing = a.speed + b.speed;
    (closing > 0.0).then(|| clearance / closing)
}

/// Region shared by two agents' paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictZone {
    pub agent_a: AgentId,
    pub agent_b: AgentId,
    /// Crossing point of the two center-line paths.
    pub point: Vec2,
    /// Overlap of both vehicle-width corridors at the crossing.
    pub area: Polygon,
    /// Path length until the footprint of each agent first touches the zone.
    pub arc_a: f64,
    pub arc_b: f64,
    /// Path length until the footprint of each agent has left the zone.
    pub clear_a: f64,
    pub clear_b: f64,
}

/// Time interval during which a footprint overlaps a zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZonePassage {
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Future center-line path of a track starting at `t`, limited to
/// `horizon` seconds and extended straight along the last heading when
/// the recording ends early.
pub fn future_path(track: &Track, t: f64, horizon: f64) -> Option<Polyline> {
    let k = track.index_at(t)?;
    let states = track.states();
    let t_stop = states[k].t + horizon;
    let mut points: Vec<Vec2> = states[k..]
        .iter()
        .take_while(|s| s.t <= t_stop + 1e-9)
        .map(|s| s.position)
        .collect();
    let last = states[k..].iter().take_while(|s| s.t <= t_stop + 1e-9).last()?;
    let remaining = t_stop - last.t;
    if remaining > 1e-9 && last.speed > 0.0 {
        points.push(last.position + last.direction() * (last.speed * remaining));
    }
    Some(Polyline::new(points))
}

/// Full recorded path of a track.
pub fn recorded_path(track: &Track) -> Polyline {
    Polyline::new(track.states().iter().map(|s| s.position))
}

/// Builds the conflict zone of two paths given the agents' current states.
/// Arcs are measured from the start of each path.
pub fn zone_from_paths(a: &AgentState, path_a: &Polyline, b: &AgentState, path_b: &Polyline) -> Option<ConflictZone> {
    let crossing = path_a.first_crossing(path_b)?;
    let (ta, tb) = (crossing.tangent_first, crossing.tangent_second);
    let sin = ta.cross(tb).abs().max(1e-3);
    let half = ((a.width + b.width) / (2.0 * sin) + 1.0).min(MAX_CORRIDOR_HALF_LENGTH);
    let corridor_a = Polygon::oriented_rect(crossing.point, ta, half, a.width / 2.0);
    let corridor_b = Polygon::oriented_rect(crossing.point, tb, half, b.width / 2.0);
    let area = Polygon::new(crate::geometry::clip_convex(&corridor_a, &corridor_b)).ok()?;

    // Each footprint spans its full corridor width, so contact happens
    // exactly when the longitudinal extents overlap.
    let extent = |dir: Vec2| {
        area.vertices().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let p = (*v - crossing.point).dot(dir);
            (lo.min(p), hi.max(p))
        })
    };
    let (lo_a, hi_a) = extent(ta);
    let (lo_b, hi_b) = extent(tb);
    Some(ConflictZone {
        agent_a: a.agent_id.clone(),
        agent_b: b.agent_id.clone(),
        point: crossing.point,
        arc_a: (crossing.arc_first + lo_a - a.length / 2.0).max(0.0),
        arc_b: (crossing.arc_second + lo_b - b.length / 2.0).max(0.0),
        clear_a: (crossing.arc_first + hi_a + a.length / 2.0).max(0.0),
        clear_b: (crossing.arc_second + hi_b + b.length / 2.0).max(0.0),
        area,
    })
}

/// Conflict zone of two tracks from their recorded paths over `[t, t + horizon]`.
pub fn conflict_zone(track_a: &Track, track_b: &Track, t: f64, horizon: f64) -> Option<ConflictZone> {
    let a = track_a.state_at(t)?;
    let b = track_b.state_at(t)?;
    let path_a = future_path(track_a, t, horizon)?;
    let path_b = future_path(track_b, t, horizon)?;
    zone_from_paths(a, &path_a, b, &path_b)
}

/// Conflict zone of the complete recorded paths, arcs measured from each track start.
pub fn recorded_conflict_zone(track_a: &Track, track_b: &Track) -> Option<ConflictZone> {
    let a = track_a.states().first()?;
    let b = track_b.states().first()?;
    zone_from_paths(a, &recorded_path(track_a), b, &recorded_path(track_b))
}

fn occupies(state: &AgentState, zone: &ConflictZone, zone_radius: f64) -> bool {
    if state.position.distance(zone.point) > zone_radius + state.bounding_radius() {
        return false;
    }
    convex_overlap_area(&state.footprint(), &zone.area) > 1e-9
}

/// First occupancy of the zone by a track, sampled on the recording grid.
///
/// `t_enter` is the first sample whose footprint overlaps the zone and
/// `t_exit` the first sample afterwards that no longer does (the last
/// sample if the recording ends inside the zone).
pub fn zone_passage(track: &Track, zone: &ConflictZone) -> Option<ZonePassage> {
    let radius = zone.area.vertices().iter().map(|v| v.distance(zone.point)).fold(0.0, f64::max);
    let states = track.states();
    let enter = states.iter().position(|s| occupies(s, zone, radius))?;
    let exit = states[enter..]
        .iter()
        .position(|s| !occupies(s, zone, radius))
        .map_or(states.len() - 1, |k| enter + k);
    Some(ZonePassage { t_enter: states[enter].t, t_exit: states[exit].t })
}

/// Orders two passages as (first, second) by exit time; ties go to the smaller id.
pub fn order_passages<'a>(
    a: (&'a AgentId, ZonePassage),
    b: (&'a AgentId, ZonePassage),
) -> ((&'a AgentId, ZonePassage), (&'a AgentId, ZonePassage)) {
    let a_first = a.1.t_exit < b.1.t_exit || (a.1.t_exit == b.1.t_exit && a.0 <= b.0);
    if a_first {
        (a, b)
    } else {
        (b, a)
    }
}

/// Post-encroachment time between two known passages, floored at zero.
pub fn pet_from_passages(first: ZonePassage, second: ZonePassage) -> f64 {
    (second.t_enter - first.t_exit).max(0.0)
}

/// Time between the first agent leaving the zone and the second entering it.
pub fn pet(track_a: &Track, track_b: &Track, zone: &ConflictZone) -> Option<f64> {
    let pa = zone_passage(track_a, zone)?;
    let pb = zone_passage(track_b, zone)?;
    let (first, second) = order_passages((track_a.agent_id(), pa), (track_b.agent_id(), pb));
    Some(pet_from_passages(first.1, second.1))
}

/// Time a track spends in the zone during its first passage.
pub fn et(track: &Track, zone: &ConflictZone) -> Option<f64> {
    zone_passage(track, zone).map(|p| p.t_exit - p.t_enter)
}

/// Gap time: constant-speed prediction of PET from the current states.
///
/// Arrival and clearing times follow from the zone arcs at current speed.
/// Undefined when either agent is (nearly) stationary.
pub fn gap_time(a: &AgentState, b: &AgentState, zone: &ConflictZone) -> Option<f64> {
    if a.speed <= MOVING_SPEED || b.speed <= MOVING_SPEED {
        return None;
    }
    let (enter_a, clear_a) = (zone.arc_a / a.speed, zone.clear_a / a.speed);
    let (enter_b, clear_b) = (zone.arc_b / b.speed, zone.clear_b / b.speed);
    let a_first = clear_a < clear_b || (clear_a == clear_b && a.agent_id <= b.agent_id);
    let gap = if a_first { enter_b - clear_a } else { enter_a - clear_b };
    Some(gap.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneSide {
    A,
    B,
}

/// Remaining path length of one zone agent until it reaches the zone.
pub fn trajectory_distance(zone: &ConflictZone, which: ZoneSide) -> f64 {
    match which {
        ZoneSide::A => zone.arc_a,
        ZoneSide::B => zone.arc_b,
    }
}
