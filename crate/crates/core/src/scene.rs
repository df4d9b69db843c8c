//! Agents, tracks, scenes and scenarios.
//!
//! A [`Scenario`] is the immutable result of ingesting one recording. It is
//! indexed both per agent ([`Track`]) and per timestamp ([`Scene`]).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Polygon, Vec2};

/// Maximum deviation from the sampling grid still accepted as "on grid".
pub const TIME_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("track {0}: insufficient states (need at least 2)")]
    InsufficientStates(AgentId),
    #[error("track {track}: timestamps not strictly increasing at t={t}")]
    NonMonotone { track: AgentId, t: f64 },
    #[error("track {track}: irregular sampling (expected dt={expected}, got {got})")]
    IrregularSampling { track: AgentId, expected: f64, got: f64 },
    #[error("track {0}: states carry a different agent id")]
    MixedAgents(AgentId),
    #[error("time {t} outside recording range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },
    #[error("tracks disagree on sampling period ({0} vs {1})")]
    InconsistentPeriod(f64, f64),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
}

/// Opaque agent identifier. Numeric ids sort numerically, others lexically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<u64> for AgentId {
    fn from(n: u64) -> Self {
        Self(n.to_string())
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Ord for AgentId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<u64>(), other.0.parse::<u64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for AgentId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentClass {
    Car,
    TruckBus,
    Pedestrian,
    Bicycle,
    Other,
}

impl AgentClass {
    /// Cars, trucks, buses and unclassified motorised traffic.
    pub fn is_vehicle(self) -> bool {
        matches!(self, AgentClass::Car | AgentClass::TruckBus | AgentClass::Other)
    }

    /// Maps dataset labels (INTERACTION, inD, ...) onto a class.
    pub fn from_label(label: &str) -> Self {
        match label.trim().to_ascii_lowercase().as_str() {
            "car" | "van" => AgentClass::Car,
            "truck" | "bus" | "truck_bus" | "trailer" => AgentClass::TruckBus,
            "pedestrian" | "pedestrian/bicycle" => AgentClass::Pedestrian,
            "bicycle" | "bicyclist" | "cyclist" | "motorcycle" => AgentClass::Bicycle,
            _ => AgentClass::Other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgentClass::Car => "car",
            AgentClass::TruckBus => "truck_bus",
            AgentClass::Pedestrian => "pedestrian",
            AgentClass::Bicycle => "bicycle",
            AgentClass::Other => "other",
        }
    }
}

/// Wraps an angle into [-π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Kinematic snapshot of one traffic participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub agent_id: AgentId,
    /// Recording clock, seconds.
    pub t: f64,
    pub position: Vec2,
    /// Map-frame heading in radians, in [-π, π).
    pub heading: f64,
    pub velocity: Vec2,
    pub speed: f64,
    /// Signed acceleration along the direction of motion.
    pub acceleration: f64,
    pub length: f64,
    pub width: f64,
    pub class: AgentClass,
}

impl AgentState {
    /// Vehicle-shaped state driving along `heading` at `speed`.
    pub fn moving(id: impl Into<AgentId>, t: f64, position: Vec2, heading: f64, speed: f64) -> Self {
        let heading = wrap_angle(heading);
        Self {
            agent_id: id.into(),
            t,
            position,
            heading,
            velocity: Vec2::from_angle(heading) * speed,
            speed,
            acceleration: 0.0,
            length: 4.5,
            width: 1.8,
            class: AgentClass::Car,
        }
    }

    pub fn with_size(mut self, length: f64, width: f64) -> Self {
        self.length = length;
        self.width = width;
        self
    }

    pub fn with_class(mut self, class: AgentClass) -> Self {
        self.class = class;
        self
    }

    pub fn with_acceleration(mut self, acceleration: f64) -> Self {
        self.acceleration = acceleration;
        self
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    /// Oriented bounding rectangle of the agent.
    pub fn footprint(&self) -> Polygon {
        Polygon::oriented_rect(self.position, self.direction(), self.length / 2.0, self.width / 2.0)
    }

    /// Half of the footprint diagonal.
    pub fn bounding_radius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }
}

/// Time series of one agent sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    agent_id: AgentId,
    states: Vec<AgentState>,
    dt: f64,
}

impl Track {
    /// Validates ordering, spacing and agent identity of `states`.
    pub fn new(agent_id: AgentId, states: Vec<AgentState>, dt: f64) -> Result<Self, SceneError> {
        if states.iter().any(|s| s.agent_id != agent_id) {
            return Err(SceneError::MixedAgents(agent_id));
        }
        for w in states.windows(2) {
            let step = w[1].t - w[0].t;
            if step <= 0.0 {
                return Err(SceneError::NonMonotone { track: agent_id, t: w[1].t });
            }
            if (step - dt).abs() > TIME_TOLERANCE {
                return Err(SceneError::IrregularSampling { track: agent_id, expected: dt, got: step });
            }
        }
        Ok(Self { agent_id, states, dt })
    }

    pub fn agent_id(&self) -> &AgentId {
        &self.agent_id
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.states.first().map_or(f64::NAN, |s| s.t)
    }

    pub fn t_end(&self) -> f64 {
        self.states.last().map_or(f64::NAN, |s| s.t)
    }

    /// Index of the state on the grid point nearest to `t`, if the track covers it.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let first = self.states.first()?;
        let k = ((t - first.t) / self.dt).round();
        if k < 0.0 || k >= self.states.len() as f64 {
            return None;
        }
        let k = k as usize;
        ((self.states[k].t - t).abs() <= self.dt / 2.0).then_some(k)
    }

    pub fn state_at(&self, t: f64) -> Option<&AgentState> {
        self.index_at(t).map(|k| &self.states[k])
    }

    pub(crate) fn states_mut(&mut self) -> &mut [AgentState] {
        &mut self.states
    }
}

/// Central differences in the interior, second-order one-sided stencils at
/// the ends (first-order when only two samples exist).
fn differentiate<T>(values: &[T], dt: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = values.len();
    debug_assert!(n >= 2);
    if n == 2 {
        let d = (values[1] - values[0]) * (1.0 / dt);
        return vec![d, d];
    }
    let h = 1.0 / (2.0 * dt);
    let mut out = Vec::with_capacity(n);
    out.push((values[1] * 4.0 - values[0] * 3.0 - values[2]) * h);
    for i in 1..n - 1 {
        out.push((values[i + 1] - values[i - 1]) * h);
    }
    out.push((values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * h);
    out
}

/// Recomputes velocity, speed and acceleration of a track from its positions.
pub fn derive_kinematics(track: &Track) -> Result<Track, SceneError> {
    if track.len() < 2 {
        return Err(SceneError::InsufficientStates(track.agent_id.clone()));
    }
    let positions: Vec<Vec2> = track.states.iter().map(|s| s.position).collect();
    let velocities = differentiate(&positions, track.dt);
    let mut out = track.clone();
    for (s, v) in out.states.iter_mut().zip(&velocities) {
        s.velocity = *v;
        s.speed = v.norm();
    }
    derive_acceleration(&mut out);
    Ok(out)
}

/// Fills signed acceleration from the speed profile. Tracks with a single
/// state get zero acceleration.
pub(crate) fn derive_acceleration(track: &mut Track) {
    if track.len() < 2 {
        for s in &mut track.states {
            s.acceleration = 0.0;
        }
        return;
    }
    let speeds: Vec<f64> = track.states.iter().map(|s| s.speed).collect();
    let acc = differentiate(&speeds, track.dt);
    for (s, a) in track.states.iter_mut().zip(acc) {
        s.acceleration = a;
    }
}

/// Snapshot of all agents at one timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub t: f64,
    pub states: Vec<AgentState>,
}

impl Scene {
    pub fn new(t: f64, states: Vec<AgentState>) -> Self {
        Self { t, states }
    }

    pub fn get(&self, id: &AgentId) -> Option<&AgentState> {
        self.states.iter().find(|s| &s.agent_id == id)
    }

    /// Copy of the scene restricted to vehicle classes.
    pub fn vehicles_only(&self) -> Scene {
        Scene {
            t: self.t,
            states: self.states.iter().filter(|s| s.class.is_vehicle()).cloned().collect(),
        }
    }
}

/// Complete recording: one track per agent on a common sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    tracks: BTreeMap<AgentId, Track>,
    dt: f64,
    time_range: (f64, f64),
}

impl Scenario {
    pub fn new(tracks: impl IntoIterator<Item = Track>, dt: f64) -> Result<Self, SceneError> {
        let mut map = BTreeMap::new();
        let mut range: Option<(f64, f64)> = None;
        for track in tracks {
            if track.len() >= 2 && (track.dt - dt).abs() > TIME_TOLERANCE {
                return Err(SceneError::InconsistentPeriod(dt, track.dt));
            }
            if !track.is_empty() {
                let (lo, hi) = (track.t_start(), track.t_end());
                range = Some(range.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))));
            }
            map.insert(track.agent_id.clone(), track);
        }
        Ok(Self { tracks: map, dt, time_range: range.unwrap_or((0.0, 0.0)) })
    }

    pub fn tracks(&self) -> &BTreeMap<AgentId, Track> {
        &self.tracks
    }

    pub fn track(&self, id: &AgentId) -> Option<&Track> {
        self.tracks.get(id)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time_range(&self) -> (f64, f64) {
        self.time_range
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// All grid timestamps of the recording, in order.
    pub fn frame_times(&self) -> Vec<f64> {
        if self.tracks.is_empty() {
            return Vec::new();
        }
        let (lo, hi) = self.time_range;
        let n = ((hi - lo) / self.dt).round() as usize;
        (0..=n).map(|k| self.grid_time(k)).collect()
    }

    fn grid_time(&self, k: usize) -> f64 {
        // Reuse a recorded timestamp when possible so that lookups are exact.
        let t = self.time_range.0 + k as f64 * self.dt;
        self.tracks
            .values()
            .find_map(|tr| tr.state_at(t).map(|s| s.t))
            .unwrap_or(t)
    }

    /// Grid time nearest to `t`, or a range error.
    pub fn snap_time(&self, t: f64) -> Result<f64, SceneError> {
        let (lo, hi) = self.time_range;
        let slack = self.dt / 2.0;
        if self.tracks.is_empty() || !(lo - slack..=hi + slack).contains(&t) {
            return Err(SceneError::OutOfRange { t, min: lo, max: hi });
        }
        let k = ((t - lo) / self.dt).round().max(0.0) as usize;
        Ok(self.grid_time(k))
    }

    /// Snapshot of every agent whose track has a state at the grid time nearest `t`.
    pub fn scene_at(&self, t: f64) -> Result<Scene, SceneError> {
        let t_grid = self.snap_time(t)?;
        let states = self
            .tracks
            .values()
            .filter_map(|tr| tr.state_at(t_grid).cloned())
            .collect();
        Ok(Scene { t: t_grid, states })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track_from_positions(id: &str, pts: &[(f64, f64)], dt: f64) -> Track {
        let states = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| AgentState::moving(id, i as f64 * dt, Vec2::new(x, y), 0.0, 0.0))
            .collect();
        Track::new(id.into(), states, dt).unwrap()
    }

    #[test]
    fn constant_velocity_kinematics() {
        let tr = derive_kinematics(&track_from_positions("1", &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 1.0)).unwrap();
        for s in tr.states() {
            assert!((s.speed - 1.0).abs() < 1e-12);
            assert!(s.acceleration.abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_kinematics() {
        let tr = derive_kinematics(&track_from_positions("1", &[(0.0, 0.0); 3], 1.0)).unwrap();
        assert!(tr.states().iter().all(|s| s.speed == 0.0 && s.acceleration == 0.0));
    }

    #[test]
    fn central_difference_in_the_middle() {
        let tr = derive_kinematics(&track_from_positions("1", &[(0.0, 0.0), (0.5, 0.0), (2.0, 0.0)], 1.0)).unwrap();
        assert!((tr.states()[1].speed - 1.0).abs() < 1e-12);
        // positions untouched
        assert_eq!(tr.states()[1].position, Vec2::new(0.5, 0.0));
    }

    #[test]
    fn single_state_is_insufficient() {
        let tr = track_from_positions("7", &[(0.0, 0.0)], 0.1);
        assert_eq!(derive_kinematics(&tr), Err(SceneError::InsufficientStates("7".into())));
    }

    #[test]
    fn constant_acceleration_profile_is_reproduced() {
        let dt = 0.1;
        let a = 2.5;
        let v0 = 3.0;
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = i as f64 * dt;
                (v0 * t + 0.5 * a * t * t, 0.0)
            })
            .collect();
        let tr = derive_kinematics(&track_from_positions("1", &pts, dt)).unwrap();
        for s in tr.states() {
            assert!((s.speed - (v0 + a * s.t)).abs() < 1e-2, "t={} speed={}", s.t, s.speed);
            assert!((s.acceleration - a).abs() < 1e-6);
        }
    }

    #[test]
    fn scene_membership_by_interval() {
        let a = track_from_positions("A", &[(0.0, 0.0); 6], 1.0);
        let b_states = (2..8)
            .map(|i| AgentState::moving("B", i as f64, Vec2::new(10.0, 0.0), 0.0, 0.0))
            .collect();
        let b = Track::new("B".into(), b_states, 1.0).unwrap();
        let sc = Scenario::new([a, b], 1.0).unwrap();
        let ids = |t: f64| -> Vec<String> { sc.scene_at(t).unwrap().states.iter().map(|s| s.agent_id.0.clone()).collect() };
        assert_eq!(ids(1.0), vec!["A"]);
        assert_eq!(ids(3.0), vec!["A", "B"]);
        assert!(matches!(sc.scene_at(9.0), Err(SceneError::OutOfRange { .. })));
    }

    #[test]
    fn non_monotone_track_rejected() {
        let s0 = AgentState::moving("3", 0.2, Vec2::ZERO, 0.0, 0.0);
        let s1 = AgentState::moving("3", 0.1, Vec2::ZERO, 0.0, 0.0);
        assert!(matches!(Track::new("3".into(), vec![s0, s1], 0.1), Err(SceneError::NonMonotone { .. })));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-PI) + PI).abs() < 1e-12);
    }

    #[test]
    fn agent_ids_sort_numerically() {
        let mut ids: Vec<AgentId> = ["10", "9", "P1", "2"].iter().map(|s| AgentId::from(*s)).collect();
        ids.sort();
        let got: Vec<&str> = ids.iter().map(|i| i.0.as_str()).collect();
        assert_eq!(got, vec!["2", "9", "10", "P1"]);
    }
}
