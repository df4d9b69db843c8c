//! Constructed scenarios with known geometry, for demos and tests.

use crate::geometry::Vec2;
use crate::scene::{AgentId, AgentState, Scenario, SceneError, Track};

/// Constant-velocity track of `n` states starting at `t0`.
pub fn straight_track(
    id: impl Into<AgentId>,
    t0: f64,
    start: Vec2,
    heading: f64,
    speed: f64,
    n: usize,
    dt: f64,
) -> Result<Track, SceneError> {
    let id = id.into();
    let dir = Vec2::from_angle(heading);
    let states = (0..n)
        .map(|k| {
            let t = t0 + k as f64 * dt;
            AgentState::moving(id.clone(), t, start + dir * (speed * (t - t0)), heading, speed)
        })
        .collect();
    Track::new(id, states, dt)
}

/// Two cars on one lane: the follower closes in on a slower leader.
/// `gap` is the initial bumper-to-bumper distance.
pub fn following_scenario(v_follower: f64, v_leader: f64, gap: f64, duration: f64, dt: f64) -> Result<Scenario, SceneError> {
    let n = (duration / dt).round() as usize + 1;
    let length = 4.5;
    let follower = straight_track("1", 0.0, Vec2::ZERO, 0.0, v_follower, n, dt)?;
    let leader = straight_track("2", 0.0, Vec2::new(gap + length, 0.0), 0.0, v_leader, n, dt)?;
    Scenario::new([follower, leader], dt)
}

/// Two cars on perpendicular straight paths crossing at the origin.
/// Agent "1" drives east and reaches the origin after `arrival_a` seconds,
/// agent "2" drives north and arrives after `arrival_b` seconds.
pub fn crossing_scenario(
    speed_a: f64,
    arrival_a: f64,
    speed_b: f64,
    arrival_b: f64,
    duration: f64,
    dt: f64,
) -> Result<Scenario, SceneError> {
    let n = (duration / dt).round() as usize + 1;
    let a = straight_track("1", 0.0, Vec2::new(-speed_a * arrival_a, 0.0), 0.0, speed_a, n, dt)?;
    let b = straight_track("2", 0.0, Vec2::new(0.0, -speed_b * arrival_b), std::f64::consts::FRAC_PI_2, speed_b, n, dt)?;
    Scenario::new([a, b], dt)
}

/// Agents far apart on parallel lanes at one common speed.
pub fn sparse_scenario(agents: usize, spacing: f64, speed: f64, duration: f64, dt: f64) -> Result<Scenario, SceneError> {
    let n = (duration / dt).round() as usize + 1;
    let tracks = (0..agents)
        .map(|i| straight_track(i as u64 + 1, 0.0, Vec2::new(i as f64 * spacing, i as f64 * spacing), 0.0, speed, n, dt))
        .collect::<Result<Vec<_>, _>>()?;
    Scenario::new(tracks, dt)
}

/// Busy four-lane road with cross traffic: `agents` cars whose speeds and
/// positions follow a fixed pattern, so the scenario is reproducible
/// without a random source.
pub fn dense_traffic_scenario(agents: usize, frames: usize, dt: f64) -> Result<Scenario, SceneError> {
    let tracks = (0..agents)
        .map(|i| {
            let phase = i as f64 * 0.618_033_988_749_895;
            let speed = 6.0 + 8.0 * phase.fract();
            let (start, heading) = if i % 5 == 4 {
                // northbound crossing traffic
                (Vec2::new(20.0 * (i / 5) as f64, -30.0 - 7.0 * (i % 3) as f64), std::f64::consts::FRAC_PI_2)
            } else {
                let lane = (i % 4) as f64;
                (Vec2::new(-12.0 * (i / 4) as f64 - 3.0 * lane, 3.5 * lane), 0.0)
            };
            straight_track(i as u64 + 1, 0.0, start, heading, speed, frames, dt)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Scenario::new(tracks, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_arrivals() {
        let s = crossing_scenario(10.0, 3.0, 8.0, 5.0, 8.0, 0.1).unwrap();
        let a = s.track(&"1".into()).unwrap().state_at(3.0).unwrap();
        assert!(a.position.norm() < 1e-9);
        let b = s.track(&"2".into()).unwrap().state_at(5.0).unwrap();
        assert!(b.position.norm() < 1e-9);
    }

    #[test]
    fn dense_has_requested_size() {
        let s = dense_traffic_scenario(20, 11, 0.1).unwrap();
        assert_eq!(s.tracks().len(), 20);
        assert_eq!(s.frame_times().len(), 11);
    }
}
