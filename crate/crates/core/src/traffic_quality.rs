//! Inverse universal traffic quality: four speed-statistics sub-metrics at
//! shrinking spatial scope (whole scene, braking-distance neighbourhood,
//! ego history). All of them grow with criticality.

use serde::{Deserialize, Serialize};

use crate::scene::{AgentId, Scene, Track};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TqConfig {
    /// Braking deceleration magnitude for the braking-distance radius (m/s²).
    pub a_brake: f64,
    /// Reaction time for the braking-distance radius (s).
    pub t_react: f64,
    /// Reference speed, 50 km/h for urban traffic (m/s).
    pub nu_ref: f64,
    /// Reference acceleration (m/s²).
    pub a_ref: f64,
    /// History window of the individual sub-metric (s).
    pub window: f64,
    /// Lower clamp on mean speeds in coefficients of variation (m/s).
    pub eps_speed: f64,
}

impl Default for TqConfig {
    fn default() -> Self {
        Self { a_brake: 4.0, t_react: 1.0, nu_ref: 13.89, a_ref: 2.0, window: 3.0, eps_speed: 0.1 }
    }
}

/// Four raw sub-metric values for one ego (macro is shared by the scene).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TqVector {
    pub macro_: f64,
    pub micro: f64,
    pub nano: f64,
    pub indi: Option<f64>,
}

/// Reaction distance plus kinematic stopping distance.
pub fn braking_distance(speed: f64, cfg: &TqConfig) -> f64 {
    speed * cfg.t_react + speed * speed / (2.0 * cfg.a_brake)
}

/// Population coefficient of variation with a clamped mean.
fn coefficient_of_variation(speeds: impl Iterator<Item = f64> + Clone, eps: f64) -> Option<f64> {
    let n = speeds.clone().count();
    if n == 0 {
        return None;
    }
    let mean = speeds.clone().sum::<f64>() / n as f64;
    let var = speeds.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Some(0.0);
    }
    Some(sd / mean.max(eps))
}

/// Speed dispersion of the whole scene; undefined without vehicles.
pub fn tq_macro(scene: &Scene, cfg: &TqConfig) -> Option<f64> {
    coefficient_of_variation(scene.states.iter().map(|s| s.speed), cfg.eps_speed)
}

fn within_braking_distance<'a>(scene: &'a Scene, ego: &AgentId, cfg: &TqConfig) -> Option<impl Iterator<Item = f64> + Clone + 'a> {
    let e = scene.get(ego)?;
    let radius = braking_distance(e.speed, cfg);
    let center = e.position;
    Some(
        scene
            .states
            .iter()
            .filter(move |s| s.position.distance(center) <= radius)
            .map(|s| s.speed),
    )
}

/// Share of scene vehicles (ego included) inside the ego's braking distance.
pub fn tq_micro(scene: &Scene, ego: &AgentId, cfg: &TqConfig) -> Option<f64> {
    let inside = within_braking_distance(scene, ego, cfg)?.count();
    Some(inside as f64 / scene.states.len() as f64)
}

/// Speed dispersion inside the ego's braking distance.
pub fn tq_nano(scene: &Scene, ego: &AgentId, cfg: &TqConfig) -> Option<f64> {
    coefficient_of_variation(within_braking_distance(scene, ego, cfg)?, cfg.eps_speed)
}

/// Mean acceleration magnitude and mean speed of the ego over the trailing
/// window, each relative to its reference value, averaged.
pub fn tq_indi(track: &Track, t: f64, cfg: &TqConfig) -> Option<f64> {
    let lo = t - cfg.window - 1e-9;
    let hi = t + 1e-9;
    let window: Vec<_> = track.states().iter().filter(|s| s.t >= lo && s.t <= hi).collect();
    if window.is_empty() {
        return None;
    }
    let n = window.len() as f64;
    let mean_acc = window.iter().map(|s| s.acceleration.abs()).sum::<f64>() / n;
    let mean_speed = window.iter().map(|s| s.speed).sum::<f64>() / n;
    Some((mean_acc / cfg.a_ref + mean_speed / cfg.nu_ref) / 2.0)
}

/// All four sub-metrics for one ego.
pub fn tq_vector(scene: &Scene, track: &Track, cfg: &TqConfig) -> Option<TqVector> {
    let ego = track.agent_id();
    Some(TqVector {
        macro_: tq_macro(scene, cfg)?,
        micro: tq_micro(scene, ego, cfg)?,
        nano: tq_nano(scene, ego, cfg)?,
        indi: tq_indi(track, scene.t, cfg),
    })
}
