//! Claimed sets and the safety potential of a follower closing in on a
//! stopped car. Pass a path to also dump the claimed sets as JSON.

use std::error::Error;

use traffic_fingerprint::geometry::Vec2;
use traffic_fingerprint::safety_potential::{
    rho, rho_norm, scene_claimed_sets, scene_safety_potential, SafetyProcedureParams,
};
use traffic_fingerprint::scene::Scenario;
use traffic_fingerprint::synthetic::straight_track;

fn main() -> Result<(), Box<dyn Error>> {
    let params = SafetyProcedureParams::default();
    let dt = 0.1;
    let follower = straight_track("1", 0.0, Vec2::ZERO, 0.0, 15.0, 40, dt)?;
    let stopped = straight_track("2", 0.0, Vec2::new(9.5, 0.0), 0.0, 0.0, 40, dt)?;
    let bystander = straight_track("3", 0.0, Vec2::new(0.0, 300.0), 0.0, 12.0, 40, dt)?;
    let scenario = Scenario::new([follower, stopped, bystander], dt)?;

    let raw = rho(&"1".into(), &"2".into(), &scenario, 0.0, &params)?;
    println!("rho(1 -> 2) = {raw:.3} m²·s, normalised {:.3}", rho_norm(raw, &params));

    let scene = scenario.scene_at(0.0)?;
    let sp = scene_safety_potential(&scene, &scenario, &params);
    for (id, v) in &sp.per_agent {
        println!("agent {id}: SP = {v:.3}");
    }

    if let Some(path) = std::env::args().nth(1) {
        let sets = scene_claimed_sets(&scene, &scenario, &params);
        std::fs::write(&path, serde_json::to_string_pretty(&sets)?)?;
        println!("claimed sets written to {path}");
    }
    Ok(())
}
