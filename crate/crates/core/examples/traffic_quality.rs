//! Inverse traffic quality on a busy synthetic road: scene dispersion plus
//! the micro, nano and individual values of every vehicle.

use std::error::Error;

use traffic_fingerprint::synthetic;
use traffic_fingerprint::traffic_quality::{braking_distance, tq_macro, tq_vector, TqConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let cfg = TqConfig::default();
    let scenario = synthetic::dense_traffic_scenario(12, 60, 0.1)?;
    let t = 4.0;
    let scene = scenario.scene_at(t)?;
    println!("t = {t} s, TQ_macro = {:.4}", tq_macro(&scene, &cfg).unwrap_or(0.0));
    println!("{:>4} {:>7} {:>9} {:>7} {:>7} {:>7}", "id", "speed", "brake [m]", "micro", "nano", "indi");
    for s in &scene.states {
        let track = scenario.track(&s.agent_id).unwrap();
        if let Some(v) = tq_vector(&scene, track, &cfg) {
            println!(
                "{:>4} {:7.2} {:9.2} {:7.3} {:7.3} {:7.3}",
                s.agent_id.to_string(),
                s.speed,
                braking_distance(s.speed, &cfg),
                v.micro,
                v.nano,
                v.indi.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
