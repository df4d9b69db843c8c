//! Parse an INTERACTION-style track CSV and walk through its scenes.
//!
//! Run with `cargo run --example parse_tracks [path/to/tracks.csv]`.
//! Without a path a small embedded recording is used.

use std::error::Error;

use traffic_fingerprint::tracks_csv::{parse_tracks, TrackSchema};

const SAMPLE: &str = "\
track_id,frame_id,timestamp_ms,agent_type,x,y,vx,vy,psi_rad,length,width
1,1,0,car,0.0,0.0,10.0,0.0,0.0,4.5,1.8
1,2,100,car,1.0,0.0,10.0,0.0,0.0,4.5,1.8
1,3,200,car,2.0,0.0,10.0,0.0,0.0,4.5,1.8
2,2,100,pedestrian/bicycle,5.0,-3.0,0.0,1.2,1.5708,,
2,3,200,pedestrian/bicycle,5.0,-2.88,0.0,1.2,1.5708,,
";

fn main() -> Result<(), Box<dyn Error>> {
    let schema = TrackSchema::interaction();
    let scenario = match std::env::args().nth(1) {
        Some(path) => parse_tracks(std::fs::File::open(path)?, &schema)?,
        None => parse_tracks(SAMPLE.as_bytes(), &schema)?,
    };
    let (t0, t1) = scenario.time_range();
    println!("{} tracks, dt = {} s, t in [{t0}, {t1}]", scenario.tracks().len(), scenario.dt());
    for t in scenario.frame_times().into_iter().take(5) {
        let scene = scenario.scene_at(t)?;
        println!("t = {t:.2} s: {} agents ({} vehicles)", scene.states.len(), scene.vehicles_only().states.len());
        for s in &scene.states {
            println!(
                "  {:>4} {:<10} pos ({:7.2}, {:7.2}) speed {:5.2} m/s accel {:5.2} m/s² size {}x{}",
                s.agent_id.to_string(),
                s.class.label(),
                s.position.x,
                s.position.y,
                s.speed,
                s.acceleration,
                s.length,
                s.width
            );
        }
    }
    Ok(())
}
