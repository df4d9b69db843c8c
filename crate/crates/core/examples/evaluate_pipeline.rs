//! End-to-end run of the command-line pipeline on a generated recording:
//! writes the CSV, then runs `evaluate`, `fingerprint --overlay` and `report`.
//!
//! `cargo run --example evaluate_pipeline [out_dir]` (default: pipeline_out).

use std::error::Error;
use std::path::PathBuf;

use traffic_fingerprint::cli::main_with_args;
use traffic_fingerprint::synthetic;
use traffic_fingerprint::tracks_csv::{write_tracks, TrackSchema};

fn main() -> Result<(), Box<dyn Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()));
    std::fs::create_dir_all(&out)?;
    let csv = out.join("crossing.csv");
    let scenario = synthetic::crossing_scenario(10.0, 3.0, 9.0, 3.6, 6.0, 0.1)?;
    write_tracks(&scenario, &TrackSchema::interaction(), std::fs::File::create(&csv)?)?;

    let input = csv.to_string_lossy().into_owned();
    let dir = |sub: &str| out.join(sub).to_string_lossy().into_owned();
    let runs: [Vec<String>; 3] = [
        ["evaluate", "--input", &input, "--from", "1.0", "--to", "3.0", "--formats", "json,csv,svg", "--out", &dir("evaluate")]
            .map(String::from)
            .to_vec(),
        ["fingerprint", "--input", &input, "--all", "--overlay", "0.5,2.0,3.5", "--out", &dir("fingerprint")]
            .map(String::from)
            .to_vec(),
        ["report", "--input", &input, "--all", "--ground-truth", "TTC,PET", "--threshold", "1.5", "--out", &dir("report")]
            .map(String::from)
            .to_vec(),
    ];
    for args in runs {
        let code = main_with_args(std::iter::once("traffic-fingerprint".to_string()).chain(args.iter().cloned()));
        println!("{} -> exit {code}", args[0]);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
