//! Two-actor metrics: distance, TTC and WTTC on a rear-end approach, then
//! the conflict zone, PET, ET, GT and TJ of a perpendicular crossing.

use std::error::Error;

use traffic_fingerprint::pairwise::{self, ZoneSide};
use traffic_fingerprint::synthetic;

fn main() -> Result<(), Box<dyn Error>> {
    let following = synthetic::following_scenario(20.0, 5.0, 30.0, 3.0, 0.1)?;
    println!("rear-end approach, follower 20 m/s, leader 5 m/s:");
    for t in [0.0, 0.5, 1.0, 1.5] {
        let scene = following.scene_at(t)?;
        let (a, b) = (&scene.states[0], &scene.states[1]);
        let ttc = pairwise::leader_follower(a, b, 2.0, 30f64.to_radians()).and_then(|(f, l)| pairwise::ttc(f, l));
        println!(
            "  t={t:.1}s  dist {:6.2} m  TTC {:?}  WTTC {:?}",
            pairwise::euclidean_distance(a, b),
            ttc,
            pairwise::wttc(a, b)
        );
    }

    // agent 1 reaches the crossing after 3 s, agent 2 after 4.5 s
    let crossing = synthetic::crossing_scenario(10.0, 3.0, 8.0, 4.5, 8.0, 0.1)?;
    let (ta, tb) = (crossing.track(&"1".into()).unwrap(), crossing.track(&"2".into()).unwrap());
    let zone = pairwise::recorded_conflict_zone(ta, tb).ok_or("paths do not cross")?;
    println!("\ncrossing at ({:.2}, {:.2}), zone area {:.2} m²", zone.point.x, zone.point.y, zone.area.area());
    println!("  PET {:?} s", pairwise::pet(ta, tb, &zone));
    println!("  ET  {:?} s (agent 1)", pairwise::et(ta, &zone));
    for t in [0.0, 1.0, 2.0] {
        let live = pairwise::conflict_zone(ta, tb, t, 5.0).ok_or("no zone within the horizon")?;
        let (sa, sb) = (ta.state_at(t).unwrap(), tb.state_at(t).unwrap());
        println!(
            "  t={t:.1}s  GT {:.3} s  TJ {:.2} / {:.2} m",
            pairwise::gap_time(sa, sb, &live).unwrap_or(f64::NAN),
            pairwise::trajectory_distance(&live, ZoneSide::A),
            pairwise::trajectory_distance(&live, ZoneSide::B)
        );
    }
    Ok(())
}
