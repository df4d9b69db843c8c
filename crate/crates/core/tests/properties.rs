//! Property tests for the invariants of each module.

use proptest::prelude::*;

use traffic_fingerprint::fingerprint::{build_fingerprint, confusion, group_area, kiviat_area, AxisLayout};
use traffic_fingerprint::framework::{Direction, MetricDescriptor, MetricGroup, MetricValue, SceneEvaluation, Scope};
use traffic_fingerprint::geometry::{overlap_area, Polygon, Vec2};
use traffic_fingerprint::pairwise::{self, euclidean_distance, ttc, wttc};
use traffic_fingerprint::safety_potential::{
    claimed_set, fast_procedure, rho_between, rho_norm, slow_procedure, SafetyProcedureParams,
};
use traffic_fingerprint::scene::{derive_kinematics, AgentState, Scenario, Scene, Track};
use traffic_fingerprint::synthetic::straight_track;
use traffic_fingerprint::tracks_csv::{parse_tracks, write_tracks, TrackSchema};
use traffic_fingerprint::traffic_quality::{tq_indi, tq_macro, tq_micro, tq_nano, TqConfig};

fn quad() -> impl Strategy<Value = Polygon> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.3..3.0f64, 0.3..3.0f64, prop::collection::vec(0.0..std::f64::consts::TAU, 4))
        .prop_filter("distinct angles", |(_, _, _, _, a)| {
            let mut s = a.clone();
            s.sort_by(f64::total_cmp);
            s.windows(2).all(|w| w[1] - w[0] > 1e-3) && s[3] - s[0] < std::f64::consts::TAU - 1e-3
        })
        .prop_map(|(cx, cy, rx, ry, mut angles)| {
            angles.sort_by(f64::total_cmp);
            Polygon::new(angles.iter().map(|t| Vec2::new(cx + rx * t.cos(), cy + ry * t.sin())).collect()).unwrap()
        })
}

fn agent() -> impl Strategy<Value = AgentState> {
    (-50.0..50.0f64, -50.0..50.0f64, -3.14..3.14f64, 0.0..30.0f64, 3.0..6.0f64, 1.5..2.2f64)
        .prop_map(|(x, y, h, v, l, w)| AgentState::moving("a", 0.0, Vec2::new(x, y), h, v).with_size(l, w))
}

fn vehicles() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64, 0.0..30.0f64), 1..12)
}

fn scene_of(vs: &[(f64, f64, f64)]) -> Scene {
    Scene::new(0.0, vs.iter().enumerate().map(|(i, &(x, y, v))| AgentState::moving(i as u64, 0.0, Vec2::new(x, y), 0.0, v)).collect())
}

fn eval_with(radii: &[Option<f64>]) -> SceneEvaluation {
    let values = radii
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let name = format!("m{i}");
            let descriptor = MetricDescriptor::new(&name, MetricGroup::Universal, Direction::IncreasingCriticality);
            (name, MetricValue { descriptor, scope: Scope::Scene, raw: *r, normalized: *r })
        })
        .collect();
    SceneEvaluation { t: 0.0, values, details: Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn overlap_symmetric_and_bounded(p in quad(), q in quad()) {
        let a = overlap_area(&p, &q).unwrap();
        prop_assert!((a - overlap_area(&q, &p).unwrap()).abs() < 1e-9);
        prop_assert!(a >= 0.0 && a <= p.area().min(q.area()) + 1e-9);
        let far = Polygon::new(q.vertices().iter().map(|v| *v + Vec2::new(100.0, 0.0)).collect()).unwrap();
        prop_assert_eq!(overlap_area(&p, &far).unwrap(), 0.0);
        prop_assert!((overlap_area(&p, &p).unwrap() - p.area()).abs() < 1e-9);
    }

    #[test]
    fn pairwise_symmetry(a in agent(), b in agent()) {
        prop_assert_eq!(euclidean_distance(&a, &b), euclidean_distance(&b, &a));
        match (wttc(&a, &b), wttc(&b, &a)) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0)),
            (x, y) => prop_assert_eq!(x, y),
        }
        if let Some(w) = wttc(&a, &b) {
            prop_assert!(w >= 0.0);
        }
    }

    #[test]
    fn ttc_matches_forward_simulation(gap in 1.0..60.0f64, vl in 0.0..20.0f64, dv in 0.5..15.0f64) {
        let dt = 0.01;
        let vf = vl + dv;
        let f = AgentState::moving("f", 0.0, Vec2::ZERO, 0.0, vf);
        let l = AgentState::moving("l", 0.0, Vec2::new(gap + 4.5, 0.0), 0.0, vl);
        let predicted = ttc(&f, &l).unwrap();
        let mut k = 0usize;
        loop {
            let t = k as f64 * dt;
            let (pf, pl) = (f.position.x + vf * t, l.position.x + vl * t);
            let fa = AgentState { position: Vec2::new(pf, 0.0), ..f.clone() };
            let la = AgentState { position: Vec2::new(pl, 0.0), ..l.clone() };
            if overlap_area(&fa.footprint(), &la.footprint()).unwrap() > 0.0 || pl - pf <= 4.5 {
                prop_assert!((t - predicted).abs() <= dt + 1e-9, "overlap at {} vs ttc {}", t, predicted);
                break;
            }
            k += 1;
        }
    }

    #[test]
    fn intersection_metrics_nonnegative(va in 3.0..15.0f64, vb in 3.0..15.0f64, ta in 1.0..5.0f64, tb in 1.0..5.0f64, angle in 0.4..2.7f64) {
        let dt = 0.1;
        let a = straight_track("1", 0.0, Vec2::new(-va * ta, 0.0), 0.0, va, 80, dt).unwrap();
        let start_b = Vec2::from_angle(angle) * (-vb * tb);
        let b = straight_track("2", 0.0, start_b, angle, vb, 80, dt).unwrap();
        let zone = pairwise::recorded_conflict_zone(&a, &b).unwrap();
        prop_assert!(zone.arc_a >= 0.0 && zone.arc_b >= 0.0);
        prop_assert!(pairwise::pet(&a, &b, &zone).unwrap() >= 0.0);
        prop_assert!(pairwise::et(&a, &zone).unwrap() >= 0.0);
        let live = pairwise::conflict_zone(&a, &b, 0.0, 8.0).unwrap();
        let gt = pairwise::gap_time(&a.states()[0], &b.states()[0], &live).unwrap();
        prop_assert!(gt >= 0.0);
    }

    #[test]
    fn parallel_paths_have_no_zone(offset in 3.0..40.0f64, va in 1.0..20.0f64, vb in 1.0..20.0f64) {
        let a = straight_track("1", 0.0, Vec2::ZERO, 0.0, va, 50, 0.1).unwrap();
        let b = straight_track("2", 0.0, Vec2::new(0.0, offset), 0.0, vb, 50, 0.1).unwrap();
        prop_assert!(pairwise::recorded_conflict_zone(&a, &b).is_none());
        prop_assert!(pairwise::conflict_zone(&a, &b, 0.0, 5.0).is_none());
    }

    #[test]
    fn tq_uniform_traffic_is_uncritical(vs in vehicles(), speed in 0.0..40.0f64) {
        let cfg = TqConfig::default();
        let uniform: Vec<_> = vs.iter().map(|&(x, y, _)| (x, y, speed)).collect();
        let scene = scene_of(&uniform);
        prop_assert!(tq_macro(&scene, &cfg).unwrap().abs() < 1e-12);
        for s in &scene.states {
            prop_assert!(tq_nano(&scene, &s.agent_id, &cfg).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn tq_micro_monotone_in_ego_speed(vs in vehicles(), v1 in 0.0..30.0f64, v2 in 0.0..30.0f64) {
        let cfg = TqConfig::default();
        let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        let mut slow = vs.clone();
        slow[0].2 = lo;
        let mut fast = vs.clone();
        fast[0].2 = hi;
        let ego = 0u64.into();
        prop_assert!(tq_micro(&scene_of(&slow), &ego, &cfg) <= tq_micro(&scene_of(&fast), &ego, &cfg));
    }

    #[test]
    fn tq_order_invariant(vs in vehicles()) {
        let cfg = TqConfig::default();
        let a = scene_of(&vs);
        let mut reversed = a.clone();
        reversed.states.reverse();
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() < 1e-12,
            (x, y) => x == y,
        };
        prop_assert!(close(tq_macro(&a, &cfg), tq_macro(&reversed, &cfg)));
        for s in &a.states {
            prop_assert_eq!(tq_micro(&a, &s.agent_id, &cfg), tq_micro(&reversed, &s.agent_id, &cfg));
            prop_assert!(close(tq_nano(&a, &s.agent_id, &cfg), tq_nano(&reversed, &s.agent_id, &cfg)));
        }
    }

    #[test]
    fn tq_indi_bounded_by_references(speeds in prop::collection::vec(0.0..13.89f64, 2..40)) {
        let cfg = TqConfig::default();
        let dt = 0.1;
        let states = speeds
            .iter()
            .enumerate()
            .map(|(k, &v)| AgentState::moving("e", k as f64 * dt, Vec2::new(k as f64, 0.0), 0.0, v).with_acceleration(1.0))
            .collect();
        let track = Track::new("e".into(), states, dt).unwrap();
        let v = tq_indi(&track, track.t_end(), &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn slow_arc_dominates_fast_arc(v0 in 0.0..40.0f64, t in 0.0..6.0f64) {
        let p = SafetyProcedureParams::default();
        prop_assert!(slow_procedure(v0, &p, t).arc >= fast_procedure(v0, &p, t).arc - 1e-12);
        if t > p.t_react {
            let later = slow_procedure(v0, &p, t + 0.1);
            prop_assert!(later.speed <= slow_procedure(v0, &p, t).speed);
        }
    }

    #[test]
    fn rho_norm_increasing_and_bounded(a in 0.0..1e3f64, b in 0.0..1e3f64) {
        let p = SafetyProcedureParams::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(rho_norm(lo, &p) <= rho_norm(hi, &p));
        prop_assert!((0.0..=1.0).contains(&rho_norm(lo, &p)));
    }

    #[test]
    fn smaller_margin_never_increases_rho(
        (xa, ya, ha, va) in (-20.0..20.0f64, -20.0..20.0f64, -3.1..3.1f64, 0.0..20.0f64),
        (xb, yb, hb, vb) in (-20.0..20.0f64, -20.0..20.0f64, -3.1..3.1f64, 0.0..20.0f64),
        margin in 0.0..1.5f64,
    ) {
        let a = straight_track("a", 0.0, Vec2::new(xa, ya), ha, va, 50, 0.1).unwrap();
        let b = straight_track("b", 0.0, Vec2::new(xb, yb), hb, vb, 50, 0.1).unwrap();
        let wide = SafetyProcedureParams { margin, ..SafetyProcedureParams::default() };
        let tight = SafetyProcedureParams { margin: 0.0, ..wide.clone() };
        let rho = |p: &SafetyProcedureParams| rho_between(&claimed_set(&a, 0.0, p).unwrap(), &claimed_set(&b, 0.0, p).unwrap());
        prop_assert!(rho(&tight) <= rho(&wide) + 1e-9);
    }

    #[test]
    fn stopped_agent_has_zero_rho(x in -5.0..5.0f64, vb in 0.0..20.0f64) {
        let p = SafetyProcedureParams::default();
        let stopped = straight_track("a", 0.0, Vec2::new(x, 0.0), 0.0, 0.0, 50, 0.1).unwrap();
        let other = straight_track("b", 0.0, Vec2::new(-10.0, 0.0), 0.0, vb, 50, 0.1).unwrap();
        let rho = rho_between(&claimed_set(&stopped, 0.0, &p).unwrap(), &claimed_set(&other, 0.0, &p).unwrap());
        prop_assert_eq!(rho, 0.0);
    }

    #[test]
    fn kiviat_reversal_and_isolated_spike(r in prop::collection::vec(0.0..=1.0f64, 3..20), spike in 0.0..=1.0f64, k in any::<prop::sample::Index>()) {
        let mut rev = r.clone();
        rev.reverse();
        prop_assert!((kiviat_area(&r).unwrap() - kiviat_area(&rev).unwrap()).abs() < 1e-12);
        let mut single = vec![0.0; r.len()];
        single[k.index(r.len())] = spike;
        prop_assert_eq!(kiviat_area(&single).unwrap(), 0.0);
    }

    #[test]
    fn group_areas_bounded_by_total(r in prop::collection::vec(prop::option::of(0.0..=1.0f64), 12)) {
        let groups = [MetricGroup::TrafficQuality, MetricGroup::Intersection, MetricGroup::Universal, MetricGroup::Following];
        let layout = AxisLayout::new((0..12).map(|i| (format!("m{i}"), groups[(i / 4).min(3) + usize::from(i == 11)])).collect()).unwrap();
        let fp = build_fingerprint(&eval_with(&r), &layout);
        let sum: f64 = MetricGroup::ALL.iter().map(|&g| group_area(&fp, g)).sum();
        prop_assert!(sum <= fp.area_total + 1e-12);
        prop_assert!((0.0..=1.0).contains(&fp.area_total));
    }

    #[test]
    fn confusion_fractions(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
        let (pred, actual): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let c = confusion(&pred, &actual).unwrap();
        prop_assert!((c.tp + c.tn + c.fp + c.fn_ - 1.0).abs() < 1e-12);
        for v in [c.sensitivity(), c.specificity()].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn csv_round_trip(tracks in prop::collection::vec((agent(), 2usize..20, 0usize..10), 1..5)) {
        let dt = 0.1;
        let tracks: Vec<Track> = tracks
            .iter()
            .enumerate()
            .map(|(i, (a, n, start))| {
                let t0 = *start as f64 * dt;
                let states = (0..*n)
                    .map(|k| {
                        let t = ((start + k) as f64 * dt * 1000.0).round() / 1000.0;
                        AgentState { agent_id: (i as u64 + 1).into(), t, position: a.position + a.velocity * (t - t0), ..a.clone() }
                    })
                    .collect();
                Track::new((i as u64 + 1).into(), states, dt).unwrap()
            })
            .collect();
        let scenario = Scenario::new(tracks, dt).unwrap();
        let schema = TrackSchema::interaction();
        let mut buf = Vec::new();
        write_tracks(&scenario, &schema, &mut buf).unwrap();
        let back = parse_tracks(buf.as_slice(), &schema).unwrap();
        prop_assert_eq!(back.tracks().len(), scenario.tracks().len());
        for (id, tr) in scenario.tracks() {
            let other = back.track(id).unwrap();
            prop_assert_eq!(other.len(), tr.len());
            for (x, y) in tr.states().iter().zip(other.states()) {
                prop_assert!((x.t - y.t).abs() < 1e-9);
                prop_assert!(x.position.distance(y.position) < 1e-9);
                prop_assert!(x.velocity.distance(y.velocity) < 1e-9);
                prop_assert!((x.speed - y.speed).abs() < 1e-9);
                prop_assert!((x.heading - y.heading).abs() < 1e-9);
                prop_assert!((x.acceleration - y.acceleration).abs() < 1e-9);
                prop_assert!((x.length - y.length).abs() < 1e-9 && (x.width - y.width).abs() < 1e-9);
                prop_assert_eq!(x.class, y.class);
            }
        }
    }

    #[test]
    fn kinematics_from_constant_acceleration(v0 in 0.0..20.0f64, acc in -2.0..2.0f64) {
        let dt = 0.1;
        let n = 40;
        let states = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                let s = v0 * t + acc * t * t / 2.0;
                AgentState::moving("k", t, Vec2::new(s, 0.0), 0.0, 0.0)
            })
            .collect();
        // keep the speed positive so no direction reversal occurs
        prop_assume!(v0 + acc * (n as f64 * dt) > 0.5);
        let derived = derive_kinematics(&Track::new("k".into(), states, dt).unwrap()).unwrap();
        for s in derived.states() {
            prop_assert!((s.speed - (v0 + acc * s.t)).abs() < 1e-2, "t={} speed {} vs {}", s.t, s.speed, v0 + acc * s.t);
        }
    }

    #[test]
    fn scenes_hold_valid_states(tracks in prop::collection::vec((agent(), 2usize..15, 0usize..10), 1..5), q in 0usize..25) {
        let dt = 0.1;
        let tracks: Vec<Track> = tracks
            .iter()
            .enumerate()
            .map(|(i, (a, n, start))| {
                let states = (0..*n).map(|k| AgentState { agent_id: (i as u64).into(), t: (start + k) as f64 * dt, ..a.clone() }).collect();
                Track::new((i as u64).into(), states, dt).unwrap()
            })
            .collect();
        let scenario = Scenario::new(tracks, dt).unwrap();
        let (lo, hi) = scenario.time_range();
        let t = q as f64 * dt;
        match scenario.scene_at(t) {
            Ok(scene) => {
                prop_assert!(t >= lo - dt && t <= hi + dt);
                for s in &scene.states {
                    prop_assert!((s.t - scene.t).abs() < 1e-9);
                    prop_assert!(s.speed >= 0.0 && s.length > 0.0 && s.width > 0.0);
                    prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&s.heading));
                }
            }
            Err(_) => prop_assert!(t < lo - dt / 2.0 || t > hi + dt / 2.0),
        }
    }
}

#[test]
fn kiviat_area_depends_on_adjacency() {
    let r = [1.0, 1.0, 0.0, 0.0, 0.5, 0.5];
    let shuffled = [1.0, 0.0, 1.0, 0.0, 0.5, 0.5];
    assert!((kiviat_area(&r).unwrap() - kiviat_area(&shuffled).unwrap()).abs() > 0.1);
}
