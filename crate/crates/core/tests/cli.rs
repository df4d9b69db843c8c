//! End-to-end tests of the command-line binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use traffic_fingerprint::synthetic;
use traffic_fingerprint::tracks_csv::{write_tracks, TrackSchema};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_traffic-fingerprint"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_crossing(dir: &Path) -> PathBuf {
    let path = dir.join("two_agents.csv");
    let scenario = synthetic::crossing_scenario(10.0, 2.0, 8.0, 2.5, 3.0, 0.1).unwrap();
    write_tracks(&scenario, &TrackSchema::interaction(), fs::File::create(&path).unwrap()).unwrap();
    path
}

fn files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evaluate_all_frames_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["evaluate", "--input", s(&input), "--all", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(&out, "json").len(), 31);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 32);
    assert!(summary.contains(",NA,"));
    assert!(out.join("effective_config.toml").exists());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files(&out, "json")[0]).unwrap()).unwrap();
    for key in ["t", "axes", "area_total", "area_by_group", "critical_prediction", "ground_truth"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["axes"].as_array().unwrap().len(), 12);
    // no staging leftovers
    assert!(fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with('.')));
}

#[test]
fn time_out_of_range_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["evaluate", "--input", s(&input), "--time", "99", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(files(&out, "json").is_empty() && files(&out, "toml").is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["evaluate", "--input", s(&input), "--formats", "json,csv,svg", "--out", s(out)]);
        assert!(o.status.success());
    }
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() > 60);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn effective_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let cfg = tmp.path().join("custom.toml");
    fs::write(&cfg, "[tq]\nnu_ref = 20.0\n[metrics.PET]\nalpha = 0.5\n").unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["evaluate", "--input", s(&input), "--config", s(&cfg), "--out", s(&a)]).status.success());
    let dumped = a.join("effective_config.toml");
    let text = fs::read_to_string(&dumped).unwrap();
    assert!(text.contains("nu_ref = 20.0"));
    assert!(run(&["evaluate", "--input", s(&input), "--config", s(&dumped), "--out", s(&b)]).status.success());
    assert_eq!(fs::read(a.join("summary.csv")).unwrap(), fs::read(b.join("summary.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[safety]\na_min = 3.0\n").unwrap();
    assert_eq!(run(&["evaluate", "--input", s(&input), "--config", s(&bad), "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--input", s(&input), "--formats", "pdf", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--input", s(&input), "--schema", "nope", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--input", s(&input), "--config", "/no/such.toml", "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_1_and_leave_no_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write_crossing(tmp.path());
    let broken = tmp.path().join("broken.csv");
    fs::write(&broken, "track_id,timestamp_ms,agent_type,x,y,vx,vy,psi_rad,length,width\n1,0,car,zero,0,0,0,0,4,2\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["evaluate", "--input", s(&good), s(&broken), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 0);
    assert_eq!(run(&["evaluate", "--input", "/no/such.csv", "--out", s(&out)]).status.code(), Some(1));
}

#[test]
fn multiple_inputs_get_their_own_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let first = write_crossing(tmp.path());
    let second = tmp.path().join("copy.csv");
    fs::copy(&first, &second).unwrap();
    let out = tmp.path().join("out");
    assert!(run(&["evaluate", "--input", s(&first), s(&second), "--time", "1.0", "--out", s(&out)]).status.success());
    assert_eq!(files(&out.join("two_agents"), "json").len(), 1);
    assert_eq!(files(&out.join("copy"), "json").len(), 1);
}

#[test]
fn fingerprint_single_and_overlay() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let single = tmp.path().join("single");
    assert!(run(&["fingerprint", "--input", s(&input), "--time", "1.0", "--out", s(&single)]).status.success());
    let svgs = files(&single, "svg");
    assert_eq!(svgs.len(), 1);
    let text = fs::read_to_string(&svgs[0]).unwrap();
    assert_eq!(text.matches("<line ").count(), 12);
    assert_eq!(text.matches(r#"class="fingerprint""#).count(), 1);
    assert_eq!(text.matches(r#"class="threshold""#).count(), 1);

    let overlay = tmp.path().join("overlay");
    let o = run(&["fingerprint", "--input", s(&input), "--overlay", "0.5,1.0,1.5", "--out", s(&overlay)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svgs = files(&overlay, "svg");
    assert_eq!(svgs.len(), 1);
    assert_eq!(fs::read_to_string(&svgs[0]).unwrap().matches(r#"class="fingerprint""#).count(), 3);

    let too_many = run(&["fingerprint", "--input", s(&input), "--overlay", "0.1,0.2,0.3,0.4", "--out", s(&overlay)]);
    assert_eq!(too_many.status.code(), Some(2));
}

#[test]
fn empty_selection_warns_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["fingerprint", "--input", s(&input), "--from", "20", "--to", "30", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no scenes selected"));
    assert!(files(&out, "svg").is_empty());
}

#[test]
fn report_prints_classification_table() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["report", "--input", s(&input), "--ground-truth", "TTC,PET", "--threshold", "1.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("SP") && stdout.contains("TQ_area") && stdout.contains("Sens"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("classification.json")).unwrap()).unwrap();
    assert_eq!(json["scenes"], 31);
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn report_without_critical_scenes_prints_na() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("calm.csv");
    let scenario = synthetic::sparse_scenario(2, 300.0, 10.0, 2.0, 0.1).unwrap();
    write_tracks(&scenario, &TrackSchema::interaction(), fs::File::create(&path).unwrap()).unwrap();
    let out = tmp.path().join("out");
    let o = run(&["report", "--input", s(&path), "--out", s(&out)]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("n/a"), "{stdout}");
}

#[test]
fn claimed_sets_can_be_dumped() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_crossing(tmp.path());
    let out = tmp.path().join("out");
    assert!(run(&["evaluate", "--input", s(&input), "--time", "0.5", "--dump-claimed-sets", "--out", s(&out)]).status.success());
    let dump = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).find(|p| s(p).ends_with("_claimed.json")).unwrap();
    let sets: serde_json::Value = serde_json::from_str(&fs::read_to_string(dump).unwrap()).unwrap();
    assert_eq!(sets.as_array().unwrap().len(), 2);
    assert_eq!(sets[0]["entries"].as_array().unwrap().len(), 41);
}

#[test]
fn bad_usage_exits_with_2() {
    assert_eq!(run(&["evaluate"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
