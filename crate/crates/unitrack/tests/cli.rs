use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use unitrack::io;
use unitrack::pipeline::EvalReport;

fn unitrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitrack"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = unitrack(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.jsonl");
    ok(&[
        "simulate",
        "--out",
        s(&out),
        "--identities",
        "2",
        "--frames",
        "3",
        "--feature-dim",
        "4",
    ]);
    let frames = io::load_frames(&out).unwrap();
    assert_eq!(frames.len(), 3);
    assert!(frames.iter().all(|f| f.detections.iter().all(|d| d.feature.len() == 4)));
    assert!(dir.path().join("sim.archetypes.json").exists());
    assert!(dir.path().join("sim.manifest.json").exists());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    ok(&["simulate", "--out", s(&a), "--seed", "5", "--frames", "8"]);
    ok(&["simulate", "--out", s(&b), "--seed", "5", "--frames", "8"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.jsonl");
    ok(&["simulate", "--out", s(&c), "--seed", "6", "--frames", "8"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn invalid_simulation_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = unitrack(&["simulate", "--out", s(&dir.path().join("x.jsonl")), "--noise-sigma=-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise"));
}

#[test]
fn train_needs_two_identities() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("one.jsonl");
    ok(&["simulate", "--out", s(&sim), "--identities", "1", "--frames", "4"]);
    let out = unitrack(&["train", "--frames", s(&sim), "--out", s(&dir.path().join("p.json"))]);
    assert!(!out.status.success());
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    ok(&[
        "simulate",
        "--out",
        s(&p("train.jsonl")),
        "--seed",
        "1",
        "--frames",
        "30",
    ]);
    let arch = p("train.archetypes.json");
    for (name, seed) in [("dev.jsonl", "2"), ("test.jsonl", "3")] {
        ok(&[
            "simulate",
            "--out",
            s(&p(name)),
            "--seed",
            seed,
            "--frames",
            "15",
            "--archetypes",
            s(&arch),
        ]);
    }
    ok(&[
        "train",
        "--frames",
        s(&p("train.jsonl")),
        "--out",
        s(&p("params.json")),
        "--epochs",
        "20",
    ]);
    let losses = fs::read_to_string(p("params.loss.csv")).unwrap();
    let rows: Vec<f64> = losses
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.last() < rows.first());

    ok(&[
        "calibrate",
        "--frames",
        s(&p("dev.jsonl")),
        "--params",
        s(&p("params.json")),
        "--out",
        s(&p("calib.json")),
    ]);
    for f in ["calib.sweep.csv", "calib.histogram.csv", "calib.manifest.json"] {
        assert!(p(f).exists(), "{f}");
    }
    ok(&[
        "track",
        "--frames",
        s(&p("test.jsonl")),
        "--params",
        s(&p("params.json")),
        "--calibration",
        s(&p("calib.json")),
        "--out",
        s(&p("tracks.jsonl")),
    ]);
    ok(&[
        "eval",
        "--tracks",
        s(&p("tracks.jsonl")),
        "--frames",
        s(&p("test.jsonl")),
        "--out",
        s(&p("report.json")),
    ]);
    let report: EvalReport = io::load_json(p("report.json")).unwrap();
    assert!(report.pair_accuracy.unwrap() >= 0.99);
    assert_eq!(report.mot_counts.unwrap().mismatch, 0);
}

#[test]
fn eval_of_ground_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.jsonl");
    ok(&["simulate", "--out", s(&sim), "--frames", "6", "--dropout", "0"]);
    let frames = io::load_frames(&sim).unwrap();
    let tracks: Vec<_> = frames
        .iter()
        .flat_map(|f| {
            f.gt_boxes.iter().map(move |g| unitrack_core::assoc::TrackRecord {
                frame_index: f.frame_index,
                track_id: unitrack_core::TrackId(u64::from(g.id)),
                bbox: g.bbox,
                confidence: 1.0,
            })
        })
        .collect();
    let tp = dir.path().join("tracks.jsonl");
    io::save_tracks(&tracks, &tp).unwrap();
    let out = dir.path().join("report.json");
    ok(&["eval", "--tracks", s(&tp), "--frames", s(&sim), "--out", s(&out)]);
    let report: EvalReport = io::load_json(&out).unwrap();
    assert_eq!(report.mota, Some(1.0));
    assert_eq!(report.pair_accuracy, Some(1.0));
    assert_eq!(report.map, Some(1.0));
}

#[test]
fn eval_from_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.json");
    fs::write(
        &counts,
        r#"{"mot":{"fp":604,"miss":8,"mismatch":1,"gt_total":667},
            "pair":{"tp":5176,"tn":6098,"fp":2,"fn":16,"gp":5335,"gn":6615}}"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    ok(&["eval", "--counts", s(&counts), "--out", s(&out)]);
    let report: EvalReport = io::load_json(&out).unwrap();
    assert!((100.0 * report.mota.unwrap() - 8.10).abs() < 0.005);
    assert!((100.0 * report.pair_accuracy.unwrap() - 99.84).abs() < 0.005);
    assert_eq!(report.map, None);
}
