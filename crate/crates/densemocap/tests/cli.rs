use std::path::Path;
use std::process::{Command, Output};

use densemocap::formats::calibration::read_calibration;
use densemocap::formats::landmarks::read_landmarks;
use densemocap::formats::metrics::read_metrics;
use densemocap::formats::model::read_model;
use densemocap::formats::motion::read_motion;
use densemocap::formats::observations::read_observations;
use densemocap::pipeline;
use densemocap_core::toy::stick_body;
use tempfile::tempdir;

const SCENE: &str = r#"{
  "format_version": 1,
  "frames": 3,
  "persons": [
    {"id": 0, "motion": {"procedural": {"seed": 4}}},
    {"id": 1, "motion": {"procedural": {"seed": 5, "position": [0.7, 0.2, 0.0]}}}
  ],
  "rig": {"ring": {"n": 5, "radius": 3.0, "height": 1.8, "image_width": 400, "image_height": 300}},
  "landmarks": {"fps": {"n": 96}},
  "noise": {"pixel_noise_std": 0.0, "sigma_report_jitter": 0.0, "rng_seed": 1}
}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_densemocap"))
        .current_dir(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, scene: &str) {
    std::fs::write(dir.join("scene.json"), scene).unwrap();
    ok(dir, &["synth", "--config", "scene.json", "--out", "run"]);
}

#[test]
fn landmarks_are_deterministic_and_cover_the_mesh() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["landmarks", "--count", "50", "--seed", "3", "--out", "a"]);
    ok(d, &["landmarks", "--count", "50", "--seed", "3", "--out", "b"]);
    ok(d, &["landmarks", "--count", "50", "--seed", "4", "--out", "c"]);
    let read = |s: &str| std::fs::read(d.join(s).join(pipeline::LANDMARKS_FILE)).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));

    let model = stick_body();
    let v = model.num_vertices();
    ok(d, &["landmarks", "--count", &v.to_string(), "--out", "all"]);
    let set = read_landmarks(&d.join("all").join(pipeline::LANDMARKS_FILE), &model).unwrap();
    let mut idx = set.indices.clone();
    idx.sort_unstable();
    assert_eq!(idx, (0..v).collect::<Vec<_>>());

    let printed = Command::new(env!("CARGO_BIN_EXE_densemocap"))
        .current_dir(d)
        .args(["landmarks", "--count", "64", "--out", "p"])
        .output()
        .unwrap();
    let total: usize = String::from_utf8(printed.stdout)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_whitespace().last()?.parse::<usize>().ok())
        .sum();
    assert_eq!(total, 64);

    let too_many = run(d, &["landmarks", "--count", &(v + 1).to_string(), "--out", "x"]);
    assert_eq!(too_many.status.code(), Some(2), "{}", stderr(&too_many));
}

#[test]
fn noiseless_synth_reprojects_the_ground_truth() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    synth(d, SCENE);
    let run_dir = d.join("run");
    let model = read_model(&run_dir.join(pipeline::MODEL_FILE)).unwrap();
    let rig = read_calibration(&run_dir.join(pipeline::CALIBRATION_FILE)).unwrap();
    let landmarks = read_landmarks(&run_dir.join(pipeline::LANDMARKS_FILE), &model).unwrap();
    let truth = read_motion(&run_dir.join(pipeline::GT_MOTION_FILE)).unwrap();
    let (info, frames) = read_observations(&run_dir.join(pipeline::OBSERVATIONS_FILE)).unwrap();
    assert_eq!(info.persons, vec![0, 1]);
    assert_eq!(frames.len(), 3);
    let mut worst: f64 = 0.0;
    let mut visible = 0;
    for (f, frame) in frames.iter().enumerate() {
        for (pi, person) in frame.persons.iter().enumerate() {
            let posed = model.lbs_forward(&truth.persons[pi].frames[f]).unwrap();
            for (c, cam) in rig.cameras.iter().enumerate() {
                for (l, &v) in landmarks.indices.iter().enumerate() {
                    let (px, _) = cam.project(&posed.vertices[v]).unwrap();
                    let o = &person.cameras[c][l];
                    worst = worst.max((o.mu - px).norm());
                    visible += usize::from(o.p > 0.5);
                }
            }
        }
    }
    assert!(worst < 1e-6, "{worst}");
    assert!(visible > 0);
}

#[test]
fn missing_calibration_is_an_input_error() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    synth(d, SCENE);
    let out = run(d, &["fit", "--input", "run", "--calibration", "nowhere/calib.json", "--out", "fit"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nowhere/calib.json"), "{}", stderr(&out));
}

#[test]
fn landmark_set_mismatch_is_reported() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    synth(d, SCENE);
    ok(d, &["landmarks", "--count", "96", "--seed", "11", "--out", "other"]);
    let out = run(d, &["fit", "--input", "run", "--landmarks", "other/landmarks.json", "--out", "fit"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("landmark"), "{}", stderr(&out));
}

#[test]
fn bad_configs_name_the_field() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    for (from, to, field) in [
        ("\"frames\": 3", "\"frames\": 0", "frames"),
        ("\"n\": 5", "\"n\": 0", "rig.ring.n"),
        ("\"pixel_noise_std\": 0.0", "\"pixel_noise_std\": -1.0", "noise"),
    ] {
        std::fs::write(d.join("bad.json"), SCENE.replace(from, to)).unwrap();
        let out = run(d, &["synth", "--config", "bad.json", "--out", "x"]);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains(&format!("`{field}`")), "{field}: {}", stderr(&out));
    }
    let out = run(d, &["synth", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`config`"));

    std::fs::write(d.join("fit.json"), r#"{"stages": []}"#).unwrap();
    synth(d, SCENE);
    let out = run(d, &["fit", "--input", "run", "--config", "fit.json", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("fit.json"));
}

#[test]
fn eval_of_ground_truth_against_itself() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    synth(d, SCENE);
    ok(d, &["eval", "--input", "run", "--pred", "run/motion_gt.jsonl", "--miou", "--resolution", "100x75", "--out", "ev"]);
    let m = read_metrics(&d.join("ev").join(pipeline::METRICS_FILE)).unwrap();
    assert_eq!(m.mpjpe_mm, 0.0);
    assert_eq!(m.pve_mm, 0.0);
    assert_eq!(m.miou, Some(1.0));
    assert_eq!(m.num_frames, 3);
    assert!(m.per_part.values().all(|p| p.pve_mm == 0.0));

    let bad = run(d, &["eval", "--input", "run", "--miou", "--resolution", "100by75", "--out", "ev"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn fit_recovers_a_noiseless_scene_and_reruns_identically() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    synth(d, SCENE);
    ok(d, &["fit", "--input", "run", "--out", "a", "--threads", "2"]);
    ok(d, &["fit", "--input", "run", "--out", "b", "--threads", "3"]);
    for name in [pipeline::FIT_MOTION_FILE, pipeline::TRACE_FILE, pipeline::SUMMARY_FILE, pipeline::ENERGY_FILE] {
        assert_eq!(std::fs::read(d.join("a").join(name)).unwrap(), std::fs::read(d.join("b").join(name)).unwrap(), "{name}");
    }
    ok(d, &["eval", "--input", "run", "--pred", "a/motion_fit.jsonl", "--out", "a"]);
    let m = read_metrics(&d.join("a").join(pipeline::METRICS_FILE)).unwrap();
    assert!(m.mpjpe_mm < 2.0, "{}", m.mpjpe_mm);
}
