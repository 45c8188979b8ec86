use std::path::Path;
use std::process::{Command, Output};

fn tabsynth(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabsynth"))
        .args(args)
        .current_dir(dir)
        .env_remove("TABSYNTH_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const NOTE: &str = r#"{"onset":0.500000,"offset":1.000000,"midi":64,"string":1,"fret":0,"amplitude":0.800000}"#;

#[test]
fn compose_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = tabsynth(&["compose", "--seed", "1", "--composer", "fingerpicking", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    let c = tabsynth(&["compose", "--seed", "2"], dir.path());
    assert_ne!(c.stdout, a);
}

#[test]
fn greedy_measures_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let o = tabsynth(&["compose", "--composer", "greedy", "--measures", "4", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["score"]["measure_count"], 4);
    assert_eq!(v["info"]["pattern"], "greedy");
}

#[test]
fn missing_database_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = tabsynth(&["compose", "--patterns", "no/such/patterns.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/patterns.txt"));
}

#[test]
fn malformed_database_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "pattern x 4/4\nslot 99 P 1\n").unwrap();
    let o = tabsynth(&["compose", "--patterns", "p.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn generate_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    for (out, workers) in [("d1", "1"), ("d2", "4")] {
        let o = tabsynth(&["generate", "--count", "6", "--seed", "7", "--workers", workers, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).trim().ends_with("manifest.json"));
    }
    for name in ["manifest.json", "clips/clip_00003.wav", "clips/clip_00005.jsonl", "clips/clip_00000.mid"] {
        let a = std::fs::read(dir.path().join("d1").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("d2").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn generate_count_zero_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tabsynth(&["generate", "--count", "0", "--out", "d"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generate_no_augment() {
    let dir = tempfile::tempdir().unwrap();
    let o = tabsynth(&["generate", "--count", "4", "--seed", "1", "--no-augment", "--out", "d"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("d/manifest.json")).unwrap()).unwrap();
    let clips = m["clips"].as_array().unwrap();
    assert_eq!(clips.len(), 4);
    assert!(clips.iter().all(|c| c["effects"].as_array().unwrap().is_empty()));
}

#[test]
fn generate_unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("file"), b"x").unwrap();
    let o = tabsynth(&["generate", "--count", "1", "--out", "file/sub"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("file/sub"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "seed = 5\ncomposer = \"greedy\"\n[composer_config]\nmeasures_per_piece = [2, 2]\n",
    )
    .unwrap();
    let from_cfg = tabsynth(&["--config", "cfg.toml", "compose"], dir.path());
    assert!(from_cfg.status.success(), "{}", stderr(&from_cfg));
    let v: serde_json::Value = serde_json::from_slice(&from_cfg.stdout).unwrap();
    assert_eq!(v["score"]["measure_count"], 2);
    assert_eq!(v["info"]["pattern"], "greedy");

    let flagged = tabsynth(&["--config", "cfg.toml", "compose", "--measures", "3"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!(v["score"]["measure_count"], 3);

    let via_env = Command::new(env!("CARGO_BIN_EXE_tabsynth"))
        .args(["compose"])
        .current_dir(dir.path())
        .env("TABSYNTH_CONFIG", "cfg.toml")
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, from_cfg.stdout);

    std::fs::write(dir.path().join("bad.toml"), "seeed = 1\n").unwrap();
    assert_eq!(tabsynth(&["--config", "bad.toml", "compose"], dir.path()).status.code(), Some(2));
}

#[test]
fn evaluate_identity_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ref.jsonl"), format!("{NOTE}\n")).unwrap();
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let o = tabsynth(&["evaluate", "--ref", "ref.jsonl", "--est", "ref.jsonl"], dir.path());
    assert_eq!(stdout(&o).trim(), "P 100.00 R 100.00 F1 100.00");
    let o = tabsynth(&["evaluate", "--ref", "empty.jsonl", "--est", "ref.jsonl"], dir.path());
    assert_eq!(stdout(&o).trim(), "P 0.00 R 0.00 F1 0.00");
    assert!(o.status.success());
}

#[test]
fn evaluate_onset_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ref.jsonl"), format!("{NOTE}\n")).unwrap();
    std::fs::write(dir.path().join("est.jsonl"), NOTE.replace("0.500000", "0.540000") + "\n").unwrap();
    let o = tabsynth(&["evaluate", "--ref", "ref.jsonl", "--est", "est.jsonl"], dir.path());
    assert_eq!(stdout(&o).trim(), "P 100.00 R 100.00 F1 100.00");
    let o = tabsynth(&["evaluate", "--ref", "ref.jsonl", "--est", "est.jsonl", "--onset-tol", "0.025"], dir.path());
    assert_eq!(stdout(&o).trim(), "P 0.00 R 0.00 F1 0.00");
}

#[test]
fn evaluate_malformed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{\"onset\": oops}\n").unwrap();
    std::fs::write(dir.path().join("ok.jsonl"), "").unwrap();
    let o = tabsynth(&["evaluate", "--ref", "bad.jsonl", "--est", "ok.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_augment_inspect_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(tabsynth(&["compose", "--seed", "4", "--measures", "2", "--out", "p.json"], d).status.success());
    let o = tabsynth(&["synth", "--in", "p.json", "--out", "p.wav", "--annotations", "p.jsonl", "--seed", "1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = tabsynth(&["augment", "--in", "p.wav", "--out", "q.wav", "--probability", "1", "--seed", "2"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let effects: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(effects.as_array().unwrap().len(), 5);

    let o = tabsynth(&["synth", "--in", "p.jsonl", "--out", "r.wav"], d);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = tabsynth(&["inspect", "q.wav"], d);
    assert!(stdout(&o).contains("16000 Hz"));
    let o = tabsynth(&["inspect", "p.jsonl"], d);
    assert!(stdout(&o).contains("notes"));
    assert!(tabsynth(&["generate", "--count", "2", "--out", "ds"], d).status.success());
    let o = tabsynth(&["inspect", "ds"], d);
    assert!(stdout(&o).contains("clip_00001"), "{}", stdout(&o));
    assert_eq!(tabsynth(&["inspect", "nothing-here"], d).status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = tabsynth(&["generate", "--help"], dir.path());
    let text = stdout(&o);
    for flag in ["--count", "--seed", "--out", "--workers", "--no-augment", "--composer", "--measures", "--config"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}
