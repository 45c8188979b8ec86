use tabsynth::dataset::{generate_dataset, read_annotations, read_wav, DatasetSpec, Manifest};
use tabsynth::{AugmentConfig, ComposerKind, KnowledgeBase};

fn spec(dir: &std::path::Path, count: usize, seed: u64) -> DatasetSpec {
    let mut s = DatasetSpec::new(count, seed, dir);
    s.composer_config.measures_per_piece = [2, 4];
    s
}

#[test]
fn same_spec_same_bytes() {
    let kb = KnowledgeBase::seed();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = generate_dataset(&spec(a.path(), 2, 7), &kb, 1).unwrap();
    let mb = generate_dataset(&spec(b.path(), 2, 7), &kb, 3).unwrap();
    assert_eq!(ma, Manifest { spec: ma.spec.clone(), ..mb.clone() });
    for clip in &ma.clips {
        for rel in [&clip.wav_path, &clip.annotation_path, &clip.midi_path] {
            assert_eq!(std::fs::read(a.path().join(rel)).unwrap(), std::fs::read(b.path().join(rel)).unwrap());
        }
    }
    assert_eq!(
        std::fs::read(a.path().join("manifest.json")).unwrap(),
        std::fs::read(b.path().join("manifest.json")).unwrap()
    );
}

#[test]
fn annotations_fit_audio() {
    let kb = KnowledgeBase::seed();
    let dir = tempfile::tempdir().unwrap();
    let m = generate_dataset(&spec(dir.path(), 5, 11), &kb, 2).unwrap();
    assert_eq!(m.clips.len(), 5);
    assert!(m.failures.is_empty());
    for clip in &m.clips {
        let audio = read_wav(&dir.path().join(&clip.wav_path)).unwrap();
        let events = read_annotations(&dir.path().join(&clip.annotation_path)).unwrap();
        assert_eq!(events.len(), clip.note_count);
        assert!((audio.duration() - clip.duration_s).abs() < 1e-9);
        assert!(audio.peak() <= 1.0);
        for e in &events {
            assert!(e.offset <= audio.duration());
            assert!((40..=88).contains(&e.pitch.midi()));
        }
    }
}

#[test]
fn every_file_listed_once() {
    let kb = KnowledgeBase::seed();
    let dir = tempfile::tempdir().unwrap();
    let m = generate_dataset(&spec(dir.path(), 3, 2), &kb, 2).unwrap();
    let mut listed: Vec<String> = m
        .clips
        .iter()
        .flat_map(|c| [c.wav_path.clone(), c.annotation_path.clone(), c.midi_path.clone()])
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path().join("clips"))
        .unwrap()
        .map(|e| format!("clips/{}", e.unwrap().file_name().to_string_lossy()))
        .collect();
    on_disk.push("manifest.json".into());
    on_disk.sort();
    assert_eq!(listed, on_disk);
}

#[test]
fn unwritable_output_fails_fast() {
    let kb = KnowledgeBase::seed();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("plain-file");
    std::fs::write(&blocker, b"x").unwrap();
    let err = generate_dataset(&spec(&blocker.join("out"), 1, 1), &kb, 1).unwrap_err();
    assert!(err.to_string().contains("plain-file"));
}

#[test]
fn failing_clips_are_recorded() {
    // a single pattern that needs six active strings can never fit open C
    let kb = KnowledgeBase::parse("only_c: I\n", "pattern six 4/4\nslot 0 P 6\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(dir.path(), 2, 1);
    s.composer_config.key_choices = vec![0];
    let m = generate_dataset(&s, &kb, 1).unwrap();
    assert!(m.clips.is_empty());
    assert_eq!(m.failures.len(), 2);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn greedy_and_gates_flow_into_manifest() {
    let kb = KnowledgeBase::seed();
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(dir.path(), 2, 9);
    s.composer = ComposerKind::Greedy;
    s.augment_config = AugmentConfig { effect_probability: 1.0, ..Default::default() };
    let m = generate_dataset(&s, &kb, 1).unwrap();
    for c in &m.clips {
        assert_eq!(c.pattern, "greedy");
        assert_eq!(c.effects.len(), 5);
    }
}
