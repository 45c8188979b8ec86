//! End-to-end dataset generation: compose, perform, synthesize, augment, and
//! write WAV, annotation and MIDI files plus a manifest.

pub mod annotations;
pub mod midi;
pub mod wav;

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use annotations::{format_annotations, parse_annotations, read_annotations, write_annotations};
pub use midi::{encode_midi, write_midi, TICKS_PER_QUARTER};
pub use wav::{read_wav, write_wav, WAV_HEADER_LEN};

use crate::augmentation::{augment_chain, AppliedEffect, AugmentConfig};
use crate::composer::{compose, ComposerConfig, ComposerKind, FingeringTable};
use crate::knowledge::KnowledgeBase;
use crate::music::TimeSignature;
use crate::performance::{humanize_pitch, humanize_timing, score_to_events, sort_events, HumanizeConfig};
use crate::seed;
use crate::synthesis::{render_events, sample_note_params, SAMPLE_RATE};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CLIP_DIR: &str = "clips";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("invalid dataset spec: {0}")]
    Spec(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn wav(path: &Path, e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(source) => DatasetError::io(path, source),
            other => DatasetError::Format { path: path.to_path_buf(), message: other.to_string() },
        }
    }
}

/// Everything that determines a dataset. The output directory is where it goes,
/// not what it is, so it stays out of the hash and the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub clip_count: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub composer: ComposerKind,
    #[serde(default)]
    pub composer_config: ComposerConfig,
    #[serde(default)]
    pub humanize_config: HumanizeConfig,
    #[serde(default)]
    pub augment_config: AugmentConfig,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl DatasetSpec {
    pub fn new(clip_count: usize, master_seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            clip_count,
            master_seed,
            composer: ComposerKind::default(),
            composer_config: ComposerConfig::default(),
            humanize_config: HumanizeConfig::default(),
            augment_config: AugmentConfig::default(),
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.clip_count < 1 {
            return Err(DatasetError::Spec("clip_count must be at least 1".into()));
        }
        self.composer_config.validate().map_err(|e| DatasetError::Spec(e.to_string()))?;
        self.humanize_config.validate().map_err(|e| DatasetError::Spec(e.to_string()))?;
        self.augment_config.validate().map_err(|e| DatasetError::Spec(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("spec serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub index: usize,
    pub seed: u64,
    /// Paths relative to the dataset root.
    pub wav_path: String,
    pub annotation_path: String,
    pub midi_path: String,
    pub duration_s: f64,
    pub note_count: usize,
    pub tempo_bpm: f64,
    pub time_signature: TimeSignature,
    pub key: String,
    pub progression: String,
    pub pattern: String,
    pub effects: Vec<AppliedEffect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipFailure {
    pub clip_id: String,
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub spec: DatasetSpec,
    pub spec_hash: String,
    pub knowledge_hash: String,
    pub sample_rate: u32,
    pub clips: Vec<ClipRecord>,
    pub failures: Vec<ClipFailure>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| DatasetError::Format { path: path.to_path_buf(), message: e.to_string() })
    }
}

pub fn clip_id(index: usize) -> String {
    format!("clip_{index:05}")
}

/// Produces a dataset. Per-clip problems are recorded in the manifest and do
/// not stop the run; spec and output-directory problems fail before any work.
pub fn generate_dataset(spec: &DatasetSpec, kb: &KnowledgeBase, workers: usize) -> Result<Manifest, DatasetError> {
    spec.validate()?;
    let root = &spec.output_dir;
    let clip_dir = root.join(CLIP_DIR);
    std::fs::create_dir_all(&clip_dir).map_err(|e| DatasetError::io(&clip_dir, e))?;
    let probe = root.join(".write_probe");
    std::fs::write(&probe, b"").map_err(|e| DatasetError::io(&probe, e))?;
    let _ = std::fs::remove_file(&probe);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DatasetError::Pool(e.to_string()))?;
    let table = FingeringTable::standard();

    let results: Vec<Result<ClipRecord, ClipFailure>> = pool.install(|| {
        (0..spec.clip_count)
            .into_par_iter()
            .map(|index| {
                let seed = seed::mix_seed(spec.master_seed, index as u64);
                generate_clip(spec, kb, &table, index, seed).map_err(|error| {
                    log::warn!("{} failed: {error}", clip_id(index));
                    ClipFailure { clip_id: clip_id(index), index, seed, error }
                })
            })
            .collect()
    });

    let mut clips = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(c) => clips.push(c),
            Err(f) => failures.push(f),
        }
    }
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        spec: spec.clone(),
        spec_hash: spec.hash(),
        knowledge_hash: sha256_hex(kb.canonical_text().as_bytes()),
        sample_rate: SAMPLE_RATE,
        clips,
        failures,
    };
    let path = root.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json()).map_err(|e| DatasetError::io(&path, e))?;
    Ok(manifest)
}

fn generate_clip(
    spec: &DatasetSpec,
    kb: &KnowledgeBase,
    table: &FingeringTable,
    index: usize,
    clip_seed: u64,
) -> Result<ClipRecord, String> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(clip_seed);

    let piece = compose(spec.composer, kb, table, &spec.composer_config, &mut rng).map_err(|e| e.to_string())?;
    let events = score_to_events(&piece.score);
    let events = humanize_timing(&events, &spec.humanize_config, &mut rng);
    let mut events = humanize_pitch(&events, &spec.humanize_config, &mut rng);

    // the sampled per-note amplitude is the performed dynamic, so it moves
    // into the annotated event and the synthesis gain stays at unity
    let mut params = sample_note_params(events.len(), rng.gen());
    for (ev, p) in events.iter_mut().zip(params.iter_mut()) {
        ev.amplitude = p.amplitude;
        p.amplitude = 1.0;
    }
    sort_events(&mut events);

    let mut audio = render_events(&events, &params, SAMPLE_RATE).map_err(|e| e.to_string())?;
    audio.normalize_if_hot();
    let (mut audio, effects) = augment_chain(&audio, &spec.augment_config, &mut rng);
    audio.normalize_if_hot();
    if !audio.is_finite() {
        return Err("non-finite samples in rendered audio".into());
    }

    let id = clip_id(index);
    let rel = |ext: &str| format!("{CLIP_DIR}/{id}.{ext}");
    let (wav_rel, ann_rel, mid_rel) = (rel("wav"), rel("jsonl"), rel("mid"));
    let root = &spec.output_dir;
    write_wav(&audio, &root.join(&wav_rel)).map_err(|e| e.to_string())?;
    write_annotations(&events, &root.join(&ann_rel)).map_err(|e| e.to_string())?;
    write_midi(&events, piece.score.tempo_bpm, &root.join(&mid_rel)).map_err(|e| e.to_string())?;

    Ok(ClipRecord {
        clip_id: id,
        index,
        seed: clip_seed,
        wav_path: wav_rel,
        annotation_path: ann_rel,
        midi_path: mid_rel,
        duration_s: audio.duration(),
        note_count: events.len(),
        tempo_bpm: piece.info.tempo_bpm,
        time_signature: piece.info.time_signature,
        key: piece.info.key,
        progression: piece.info.progression,
        pattern: piece.info.pattern,
        effects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_hash_ignores_output_dir() {
        let a = DatasetSpec::new(3, 9, "/tmp/a");
        let b = DatasetSpec::new(3, 9, "/tmp/b");
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), DatasetSpec::new(3, 10, "/tmp/a").hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn zero_clips_rejected() {
        assert!(DatasetSpec::new(0, 1, "x").validate().is_err());
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
