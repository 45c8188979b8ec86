//! Fingerpicking tablature composition.
//!
//! A piece is sampled as: progression, key, fingerings, a picking pattern
//! applicable to every chord, tempo, and finally the pattern laid over the
//! progression with one chord per measure.

mod fingering;
mod greedy;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fingering::{chord_lookup, FingeringTable};
pub use greedy::{greedy_generate, GREEDY_DURATIONS};

use crate::knowledge::KnowledgeBase;
use crate::music::{
    ChordFingering, ChordProgression, ChordSymbol, GridEvent, PickPattern, TabScore, TimeSignature,
};

/// Chords need this many sounding strings before a pattern may be applied.
pub const MIN_ACTIVE_STRINGS: usize = 4;
/// Patterns drawn before composition gives up.
pub const PATTERN_RETRIES: usize = 32;

const MAJOR_SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("no fingering for chord {0}")]
    UnsupportedChord(ChordSymbol),
    #[error("string reference {string_ref} exceeds {active} active strings")]
    StringRef { string_ref: i8, active: usize },
    #[error("chord {chord} has only {active} active strings (need {MIN_ACTIVE_STRINGS})")]
    NotApplicable { chord: ChordSymbol, active: usize },
    #[error("pattern '{pattern}' maps two strokes onto string {string} at slot {slot}")]
    StrokeCollision { pattern: String, slot: u32, string: u8 },
    #[error("empty knowledge base: {0}")]
    EmptyDatabase(&'static str),
    #[error("no applicable pattern for progression '{0}' after {PATTERN_RETRIES} draws")]
    NoApplicablePattern(String),
    #[error("invalid composer config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComposerConfig {
    pub tempo_range: [f64; 2],
    pub measures_per_piece: [u32; 2],
    /// Candidate key roots as pitch classes.
    pub key_choices: Vec<u8>,
    /// Meters available to the greedy generator.
    pub time_signatures: Vec<TimeSignature>,
    pub rng_seed: u64,
}

impl Default for ComposerConfig {
    fn default() -> Self {
        ComposerConfig {
            tempo_range: [60.0, 160.0],
            measures_per_piece: [8, 16],
            key_choices: (0..12).collect(),
            time_signatures: TimeSignature::ALL.to_vec(),
            rng_seed: 0,
        }
    }
}

impl ComposerConfig {
    pub fn validate(&self) -> Result<(), ComposeError> {
        let [lo, hi] = self.tempo_range;
        if !(lo >= 30.0 && hi <= 300.0 && lo <= hi) {
            return Err(ComposeError::Config(format!("tempo range [{lo}, {hi}] outside [30, 300]")));
        }
        let [min, max] = self.measures_per_piece;
        if min < 1 || min > max {
            return Err(ComposeError::Config(format!("measure range [{min}, {max}]")));
        }
        if self.key_choices.is_empty() || self.key_choices.iter().any(|&k| k > 11) {
            return Err(ComposeError::Config("key choices must be non-empty pitch classes".into()));
        }
        if self.time_signatures.is_empty() {
            return Err(ComposeError::Config("no time signatures".into()));
        }
        Ok(())
    }
}

pub fn transpose_progression(prog: &ChordProgression, key_root: u8) -> Vec<ChordSymbol> {
    prog.degrees
        .iter()
        .map(|d| ChordSymbol {
            root: (key_root + MAJOR_SCALE[(d.degree - 1) as usize]) % 12,
            quality: d.quality,
        })
        .collect()
}

/// Resolves a signed string reference against the active strings of a fingering.
/// Muted strings are skipped in both directions.
pub fn resolve_string_ref(fingering: &ChordFingering, string_ref: i8) -> Result<u8, ComposeError> {
    let active = fingering.active_strings();
    let k = string_ref.unsigned_abs() as usize;
    if string_ref == 0 || k > active.len() {
        return Err(ComposeError::StringRef { string_ref, active: active.len() });
    }
    Ok(if string_ref > 0 { active[k - 1] } else { active[active.len() - k] })
}

/// Lays `pattern` over `chords`, one measure per chord.
pub fn apply_pattern(
    pattern: &PickPattern,
    chords: &[ChordSymbol],
    table: &FingeringTable,
    tempo_bpm: f64,
) -> Result<TabScore, ComposeError> {
    let fingerings = chords
        .iter()
        .map(|&c| {
            let f = table.lookup(c)?;
            if f.active_count() < MIN_ACTIVE_STRINGS {
                return Err(ComposeError::NotApplicable { chord: c, active: f.active_count() });
            }
            Ok(f)
        })
        .collect::<Result<Vec<_>, _>>()?;
    apply_to_fingerings(pattern, &fingerings, tempo_bpm)
}

pub(crate) fn apply_to_fingerings(
    pattern: &PickPattern,
    fingerings: &[ChordFingering],
    tempo_bpm: f64,
) -> Result<TabScore, ComposeError> {
    let mut events = Vec::with_capacity(pattern.strokes.len() * fingerings.len());
    for (measure, f) in fingerings.iter().enumerate() {
        let first = events.len();
        for stroke in &pattern.strokes {
            let string = resolve_string_ref(f, stroke.string_ref)?;
            let fret = f.fret(string).expect("resolved strings are active");
            let collides = events[first..]
                .iter()
                .any(|e: &GridEvent| e.slot == stroke.slot && e.string == string);
            if collides {
                return Err(ComposeError::StrokeCollision {
                    pattern: pattern.name.clone(),
                    slot: stroke.slot,
                    string,
                });
            }
            events.push(GridEvent { measure: measure as u32, slot: stroke.slot, string, fret });
        }
    }
    let mut score = TabScore {
        tempo_bpm,
        time_signature: pattern.time_signature,
        measure_count: fingerings.len() as u32,
        events,
    };
    score.sort_events();
    Ok(score)
}

/// What the sampler picked for a piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceInfo {
    pub progression: String,
    pub pattern: String,
    pub key_root: u8,
    pub key: String,
    pub tempo_bpm: f64,
    pub time_signature: TimeSignature,
    pub measures: u32,
    pub chords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedPiece {
    pub score: TabScore,
    pub info: PieceInfo,
}

pub fn sample_piece<R: Rng + ?Sized>(
    kb: &KnowledgeBase,
    table: &FingeringTable,
    config: &ComposerConfig,
    rng: &mut R,
) -> Result<ComposedPiece, ComposeError> {
    config.validate()?;
    let progression = kb
        .progressions
        .choose(rng)
        .ok_or(ComposeError::EmptyDatabase("progressions"))?;
    if kb.patterns.is_empty() {
        return Err(ComposeError::EmptyDatabase("patterns"));
    }
    let key_root = *config.key_choices.choose(rng).expect("validated non-empty");
    let chords = transpose_progression(progression, key_root);
    let fingerings = chords
        .iter()
        .map(|&c| table.lookup(c))
        .collect::<Result<Vec<_>, _>>()?;

    let playable = fingerings.iter().all(|f| f.active_count() >= MIN_ACTIVE_STRINGS);
    let mut chosen = None;
    for _ in 0..PATTERN_RETRIES {
        let pattern = kb.patterns.choose(rng).expect("checked non-empty");
        if playable && apply_to_fingerings(pattern, &fingerings, 120.0).is_ok() {
            chosen = Some(pattern);
            break;
        }
    }
    let pattern = chosen.ok_or_else(|| ComposeError::NoApplicablePattern(progression.name.clone()))?;

    let [lo, hi] = config.tempo_range;
    let tempo_bpm = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
    let [min, max] = config.measures_per_piece;
    let measures = rng.gen_range(min..=max);

    let cycled: Vec<ChordFingering> = fingerings.iter().copied().cycle().take(measures as usize).collect();
    let score = apply_to_fingerings(pattern, &cycled, tempo_bpm)?;
    let info = PieceInfo {
        progression: progression.name.clone(),
        pattern: pattern.name.clone(),
        key_root,
        key: crate::music::PITCH_CLASS_NAMES[key_root as usize].to_string(),
        tempo_bpm,
        time_signature: pattern.time_signature,
        measures,
        chords: chords.iter().cycle().take(measures as usize).map(|c| c.to_string()).collect(),
    };
    Ok(ComposedPiece { score, info })
}

/// Which sampler produces a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComposerKind {
    #[default]
    Fingerpicking,
    Greedy,
}

impl std::str::FromStr for ComposerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fingerpicking" => Ok(ComposerKind::Fingerpicking),
            "greedy" => Ok(ComposerKind::Greedy),
            other => Err(format!("unknown composer '{other}'")),
        }
    }
}

/// Runs the selected sampler. Greedy pieces carry no progression, pattern or key.
pub fn compose<R: Rng + ?Sized>(
    kind: ComposerKind,
    kb: &KnowledgeBase,
    table: &FingeringTable,
    config: &ComposerConfig,
    rng: &mut R,
) -> Result<ComposedPiece, ComposeError> {
    match kind {
        ComposerKind::Fingerpicking => sample_piece(kb, table, config, rng),
        ComposerKind::Greedy => {
            let score = greedy_generate(config, rng)?;
            let info = PieceInfo {
                progression: "none".into(),
                pattern: "greedy".into(),
                key_root: 0,
                key: "none".into(),
                tempo_bpm: score.tempo_bpm,
                time_signature: score.time_signature,
                measures: score.measure_count,
                chords: Vec::new(),
            };
            Ok(ComposedPiece { score, info })
        }
    }
}
