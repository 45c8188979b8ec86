//! Guitar domain types shared by every stage of the pipeline.
//!
//! Strings are numbered 1..=6 with string 1 the high E. Frets run 0..=19.
//! Rhythm lives on a 16th-note grid, one grid per measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STRING_COUNT: u8 = 6;
pub const MAX_FRET: u8 = 19;
pub const MIN_MIDI: u8 = 40;
pub const MAX_MIDI: u8 = 88;

/// Open-string MIDI numbers for standard tuning, indexed by `string - 1`.
pub const STANDARD_TUNING: [u8; 6] = [64, 59, 55, 50, 45, 40];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MusicError {
    #[error("string {0} out of range 1..=6")]
    StringOutOfRange(i32),
    #[error("fret {0} out of range 0..=19")]
    FretOutOfRange(i32),
    #[error("midi note {0} outside the playable range 40..=88")]
    PitchOutOfRange(i32),
    #[error("unsupported time signature {0}/{1}")]
    UnsupportedMeter(u8, u8),
    #[error("invalid score: {0}")]
    InvalidScore(String),
}

/// MIDI semitone number, A4 = 69.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pitch(u8);

impl Pitch {
    pub fn new(midi: i32) -> Result<Self, MusicError> {
        if (MIN_MIDI as i32..=MAX_MIDI as i32).contains(&midi) {
            Ok(Pitch(midi as u8))
        } else {
            Err(MusicError::PitchOutOfRange(midi))
        }
    }

    pub fn midi(self) -> u8 {
        self.0
    }

    pub fn pitch_class(self) -> u8 {
        self.0 % 12
    }
}

/// Pitch sounded by `string` stopped at `fret` in standard tuning.
pub fn midi_of_string_fret(string: u8, fret: u8) -> Result<Pitch, MusicError> {
    check_string(string)?;
    if fret > MAX_FRET {
        return Err(MusicError::FretOutOfRange(fret as i32));
    }
    Pitch::new(STANDARD_TUNING[(string - 1) as usize] as i32 + fret as i32)
}

pub(crate) fn check_string(string: u8) -> Result<(), MusicError> {
    if (1..=STRING_COUNT).contains(&string) {
        Ok(())
    } else {
        Err(MusicError::StringOutOfRange(string as i32))
    }
}

/// One performed note.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset: f64,
    pub offset: f64,
    pub pitch: Pitch,
    pub string: u8,
    pub fret: u8,
    pub amplitude: f64,
}

impl NoteEvent {
    pub fn duration(&self) -> f64 {
        self.offset - self.onset
    }

    /// Checks timing, ranges and that pitch agrees with string/fret.
    pub fn validate(&self) -> Result<(), MusicError> {
        if !(self.onset >= 0.0 && self.offset > self.onset && self.offset.is_finite()) {
            return Err(MusicError::InvalidScore(format!(
                "note timing onset={} offset={}",
                self.onset, self.offset
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.5) {
            return Err(MusicError::InvalidScore(format!(
                "amplitude {} outside (0, 1.5]",
                self.amplitude
            )));
        }
        let expected = midi_of_string_fret(self.string, self.fret)?;
        if expected != self.pitch {
            return Err(MusicError::InvalidScore(format!(
                "pitch {} does not match string {} fret {}",
                self.pitch.midi(),
                self.string,
                self.fret
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeSignature {
    numerator: u8,
    denominator: u8,
}

impl TimeSignature {
    pub const FOUR_FOUR: TimeSignature = TimeSignature { numerator: 4, denominator: 4 };
    pub const THREE_FOUR: TimeSignature = TimeSignature { numerator: 3, denominator: 4 };
    pub const SIX_EIGHT: TimeSignature = TimeSignature { numerator: 6, denominator: 8 };
    pub const TWELVE_EIGHT: TimeSignature = TimeSignature { numerator: 12, denominator: 8 };

    pub const ALL: [TimeSignature; 4] = [
        Self::FOUR_FOUR,
        Self::THREE_FOUR,
        Self::SIX_EIGHT,
        Self::TWELVE_EIGHT,
    ];

    pub fn new(numerator: u8, denominator: u8) -> Result<Self, MusicError> {
        let ts = TimeSignature { numerator, denominator };
        if Self::ALL.contains(&ts) {
            Ok(ts)
        } else {
            Err(MusicError::UnsupportedMeter(numerator, denominator))
        }
    }

    pub fn numerator(self) -> u8 {
        self.numerator
    }

    pub fn denominator(self) -> u8 {
        self.denominator
    }

    /// Number of 16th-note slots in one measure.
    pub fn slots_per_measure(self) -> u32 {
        self.numerator as u32 * 16 / self.denominator as u32
    }
}

impl fmt::Display for TimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for TimeSignature {
    type Err = MusicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MusicError::InvalidScore(format!("malformed time signature '{s}'"));
        let (num, den) = s.split_once('/').ok_or_else(bad)?;
        let num = num.trim().parse().map_err(|_| bad())?;
        let den = den.trim().parse().map_err(|_| bad())?;
        TimeSignature::new(num, den)
    }
}

impl Serialize for TimeSignature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeSignature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A single fretted note on the 16th grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridEvent {
    pub measure: u32,
    pub slot: u32,
    pub string: u8,
    pub fret: u8,
}

/// A symbolic piece of tablature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabScore {
    pub tempo_bpm: f64,
    pub time_signature: TimeSignature,
    pub measure_count: u32,
    pub events: Vec<GridEvent>,
}

impl TabScore {
    /// Checks slot bounds, string/fret ranges and (measure, slot, string) uniqueness.
    pub fn validate(&self) -> Result<(), MusicError> {
        if !(self.tempo_bpm.is_finite() && self.tempo_bpm > 0.0) {
            return Err(MusicError::InvalidScore(format!("tempo {}", self.tempo_bpm)));
        }
        let spm = self.time_signature.slots_per_measure();
        let mut seen = std::collections::HashSet::with_capacity(self.events.len());
        for ev in &self.events {
            if ev.slot >= spm {
                return Err(MusicError::InvalidScore(format!(
                    "slot {} in measure {} exceeds {} slots of {}",
                    ev.slot, ev.measure, spm, self.time_signature
                )));
            }
            if ev.measure >= self.measure_count {
                return Err(MusicError::InvalidScore(format!(
                    "measure {} beyond measure count {}",
                    ev.measure, self.measure_count
                )));
            }
            midi_of_string_fret(ev.string, ev.fret)?;
            if !seen.insert((ev.measure, ev.slot, ev.string)) {
                return Err(MusicError::InvalidScore(format!(
                    "duplicate event at measure {} slot {} string {}",
                    ev.measure, ev.slot, ev.string
                )));
            }
        }
        Ok(())
    }

    /// Events in (measure, slot, string) order.
    pub fn sort_events(&mut self) {
        self.events.sort();
    }
}

pub fn validate_score(score: &TabScore) -> Result<(), MusicError> {
    score.validate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PimaFinger {
    P,
    I,
    M,
    A,
}

impl PimaFinger {
    pub fn letter(self) -> char {
        match self {
            PimaFinger::P => 'P',
            PimaFinger::I => 'I',
            PimaFinger::M => 'M',
            PimaFinger::A => 'A',
        }
    }

    pub fn from_letter(c: &str) -> Option<Self> {
        match c {
            "P" => Some(PimaFinger::P),
            "I" => Some(PimaFinger::I),
            "M" => Some(PimaFinger::M),
            "A" => Some(PimaFinger::A),
            _ => None,
        }
    }
}

/// Signed string reference: positive counts active strings from the top
/// (high E) down, negative counts from the bottom (low E) up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stroke {
    pub slot: u32,
    pub finger: PimaFinger,
    pub string_ref: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickPattern {
    pub name: String,
    pub time_signature: TimeSignature,
    pub strokes: Vec<Stroke>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordQuality {
    Maj,
    Min,
    Dom7,
    Maj7,
    Min7,
    /// Not produced by the progression parser and absent from the fingering table.
    Dim,
}

impl ChordQuality {
    /// Suffix used in progression tokens.
    pub fn suffix(self) -> &'static str {
        match self {
            ChordQuality::Maj => "",
            ChordQuality::Min => "m",
            ChordQuality::Dom7 => "7",
            ChordQuality::Maj7 => "maj7",
            ChordQuality::Min7 => "m7",
            ChordQuality::Dim => "dim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleDegree {
    pub degree: u8,
    pub quality: ChordQuality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordProgression {
    pub name: String,
    pub degrees: Vec<ScaleDegree>,
}

/// Root pitch class plus quality, after transposition into a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChordSymbol {
    pub root: u8,
    pub quality: ChordQuality,
}

pub const PITCH_CLASS_NAMES: [&str; 12] =
    ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

impl fmt::Display for ChordSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", PITCH_CLASS_NAMES[(self.root % 12) as usize], self.quality.suffix())
    }
}

/// Per-string frets for strings 1..=6; `None` marks a muted string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChordFingering {
    pub frets: [Option<u8>; 6],
}

impl ChordFingering {
    pub fn new(frets: [Option<u8>; 6]) -> Self {
        ChordFingering { frets }
    }

    pub fn fret(&self, string: u8) -> Option<u8> {
        self.frets.get(string.wrapping_sub(1) as usize).copied().flatten()
    }

    /// Active (non-muted) strings ordered from string 1 to string 6.
    pub fn active_strings(&self) -> Vec<u8> {
        (1..=STRING_COUNT).filter(|&s| self.fret(s).is_some()).collect()
    }

    pub fn active_count(&self) -> usize {
        self.frets.iter().filter(|f| f.is_some()).count()
    }

    /// Highest-numbered active string, i.e. the lowest sounding one.
    pub fn lowest_active(&self) -> Option<(u8, u8)> {
        (1..=STRING_COUNT)
            .rev()
            .find_map(|s| self.fret(s).map(|f| (s, f)))
    }
}
