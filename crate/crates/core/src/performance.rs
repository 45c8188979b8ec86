//! Tablature to timed note events, plus timing and pitch humanization.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::music::{midi_of_string_fret, NoteEvent, TabScore, MAX_FRET};

/// Longest a note rings when nothing follows on its string.
pub const DEFAULT_SUSTAIN_S: f64 = 2.0;
/// Smallest note length left after offset jitter.
pub const MIN_NOTE_S: f64 = 0.001;
/// Amplitude carried by events before synthesis parameters are drawn.
pub const NOMINAL_AMPLITUDE: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HumanizeError {
    #[error("timing deviation fraction {0} outside [0, 0.5)")]
    TimingFraction(f64),
    #[error("pitch probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("invalid pitch probability for shift {0}")]
    Probability(i8),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HumanizeConfig {
    pub max_timing_dev_fraction: f64,
    /// (semitone shift, probability) pairs.
    pub pitch_probs: Vec<(i8, f64)>,
}

impl Default for HumanizeConfig {
    fn default() -> Self {
        HumanizeConfig {
            max_timing_dev_fraction: 0.10,
            pitch_probs: vec![(0, 0.80), (1, 0.05), (-1, 0.05), (2, 0.05), (-2, 0.05)],
        }
    }
}

impl HumanizeConfig {
    /// No jitter and no pitch changes.
    pub fn identity() -> Self {
        HumanizeConfig { max_timing_dev_fraction: 0.0, pitch_probs: vec![(0, 1.0)] }
    }

    pub fn validate(&self) -> Result<(), HumanizeError> {
        let f = self.max_timing_dev_fraction;
        if !(0.0..0.5).contains(&f) {
            return Err(HumanizeError::TimingFraction(f));
        }
        for &(shift, p) in &self.pitch_probs {
            if !(p.is_finite() && p >= 0.0) {
                return Err(HumanizeError::Probability(shift));
            }
        }
        let sum: f64 = self.pitch_probs.iter().map(|p| p.1).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(HumanizeError::ProbabilitySum(sum));
        }
        Ok(())
    }
}

/// Duration of one 16th slot; tempo counts quarter notes in every meter.
pub fn slot_duration(tempo_bpm: f64) -> f64 {
    60.0 / (tempo_bpm * 4.0)
}

/// Renders a validated score into note events ordered by onset, then string.
///
/// A note lasts until the next note on its string, [`DEFAULT_SUSTAIN_S`], or the
/// end of the piece, whichever comes first.
pub fn score_to_events(score: &TabScore) -> Vec<NoteEvent> {
    let slot = slot_duration(score.tempo_bpm);
    let spm = score.time_signature.slots_per_measure() as u64;
    let end = (score.measure_count as u64 * spm) as f64 * slot;

    let mut grid: Vec<(u64, u8, u8)> = score
        .events
        .iter()
        .map(|e| (e.measure as u64 * spm + e.slot as u64, e.string, e.fret))
        .collect();
    grid.sort_by_key(|&(pos, string, _)| (string, pos));

    let mut events = Vec::with_capacity(grid.len());
    for (i, &(pos, string, fret)) in grid.iter().enumerate() {
        let onset = pos as f64 * slot;
        let next = grid
            .get(i + 1)
            .filter(|n| n.1 == string)
            .map(|n| n.0 as f64 * slot)
            .unwrap_or(f64::INFINITY);
        let offset = next.min(onset + DEFAULT_SUSTAIN_S).min(end);
        events.push(NoteEvent {
            onset,
            offset,
            pitch: midi_of_string_fret(string, fret).expect("validated score"),
            string,
            fret,
            amplitude: NOMINAL_AMPLITUDE,
        });
    }
    sort_events(&mut events);
    events
}

/// Orders events by onset, then string.
pub fn sort_events(events: &mut [NoteEvent]) {
    events.sort_by(|a, b| a.onset.total_cmp(&b.onset).then(a.string.cmp(&b.string)));
}

/// Jitters onsets and offsets independently by up to `f` times each note's
/// nominal duration. Event order is preserved.
pub fn humanize_timing<R: Rng + ?Sized>(
    events: &[NoteEvent],
    config: &HumanizeConfig,
    rng: &mut R,
) -> Vec<NoteEvent> {
    let f = config.max_timing_dev_fraction;
    events
        .iter()
        .map(|ev| {
            let bound = f * ev.duration();
            if bound <= 0.0 {
                return *ev;
            }
            let onset = (ev.onset + rng.gen_range(-bound..=bound)).max(0.0);
            let offset = (ev.offset + rng.gen_range(-bound..=bound)).max(onset + MIN_NOTE_S);
            NoteEvent { onset, offset, ..*ev }
        })
        .collect()
}

/// Shifts each pitch by a semitone offset drawn from `pitch_probs`, moving the
/// fret along with it. Shifts that would leave the fretboard are skipped.
pub fn humanize_pitch<R: Rng + ?Sized>(
    events: &[NoteEvent],
    config: &HumanizeConfig,
    rng: &mut R,
) -> Vec<NoteEvent> {
    let weights: Vec<f64> = config.pitch_probs.iter().map(|p| p.1).collect();
    let dist = match WeightedIndex::new(&weights) {
        Ok(d) => d,
        Err(_) => return events.to_vec(),
    };
    events
        .iter()
        .map(|ev| {
            let shift = config.pitch_probs[dist.sample(rng)].0;
            if shift == 0 {
                return *ev;
            }
            let fret = ev.fret as i32 + shift as i32;
            if !(0..=MAX_FRET as i32).contains(&fret) {
                return *ev;
            }
            match midi_of_string_fret(ev.string, fret as u8) {
                Ok(pitch) => NoteEvent { pitch, fret: fret as u8, ..*ev },
                Err(_) => *ev,
            }
        })
        .collect()
}
