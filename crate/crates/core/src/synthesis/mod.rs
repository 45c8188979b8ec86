//! Extended Karplus-Strong plucked-string synthesis.
//!
//! A burst of white noise, shaped by the pick-direction and dynamic-level
//! lowpasses and the pick-position comb, is fed into a recursive loop:
//!
//! ```text
//! exc ──(+)──────────────────────────────┬──> out
//!        ^                               │
//!        └─ H_rho <─ H_s <─ H_d <─ z^-N ─┘
//! ```
//!
//! The loop delay `N + S + eps` equals `fs / f0`, where `S` is the damping
//! filter's phase delay and `eps` is realized by the tuning allpass.

pub mod filters;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::music::NoteEvent;
use crate::seed;
use filters::{comb, DampingFilter, FirstOrderAllpass, OnePoleLowpass};

pub const SAMPLE_RATE: u32 = 16_000;
/// Ringing kept after each note's offset.
pub const RELEASE_TAIL_S: f64 = 1.0;
/// Linear fade-out applied from the note offset.
pub const OFFSET_FADE_S: f64 = 0.010;
/// Peak level for final normalization.
pub const NORMALIZE_PEAK: f64 = 0.99;

pub const MIN_FRACTIONAL_DELAY: f64 = 0.2;
pub const MAX_FRACTIONAL_DELAY: f64 = 1.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("frequency {freq} Hz outside ({min}, {max}) Hz")]
    FrequencyOutOfRange { freq: f64, min: f64, max: f64 },
    #[error("loop of {0} samples is too short")]
    LoopTooShort(i64),
}

/// A mono signal at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        AudioBuffer { samples, sample_rate }
    }

    pub fn silence(len: usize, sample_rate: u32) -> Self {
        AudioBuffer { samples: vec![0.0; len], sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    /// Scales down to `NORMALIZE_PEAK` if the peak exceeds it.
    pub fn normalize_if_hot(&mut self) {
        let peak = self.peak();
        if peak > NORMALIZE_PEAK {
            let g = NORMALIZE_PEAK / peak;
            self.samples.iter_mut().for_each(|x| *x *= g);
        }
    }
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Per-note synthesis controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Excitation amplitude A.
    pub amplitude: f64,
    /// Pick position β along the string, drives the comb.
    pub brightness: f64,
    /// Dynamic level L, mapped to the H_L bandwidth.
    pub level: f64,
    /// Pole of the pick-direction lowpass H_p.
    pub pick: f64,
    /// Detune δ in semitones.
    pub detune: f64,
    /// Damping filter stretch S, also its phase delay in samples.
    pub damping_stretch: f64,
    /// Damping filter DC gain g.
    pub loop_gain: f64,
    /// Stiffness allpass coefficient; 0 disables the filter.
    pub stiffness: f64,
    /// Seed for the excitation noise.
    pub excitation_seed: u64,
}

pub const AMPLITUDE_RANGE: [f64; 2] = [0.2, 1.3];
pub const BRIGHTNESS_RANGE: [f64; 2] = [0.1, 0.9];
pub const LEVEL_RANGE: [f64; 2] = [0.1, 0.9];
pub const PICK_RANGE: [f64; 2] = [0.1, 0.9];
pub const DETUNE_RANGE: [f64; 2] = [-0.49, 0.49];

pub const DEFAULT_DAMPING_STRETCH: f64 = 0.5;
pub const DEFAULT_LOOP_GAIN: f64 = 0.996;

impl Default for SynthParams {
    /// Static settings: amplitude 1, brightness 0.5, level 0.2, position 0.5, no detune.
    fn default() -> Self {
        SynthParams {
            amplitude: 1.0,
            brightness: 0.5,
            level: 0.2,
            pick: 0.5,
            detune: 0.0,
            damping_stretch: DEFAULT_DAMPING_STRETCH,
            loop_gain: DEFAULT_LOOP_GAIN,
            stiffness: 0.0,
            excitation_seed: 0,
        }
    }
}

/// Draws A, β, L, p and δ uniformly from their ranges; loop filters keep defaults.
pub fn sample_params<R: Rng + ?Sized>(rng: &mut R) -> SynthParams {
    let mut u = |[lo, hi]: [f64; 2]| rng.gen_range(lo..=hi);
    let amplitude = u(AMPLITUDE_RANGE);
    let brightness = u(BRIGHTNESS_RANGE);
    let level = u(LEVEL_RANGE);
    let pick = u(PICK_RANGE);
    let detune = u(DETUNE_RANGE);
    SynthParams {
        amplitude,
        brightness,
        level,
        pick,
        detune,
        excitation_seed: rng.gen(),
        ..SynthParams::default()
    }
}

/// `440 * 2^((m + δ - 69) / 12)`.
pub fn midi_to_freq(midi: f64, detune: f64, sample_rate: u32) -> Result<f64, SynthError> {
    let f0 = 440.0 * 2f64.powf((midi + detune - 69.0) / 12.0);
    let nyquist = sample_rate as f64 / 2.0;
    if !(f0 > 0.0 && f0 < nyquist) {
        return Err(SynthError::FrequencyOutOfRange { freq: f0, min: 0.0, max: nyquist });
    }
    Ok(f0)
}

/// Maps the level control onto the H_L bandwidth in Hz: [0.1, 0.9] -> [780, 5420].
pub fn level_bandwidth_hz(level: f64) -> f64 {
    200.0 + level * 5800.0
}

/// `R_L = exp(-π B T)` for bandwidth `B` Hz.
pub fn level_pole(bandwidth_hz: f64, sample_rate: u32) -> f64 {
    (-std::f64::consts::PI * bandwidth_hz / sample_rate as f64).exp()
}

/// Delay-line layout for one note.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPlan {
    /// Integer delay line length N.
    pub delay: usize,
    /// Fractional delay ε in [0.2, 1.2) realized by the tuning allpass.
    pub fractional: f64,
    /// Tuning allpass coefficient η = (1 - ε) / (1 + ε).
    pub eta: f64,
    /// Pick-position comb delay M.
    pub comb_delay: usize,
}

pub fn plan_loop(f0: f64, params: &SynthParams, sample_rate: u32) -> Result<LoopPlan, SynthError> {
    let fs = sample_rate as f64;
    if !(f0 > 20.0 && f0 < fs / 2.0) {
        return Err(SynthError::FrequencyOutOfRange { freq: f0, min: 20.0, max: fs / 2.0 });
    }
    let period = fs / f0;
    let mut loop_delay = period - params.damping_stretch;
    if params.stiffness != 0.0 {
        loop_delay -= FirstOrderAllpass::dc_delay(params.stiffness);
    }
    let delay = (loop_delay - MIN_FRACTIONAL_DELAY).floor() as i64;
    if delay < 2 {
        return Err(SynthError::LoopTooShort(delay));
    }
    let fractional = loop_delay - delay as f64;
    let eta = FirstOrderAllpass::coeff_for_delay(fractional);
    let comb_delay = ((params.brightness * delay as f64 + 0.5).floor() as usize).max(1);
    Ok(LoopPlan { delay: delay as usize, fractional, eta, comb_delay })
}

/// One period of uniform noise through H_p then H_L, scaled by A.
pub fn make_excitation<R: Rng + ?Sized>(
    len: usize,
    params: &SynthParams,
    sample_rate: u32,
    rng: &mut R,
) -> Vec<f64> {
    let mut pick = OnePoleLowpass::new(params.pick);
    let mut level = OnePoleLowpass::new(level_pole(level_bandwidth_hz(params.level), sample_rate));
    (0..len)
        .map(|_| {
            let noise: f64 = rng.gen_range(-1.0..=1.0);
            params.amplitude * level.process(pick.process(noise))
        })
        .collect()
}

/// Renders one note from its onset: `duration + RELEASE_TAIL_S` seconds long,
/// faded out over `OFFSET_FADE_S` from the offset.
pub fn render_note(event: &NoteEvent, params: &SynthParams, sample_rate: u32) -> Result<AudioBuffer, SynthError> {
    let fs = sample_rate as f64;
    let f0 = midi_to_freq(event.pitch.midi() as f64, params.detune, sample_rate)?;
    let plan = plan_loop(f0, params, sample_rate)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.excitation_seed);
    let burst = make_excitation(plan.delay, params, sample_rate, &mut rng);
    let excitation: Vec<f64> = comb(&burst, plan.comb_delay)
        .into_iter()
        .map(|x| x * event.amplitude)
        .collect();

    let duration = event.duration().max(0.0);
    let len = ((duration + RELEASE_TAIL_S) * fs).round() as usize;
    let fade_start = (duration * fs).round() as usize;
    let fade_len = (OFFSET_FADE_S * fs).round().max(1.0) as usize;
    let active = (fade_start + fade_len).min(len);

    let mut out = vec![0.0; len];
    let mut line = vec![0.0; plan.delay];
    let mut pos = 0;
    let mut damping = DampingFilter::new(params.loop_gain, params.damping_stretch);
    let mut stiffness = (params.stiffness != 0.0).then(|| FirstOrderAllpass::new(params.stiffness));
    let mut tuning = FirstOrderAllpass::new(plan.eta);

    for (n, o) in out.iter_mut().enumerate().take(active) {
        let mut fb = damping.process(line[pos]);
        if let Some(s) = stiffness.as_mut() {
            fb = s.process(fb);
        }
        fb = tuning.process(fb);
        let y = excitation.get(n).copied().unwrap_or(0.0) + fb;
        line[pos] = y;
        pos += 1;
        if pos == plan.delay {
            pos = 0;
        }
        let gain = if n < fade_start {
            1.0
        } else {
            1.0 - (n - fade_start) as f64 / fade_len as f64
        };
        *o = y * gain;
    }
    Ok(AudioBuffer::new(out, sample_rate))
}

/// Independent parameters for each note, drawn from per-note streams of `seed`.
pub fn sample_note_params(count: usize, seed: u64) -> Vec<SynthParams> {
    (0..count)
        .map(|i| sample_params(&mut seed::stream(seed, i as u64)))
        .collect()
}

/// Renders every note and sums them onto one timeline in note order.
pub fn render_events(
    events: &[NoteEvent],
    params: &[SynthParams],
    sample_rate: u32,
) -> Result<AudioBuffer, SynthError> {
    assert_eq!(events.len(), params.len(), "one parameter set per note");
    let fs = sample_rate as f64;
    let notes = events
        .par_iter()
        .zip(params.par_iter())
        .map(|(ev, p)| render_note(ev, p, sample_rate))
        .collect::<Result<Vec<_>, _>>()?;
    let starts: Vec<usize> = events.iter().map(|e| (e.onset * fs).round() as usize).collect();
    let len = notes
        .iter()
        .zip(&starts)
        .map(|(n, &s)| s + n.len())
        .max()
        .unwrap_or(0);
    let mut out = vec![0.0; len];
    for (note, &start) in notes.iter().zip(&starts) {
        for (o, x) in out[start..start + note.len()].iter_mut().zip(&note.samples) {
            *o += x;
        }
    }
    Ok(AudioBuffer::new(out, sample_rate))
}

/// Renders a performance with freshly sampled per-note parameters, peak-normalized
/// when it would clip.
pub fn render_performance<R: Rng + ?Sized>(
    events: &[NoteEvent],
    sample_rate: u32,
    rng: &mut R,
) -> Result<AudioBuffer, SynthError> {
    let params = sample_note_params(events.len(), rng.gen());
    let mut audio = render_events(events, &params, sample_rate)?;
    audio.normalize_if_hot();
    Ok(audio)
}
