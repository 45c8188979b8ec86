//! Recording-condition augmentation: distortion, lowpass, highpass,
//! convolution reverb and additive noise, each gated independently.

mod biquad;
pub mod reverb;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use biquad::Biquad;

use crate::synthesis::{rms, AudioBuffer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("cutoff {cutoff} Hz outside (0, {nyquist}) Hz")]
    Cutoff { cutoff: f64, nyquist: f64 },
    #[error("signal is silent, SNR undefined")]
    SilentSignal,
    #[error("invalid augmentation config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub effect_probability: f64,
    pub drive_db_range: [f64; 2],
    pub lowpass_hz_range: [f64; 2],
    pub highpass_hz_range: [f64; 2],
    pub room_size_range: [f64; 2],
    pub snr_db_range: [f64; 2],
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            effect_probability: 0.5,
            drive_db_range: [1.0, 4.0],
            lowpass_hz_range: [1500.0, 8000.0],
            highpass_hz_range: [50.0, 500.0],
            room_size_range: [0.25, 1.0],
            snr_db_range: [30.0, 50.0],
        }
    }
}

impl AugmentConfig {
    /// Every gate closed.
    pub fn disabled() -> Self {
        AugmentConfig { effect_probability: 0.0, ..Default::default() }
    }

    /// Ranges must be ordered and lie inside the default bounds.
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.effect_probability) {
            return Err(AugmentError::Config(format!(
                "effect probability {} outside [0, 1]",
                self.effect_probability
            )));
        }
        let bounds = AugmentConfig::default();
        let checks = [
            ("drive_db_range", self.drive_db_range, bounds.drive_db_range),
            ("lowpass_hz_range", self.lowpass_hz_range, bounds.lowpass_hz_range),
            ("highpass_hz_range", self.highpass_hz_range, bounds.highpass_hz_range),
            ("room_size_range", self.room_size_range, bounds.room_size_range),
            ("snr_db_range", self.snr_db_range, bounds.snr_db_range),
        ];
        for (name, [lo, hi], [min, max]) in checks {
            if !(lo <= hi && lo >= min && hi <= max) {
                return Err(AugmentError::Config(format!(
                    "{name} [{lo}, {hi}] must be ordered within [{min}, {max}]"
                )));
            }
        }
        Ok(())
    }
}

/// One effect that fired, with its sampled parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum AppliedEffect {
    Distortion { drive_db: f64 },
    Lowpass { cutoff_hz: f64 },
    Highpass { cutoff_hz: f64 },
    Reverb { room_size: f64 },
    Noise { snr_db: f64 },
}

impl AppliedEffect {
    pub fn name(&self) -> &'static str {
        match self {
            AppliedEffect::Distortion { .. } => "distortion",
            AppliedEffect::Lowpass { .. } => "lowpass",
            AppliedEffect::Highpass { .. } => "highpass",
            AppliedEffect::Reverb { .. } => "reverb",
            AppliedEffect::Noise { .. } => "noise",
        }
    }
}

/// `tanh(g x) / tanh(g)` with `g = 10^(drive_db / 20)`.
pub fn distort(buf: &AudioBuffer, drive_db: f64) -> AudioBuffer {
    let g = 10f64.powf(drive_db / 20.0);
    let norm = g.tanh();
    AudioBuffer::new(
        buf.samples.iter().map(|&x| (g * x).tanh() / norm).collect(),
        buf.sample_rate,
    )
}

fn check_cutoff(cutoff_hz: f64, sample_rate: u32) -> Result<(), AugmentError> {
    let nyquist = sample_rate as f64 / 2.0;
    if cutoff_hz > 0.0 && cutoff_hz < nyquist {
        Ok(())
    } else {
        Err(AugmentError::Cutoff { cutoff: cutoff_hz, nyquist })
    }
}

pub fn lowpass(buf: &AudioBuffer, cutoff_hz: f64) -> Result<AudioBuffer, AugmentError> {
    check_cutoff(cutoff_hz, buf.sample_rate)?;
    let f = Biquad::butterworth_lowpass(cutoff_hz, buf.sample_rate as f64);
    Ok(AudioBuffer::new(f.filter(&buf.samples), buf.sample_rate))
}

pub fn highpass(buf: &AudioBuffer, cutoff_hz: f64) -> Result<AudioBuffer, AugmentError> {
    check_cutoff(cutoff_hz, buf.sample_rate)?;
    let f = Biquad::butterworth_highpass(cutoff_hz, buf.sample_rate as f64);
    Ok(AudioBuffer::new(f.filter(&buf.samples), buf.sample_rate))
}

/// Convolves with a synthetic room response; the output grows by the response length minus one.
pub fn reverb<R: Rng + ?Sized>(buf: &AudioBuffer, room_size: f64, rng: &mut R) -> AudioBuffer {
    let ir = reverb::synth_impulse_response(room_size, buf.sample_rate, rng);
    AudioBuffer::new(reverb::apply_reverb(&buf.samples, &ir, reverb::WET_MIX), buf.sample_rate)
}

/// Adds white noise scaled from its realized RMS so the SNR is exact.
pub fn add_noise<R: Rng + ?Sized>(buf: &AudioBuffer, snr_db: f64, rng: &mut R) -> Result<AudioBuffer, AugmentError> {
    let signal_rms = buf.rms();
    if signal_rms <= 0.0 {
        return Err(AugmentError::SilentSignal);
    }
    let noise: Vec<f64> = (0..buf.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let noise_rms = rms(&noise);
    if noise_rms <= 0.0 {
        return Ok(buf.clone());
    }
    let scale = signal_rms / (noise_rms * 10f64.powf(snr_db / 20.0));
    Ok(AudioBuffer::new(
        buf.samples.iter().zip(&noise).map(|(x, n)| x + scale * n).collect(),
        buf.sample_rate,
    ))
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Runs distortion, lowpass, highpass, reverb and noise in that order, each
/// with probability `effect_probability`. Noise is skipped on silent input.
pub fn augment_chain<R: Rng + ?Sized>(
    buf: &AudioBuffer,
    config: &AugmentConfig,
    rng: &mut R,
) -> (AudioBuffer, Vec<AppliedEffect>) {
    let p = config.effect_probability;
    let mut out = buf.clone();
    let mut applied = Vec::new();
    let nyquist = buf.sample_rate as f64 / 2.0;

    if rng.gen_bool(p) {
        let drive_db = uniform(rng, config.drive_db_range);
        out = distort(&out, drive_db);
        applied.push(AppliedEffect::Distortion { drive_db });
    }
    if rng.gen_bool(p) {
        // the top of the range may touch Nyquist at 16 kHz
        let cutoff_hz = uniform(rng, config.lowpass_hz_range).min(nyquist * 0.999);
        out = lowpass(&out, cutoff_hz).expect("cutoff clamped below Nyquist");
        applied.push(AppliedEffect::Lowpass { cutoff_hz });
    }
    if rng.gen_bool(p) {
        let cutoff_hz = uniform(rng, config.highpass_hz_range).min(nyquist * 0.999);
        out = highpass(&out, cutoff_hz).expect("cutoff clamped below Nyquist");
        applied.push(AppliedEffect::Highpass { cutoff_hz });
    }
    if rng.gen_bool(p) {
        let room_size = uniform(rng, config.room_size_range);
        let mut ir_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        out = reverb(&out, room_size, &mut ir_rng);
        applied.push(AppliedEffect::Reverb { room_size });
    }
    if rng.gen_bool(p) {
        let snr_db = uniform(rng, config.snr_db_range);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        if let Ok(noisy) = add_noise(&out, snr_db, &mut noise_rng) {
            out = noisy;
            applied.push(AppliedEffect::Noise { snr_db });
        }
    }
    (out, applied)
}
