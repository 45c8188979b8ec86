//! PCM16 mono WAV input and output.

use std::path::Path;

use super::DatasetError;
use crate::synthesis::AudioBuffer;

const FULL_SCALE: f64 = i16::MAX as f64;

/// Size of the canonical RIFF/WAVE header for PCM data.
pub const WAV_HEADER_LEN: u64 = 44;

pub fn wav_spec(sample_rate: u32) -> hound::WavSpec {
    hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    }
}

fn quantize(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16
}

/// Writes 16-bit signed PCM; samples outside [-1, 1] are clipped.
pub fn write_wav(buf: &AudioBuffer, path: &Path) -> Result<(), DatasetError> {
    let wrap = |e: hound::Error| DatasetError::wav(path, e);
    let mut writer = hound::WavWriter::create(path, wav_spec(buf.sample_rate)).map_err(wrap)?;
    {
        let mut w = writer.get_i16_writer(buf.len() as u32);
        for &x in &buf.samples {
            w.write_sample(quantize(x));
        }
        w.flush().map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}

/// Reads a mono 16-bit PCM file.
pub fn read_wav(path: &Path) -> Result<AudioBuffer, DatasetError> {
    let wrap = |e: hound::Error| DatasetError::wav(path, e);
    let mut reader = hound::WavReader::open(path).map_err(wrap)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(DatasetError::Format {
            path: path.to_path_buf(),
            message: format!(
                "expected mono 16-bit PCM, found {} channel(s) at {} bits",
                spec.channels, spec.bits_per_sample
            ),
        });
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / FULL_SCALE))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap)?;
    Ok(AudioBuffer::new(samples, spec.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        write_wav(&AudioBuffer::silence(16_000, 16_000), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len() as u64, WAV_HEADER_LEN + 32_000);
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 36 + 32_000);
        assert_eq!(&bytes[8..16], b"WAVEfmt ");
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 16);
        assert_eq!(u16::from_le_bytes(bytes[20..22].try_into().unwrap()), 1);
        assert_eq!(u16::from_le_bytes(bytes[22..24].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 16_000);
        assert_eq!(u32::from_le_bytes(bytes[28..32].try_into().unwrap()), 32_000);
        assert_eq!(u16::from_le_bytes(bytes[32..34].try_into().unwrap()), 2);
        assert_eq!(u16::from_le_bytes(bytes[34..36].try_into().unwrap()), 16);
        assert_eq!(&bytes[36..40], b"data");
        assert_eq!(u32::from_le_bytes(bytes[40..44].try_into().unwrap()), 32_000);
    }

    #[test]
    fn round_trip_within_one_lsb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.wav");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut samples: Vec<f64> = (0..5000).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        samples.extend([1.0, -1.0, 0.0]);
        let buf = AudioBuffer::new(samples, 16_000);
        write_wav(&buf, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate, 16_000);
        assert_eq!(back.len(), buf.len());
        for (a, b) in buf.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        write_wav(&AudioBuffer::silence(10, 16_000), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0..4].copy_from_slice(b"RIFX");
        std::fs::write(&path, bytes).unwrap();
        assert!(read_wav(&path).is_err());
    }
}
