//! Standard MIDI file export (format 0, one track).

use std::path::Path;

use midly::num::{u15, u24, u28, u4, u7};
use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};

use super::DatasetError;
use crate::music::NoteEvent;

pub const TICKS_PER_QUARTER: u16 = 480;

fn seconds_to_ticks(t: f64, tempo_bpm: f64) -> u64 {
    (t * tempo_bpm / 60.0 * TICKS_PER_QUARTER as f64).round().max(0.0) as u64
}

fn velocity(amplitude: f64) -> u8 {
    ((amplitude / 1.5) * 127.0).round().clamp(1.0, 127.0) as u8
}

/// Encodes notes on channel 1 with a single tempo event. At equal ticks,
/// note-offs precede note-ons.
pub fn encode_midi(events: &[NoteEvent], tempo_bpm: f64) -> Vec<u8> {
    // (tick, is_on, key, velocity)
    let mut raw: Vec<(u64, bool, u8, u8)> = Vec::with_capacity(events.len() * 2);
    for e in events {
        let on = seconds_to_ticks(e.onset, tempo_bpm);
        let off = seconds_to_ticks(e.offset, tempo_bpm).max(on + 1);
        raw.push((on, true, e.pitch.midi(), velocity(e.amplitude)));
        raw.push((off, false, e.pitch.midi(), 0));
    }
    raw.sort_by_key(|&(tick, on, key, _)| (tick, on, key));

    let micros = (60_000_000.0 / tempo_bpm).round().clamp(1.0, 16_777_215.0) as u32;
    let mut track = vec![TrackEvent {
        delta: u28::new(0),
        kind: TrackEventKind::Meta(MetaMessage::Tempo(u24::new(micros))),
    }];
    let mut last = 0u64;
    for (tick, on, key, vel) in raw {
        let message = if on {
            MidiMessage::NoteOn { key: u7::new(key), vel: u7::new(vel) }
        } else {
            MidiMessage::NoteOff { key: u7::new(key), vel: u7::new(0) }
        };
        track.push(TrackEvent {
            delta: u28::new((tick - last) as u32),
            kind: TrackEventKind::Midi { channel: u4::new(0), message },
        });
        last = tick;
    }
    track.push(TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::EndOfTrack) });

    let smf = Smf {
        header: Header::new(Format::SingleTrack, Timing::Metrical(u15::new(TICKS_PER_QUARTER))),
        tracks: vec![track],
    };
    let mut bytes = Vec::new();
    smf.write_std(&mut bytes).expect("writing to memory");
    bytes
}

pub fn write_midi(events: &[NoteEvent], tempo_bpm: f64, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, encode_midi(events, tempo_bpm)).map_err(|e| DatasetError::io(path, e))
}
