//! Line-delimited JSON note annotations.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::DatasetError;
use crate::music::{midi_of_string_fret, NoteEvent};
use crate::performance::sort_events;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    onset: f64,
    offset: f64,
    midi: u8,
    string: u8,
    fret: u8,
    amplitude: f64,
}

/// One JSON object per line, six decimals, sorted by onset then string.
pub fn format_annotations(events: &[NoteEvent]) -> String {
    let mut sorted = events.to_vec();
    sort_events(&mut sorted);
    let mut out = String::new();
    for e in &sorted {
        writeln!(
            out,
            r#"{{"onset":{:.6},"offset":{:.6},"midi":{},"string":{},"fret":{},"amplitude":{:.6}}}"#,
            e.onset,
            e.offset,
            e.pitch.midi(),
            e.string,
            e.fret,
            e.amplitude
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_annotations(events: &[NoteEvent], path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, format_annotations(events)).map_err(|e| DatasetError::io(path, e))
}

pub fn parse_annotations(text: &str) -> Result<Vec<NoteEvent>, String> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| format!("line {}: {m}", i + 1);
        let r: Record = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let pitch = midi_of_string_fret(r.string, r.fret).map_err(|e| err(e.to_string()))?;
        let ev = NoteEvent {
            onset: r.onset,
            offset: r.offset,
            pitch,
            string: r.string,
            fret: r.fret,
            amplitude: r.amplitude,
        };
        if pitch.midi() != r.midi {
            return Err(err(format!(
                "midi {} disagrees with string {} fret {}",
                r.midi, r.string, r.fret
            )));
        }
        ev.validate().map_err(|e| err(e.to_string()))?;
        events.push(ev);
    }
    Ok(events)
}

pub fn read_annotations(path: &Path) -> Result<Vec<NoteEvent>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    parse_annotations(&text).map_err(|message| DatasetError::Format { path: path.to_path_buf(), message })
}
