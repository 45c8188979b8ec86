//! Text formats for the chord-progression and picking-pattern databases.
//!
//! Progressions, one per line:
//!
//! ```text
//! # comment
//! blues_basic: I7 IV7 I7 V7
//! ```
//!
//! A token is a roman numeral `I`..`VII` followed by an optional quality
//! suffix: none (major), `m`, `7`, `maj7` or `m7`.
//!
//! Patterns, one block per pattern:
//!
//! ```text
//! pattern travis 4/4
//! slot 0 P -1
//! slot 2 M 2
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::music::{
    ChordProgression, ChordQuality, PickPattern, PimaFinger, ScaleDegree, Stroke, TimeSignature,
    STRING_COUNT,
};

pub const SEED_PROGRESSIONS: &str = include_str!("../data/progressions.txt");
pub const SEED_PATTERNS: &str = include_str!("../data/patterns.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Strips `#` comments and surrounding whitespace; yields (1-based line number, content).
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

const NUMERALS: [&str; 7] = ["I", "II", "III", "IV", "V", "VI", "VII"];

fn parse_degree(token: &str) -> Option<ScaleDegree> {
    let split = token
        .find(|c: char| !matches!(c, 'I' | 'V'))
        .unwrap_or(token.len());
    let (numeral, suffix) = token.split_at(split);
    let degree = NUMERALS.iter().position(|&n| n == numeral)? as u8 + 1;
    let quality = match suffix {
        "" => ChordQuality::Maj,
        "m" => ChordQuality::Min,
        "7" => ChordQuality::Dom7,
        "maj7" => ChordQuality::Maj7,
        "m7" => ChordQuality::Min7,
        _ => return None,
    };
    Some(ScaleDegree { degree, quality })
}

pub fn parse_progression_db(text: &str) -> Result<Vec<ChordProgression>, ParseError> {
    let mut out = Vec::new();
    let mut names = HashSet::new();
    for (line, content) in content_lines(text) {
        let (name, body) = content
            .split_once(':')
            .ok_or_else(|| err(line, "expected 'name: DEGREE ...'"))?;
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(err(line, format!("invalid progression name '{name}'")));
        }
        let degrees = body
            .split_whitespace()
            .map(|tok| {
                parse_degree(tok).ok_or_else(|| err(line, format!("malformed degree token '{tok}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if degrees.is_empty() {
            return Err(err(line, format!("progression '{name}' is empty")));
        }
        if !names.insert(name.to_string()) {
            return Err(err(line, format!("duplicate progression name '{name}'")));
        }
        out.push(ChordProgression { name: name.to_string(), degrees });
    }
    Ok(out)
}

pub fn serialize_progression_db(progressions: &[ChordProgression]) -> String {
    let mut out = String::new();
    for prog in progressions {
        out.push_str(&prog.name);
        out.push(':');
        for d in &prog.degrees {
            let _ = write!(out, " {}{}", NUMERALS[(d.degree - 1) as usize], d.quality.suffix());
        }
        out.push('\n');
    }
    out
}

pub fn parse_pattern_db(text: &str) -> Result<Vec<PickPattern>, ParseError> {
    let mut out: Vec<PickPattern> = Vec::new();
    let mut names = HashSet::new();
    // (slot, string_ref) pairs of the pattern being built
    let mut seen: HashSet<(u32, i8)> = HashSet::new();

    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "pattern" => {
                if fields.len() != 3 {
                    return Err(err(line, "expected 'pattern <name> <num>/<den>'"));
                }
                let time_signature: TimeSignature = fields[2]
                    .parse()
                    .map_err(|e| err(line, format!("{e}")))?;
                let name = fields[1].to_string();
                if !names.insert(name.clone()) {
                    return Err(err(line, format!("duplicate pattern name '{name}'")));
                }
                if let Some(prev) = out.last() {
                    if prev.strokes.is_empty() {
                        return Err(err(line, format!("pattern '{}' has no strokes", prev.name)));
                    }
                }
                seen.clear();
                out.push(PickPattern { name, time_signature, strokes: Vec::new() });
            }
            "slot" => {
                let pattern = out
                    .last_mut()
                    .ok_or_else(|| err(line, "stroke before any 'pattern' header"))?;
                if fields.len() != 4 {
                    return Err(err(line, "expected 'slot <index> <P|I|M|A> <string_ref>'"));
                }
                let slot: u32 = fields[1]
                    .parse()
                    .map_err(|_| err(line, format!("malformed slot index '{}'", fields[1])))?;
                let spm = pattern.time_signature.slots_per_measure();
                if slot >= spm {
                    return Err(err(
                        line,
                        format!("slot {slot} out of range for {} ({spm} slots)", pattern.time_signature),
                    ));
                }
                let finger = PimaFinger::from_letter(fields[2])
                    .ok_or_else(|| err(line, format!("unknown finger '{}'", fields[2])))?;
                let string_ref: i8 = fields[3]
                    .parse()
                    .map_err(|_| err(line, format!("malformed string reference '{}'", fields[3])))?;
                if string_ref == 0 || string_ref.unsigned_abs() > STRING_COUNT {
                    return Err(err(line, format!("string reference {string_ref} must be nonzero with |r| <= 6")));
                }
                if !seen.insert((slot, string_ref)) {
                    return Err(err(line, format!("duplicate stroke at slot {slot} string {string_ref}")));
                }
                pattern.strokes.push(Stroke { slot, finger, string_ref });
            }
            other => return Err(err(line, format!("unexpected keyword '{other}'"))),
        }
    }
    if let Some(last) = out.last() {
        if last.strokes.is_empty() {
            let line = text.lines().count();
            return Err(err(line, format!("pattern '{}' has no strokes", last.name)));
        }
    }
    for p in &mut out {
        // stable: keeps declaration order within a slot
        p.strokes.sort_by_key(|s| s.slot);
    }
    Ok(out)
}

pub fn serialize_pattern_db(patterns: &[PickPattern]) -> String {
    let mut out = String::new();
    for (i, p) in patterns.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "pattern {} {}", p.name, p.time_signature);
        for s in &p.strokes {
            let _ = writeln!(out, "slot {} {} {}", s.slot, s.finger.letter(), s.string_ref);
        }
    }
    out
}

/// Parsed progression and pattern databases.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub progressions: Vec<ChordProgression>,
    pub patterns: Vec<PickPattern>,
}

impl KnowledgeBase {
    pub fn parse(progressions: &str, patterns: &str) -> Result<Self, ParseError> {
        Ok(KnowledgeBase {
            progressions: parse_progression_db(progressions)?,
            patterns: parse_pattern_db(patterns)?,
        })
    }

    /// The curated databases bundled with the crate.
    pub fn seed() -> Self {
        Self::parse(SEED_PROGRESSIONS, SEED_PATTERNS).expect("bundled databases parse")
    }

    /// Canonical text of both databases, used for hashing.
    pub fn canonical_text(&self) -> String {
        format!(
            "{}\n{}",
            serialize_progression_db(&self.progressions),
            serialize_pattern_db(&self.patterns)
        )
    }
}
