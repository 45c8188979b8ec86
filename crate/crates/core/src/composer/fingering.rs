//! Chord fingering lookup table.
//!
//! Open shapes are used where one exists for the requested root; every other
//! chord is an E-shape (root on string 6) or A-shape (root on string 5) barre,
//! whichever sits lower on the neck.

use std::collections::BTreeMap;

use crate::music::{ChordFingering, ChordQuality, ChordSymbol};

use super::ComposeError;

const X: Option<u8> = None;
const fn o(f: u8) -> Option<u8> {
    Some(f)
}

const QUALITIES: [ChordQuality; 5] = [
    ChordQuality::Maj,
    ChordQuality::Min,
    ChordQuality::Dom7,
    ChordQuality::Maj7,
    ChordQuality::Min7,
];

/// (root pitch class, quality, frets for strings 1..=6)
const OPEN_SHAPES: &[(u8, ChordQuality, [Option<u8>; 6])] = &[
    (0, ChordQuality::Maj, [o(0), o(1), o(0), o(2), o(3), X]),
    (0, ChordQuality::Dom7, [o(0), o(1), o(3), o(2), o(3), X]),
    (0, ChordQuality::Maj7, [o(0), o(0), o(0), o(2), o(3), X]),
    (2, ChordQuality::Maj, [o(2), o(3), o(2), o(0), X, X]),
    (2, ChordQuality::Min, [o(1), o(3), o(2), o(0), X, X]),
    (2, ChordQuality::Dom7, [o(2), o(1), o(2), o(0), X, X]),
    (2, ChordQuality::Maj7, [o(2), o(2), o(2), o(0), X, X]),
    (2, ChordQuality::Min7, [o(1), o(1), o(2), o(0), X, X]),
    (5, ChordQuality::Maj7, [o(0), o(1), o(2), o(3), X, X]),
    (7, ChordQuality::Maj, [o(3), o(0), o(0), o(0), o(2), o(3)]),
    (7, ChordQuality::Dom7, [o(1), o(0), o(0), o(0), o(2), o(3)]),
    (7, ChordQuality::Maj7, [o(2), o(0), o(0), o(0), o(2), o(3)]),
    (11, ChordQuality::Dom7, [o(2), o(0), o(2), o(1), o(2), X]),
];

/// Movable shape rooted on the open low E string.
fn e_shape(q: ChordQuality) -> Option<[Option<u8>; 6]> {
    Some(match q {
        ChordQuality::Maj => [o(0), o(0), o(1), o(2), o(2), o(0)],
        ChordQuality::Min => [o(0), o(0), o(0), o(2), o(2), o(0)],
        ChordQuality::Dom7 => [o(0), o(0), o(1), o(0), o(2), o(0)],
        ChordQuality::Maj7 => [o(0), o(0), o(1), o(1), o(2), o(0)],
        ChordQuality::Min7 => [o(0), o(0), o(0), o(0), o(2), o(0)],
        ChordQuality::Dim => return None,
    })
}

/// Movable shape rooted on the open A string.
fn a_shape(q: ChordQuality) -> Option<[Option<u8>; 6]> {
    Some(match q {
        ChordQuality::Maj => [o(0), o(2), o(2), o(2), o(0), X],
        ChordQuality::Min => [o(0), o(1), o(2), o(2), o(0), X],
        ChordQuality::Dom7 => [o(0), o(2), o(0), o(2), o(0), X],
        ChordQuality::Maj7 => [o(0), o(2), o(1), o(2), o(0), X],
        ChordQuality::Min7 => [o(0), o(1), o(0), o(2), o(0), X],
        ChordQuality::Dim => return None,
    })
}

fn shift(shape: [Option<u8>; 6], frets: u8) -> ChordFingering {
    ChordFingering::new(shape.map(|f| f.map(|f| f + frets)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingeringTable {
    entries: BTreeMap<(u8, ChordQuality), ChordFingering>,
}

impl FingeringTable {
    /// All 12 roots for major, minor, dominant 7th, major 7th and minor 7th chords.
    pub fn standard() -> Self {
        let mut entries = BTreeMap::new();
        for root in 0..12u8 {
            for q in QUALITIES {
                let open = OPEN_SHAPES
                    .iter()
                    .find(|(r, oq, _)| *r == root && *oq == q)
                    .map(|(_, _, frets)| ChordFingering::new(*frets));
                let fingering = open.unwrap_or_else(|| {
                    let e_fret = (root + 12 - 4) % 12;
                    let a_fret = (root + 12 - 9) % 12;
                    if e_fret <= a_fret {
                        shift(e_shape(q).unwrap(), e_fret)
                    } else {
                        shift(a_shape(q).unwrap(), a_fret)
                    }
                });
                entries.insert((root, q), fingering);
            }
        }
        FingeringTable { entries }
    }

    pub fn lookup(&self, symbol: ChordSymbol) -> Result<ChordFingering, ComposeError> {
        self.entries
            .get(&(symbol.root % 12, symbol.quality))
            .copied()
            .ok_or(ComposeError::UnsupportedChord(symbol))
    }

    /// Adds or replaces the fingering for `symbol`.
    pub fn insert(&mut self, symbol: ChordSymbol, fingering: ChordFingering) {
        self.entries.insert((symbol.root % 12, symbol.quality), fingering);
    }

    pub fn iter(&self) -> impl Iterator<Item = (ChordSymbol, &ChordFingering)> {
        self.entries
            .iter()
            .map(|(&(root, quality), f)| (ChordSymbol { root, quality }, f))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for FingeringTable {
    fn default() -> Self {
        Self::standard()
    }
}

pub fn chord_lookup(table: &FingeringTable, symbol: ChordSymbol) -> Result<ChordFingering, ComposeError> {
    table.lookup(symbol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::music::{midi_of_string_fret, MAX_FRET};

    fn sym(root: u8, quality: ChordQuality) -> ChordSymbol {
        ChordSymbol { root, quality }
    }

    #[test]
    fn open_c_major() {
        let f = FingeringTable::standard().lookup(sym(0, ChordQuality::Maj)).unwrap();
        assert_eq!(f.frets, [o(0), o(1), o(0), o(2), o(3), X]);
        assert_eq!(f.active_count(), 5);
        let (s, fr) = f.lowest_active().unwrap();
        assert_eq!(midi_of_string_fret(s, fr).unwrap().midi(), 48);
    }

    #[test]
    fn open_e_major() {
        let f = FingeringTable::standard().lookup(sym(4, ChordQuality::Maj)).unwrap();
        assert_eq!(f.frets, [o(0), o(0), o(1), o(2), o(2), o(0)]);
        assert_eq!(f.active_count(), 6);
    }

    #[test]
    fn diminished_is_unsupported() {
        let r = FingeringTable::standard().lookup(sym(6, ChordQuality::Dim));
        assert!(matches!(r, Err(ComposeError::UnsupportedChord(_))));
    }

    #[test]
    fn every_entry_is_playable_and_rooted() {
        let table = FingeringTable::standard();
        assert_eq!(table.len(), 60);
        for (symbol, f) in table.iter() {
            assert!(f.active_count() >= 4, "{symbol} has {} strings", f.active_count());
            for s in f.active_strings() {
                let fret = f.fret(s).unwrap();
                assert!(fret <= MAX_FRET);
                midi_of_string_fret(s, fret).unwrap();
            }
            let (s, fr) = f.lowest_active().unwrap();
            assert_eq!(midi_of_string_fret(s, fr).unwrap().pitch_class(), symbol.root, "{symbol}");
        }
    }

    #[test]
    fn barre_chords_stay_low() {
        let f = FingeringTable::standard().lookup(sym(6, ChordQuality::Min)).unwrap();
        // F#m as an E-shape barre at fret 2
        assert_eq!(f.frets, [o(2), o(2), o(2), o(4), o(4), o(2)]);
        let f = FingeringTable::standard().lookup(sym(0, ChordQuality::Min)).unwrap();
        // Cm as an A-shape barre at fret 3
        assert_eq!(f.frets, [o(3), o(4), o(5), o(5), o(3), X]);
    }
}
