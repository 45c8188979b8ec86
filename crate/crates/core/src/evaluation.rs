//! Note-level precision, recall and F1 with onset-tolerance matching.

use serde::{Deserialize, Serialize};

use crate::music::NoteEvent;

/// Slack added to tolerance comparisons so that a 49 ms shift computed in
/// floating point is not rejected by a 50 ms window.
const TOLERANCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub onset_tolerance: f64,
    pub require_offset: bool,
    pub offset_ratio: f64,
    /// Floor for the offset window, in seconds.
    pub offset_min_tolerance: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            onset_tolerance: 0.050,
            require_offset: false,
            offset_ratio: 0.2,
            offset_min_tolerance: 0.050,
        }
    }
}

impl MatchConfig {
    pub fn with_onset_tolerance(onset_tolerance: f64) -> Self {
        MatchConfig { onset_tolerance, ..Default::default() }
    }

    pub fn admissible(&self, reference: &NoteEvent, estimate: &NoteEvent) -> bool {
        if reference.pitch.midi() != estimate.pitch.midi() {
            return false;
        }
        if (reference.onset - estimate.onset).abs() > self.onset_tolerance + TOLERANCE_EPS {
            return false;
        }
        if self.require_offset {
            let window = (self.offset_ratio * reference.duration()).max(self.offset_min_tolerance);
            if (reference.offset - estimate.offset).abs() > window + TOLERANCE_EPS {
                return false;
            }
        }
        true
    }
}

/// Maximum-cardinality matching over admissible (reference, estimate) pairs,
/// found with augmenting paths. Pairs are returned sorted by reference index.
pub fn match_notes(reference: &[NoteEvent], estimate: &[NoteEvent], config: &MatchConfig) -> Vec<(usize, usize)> {
    let adjacency: Vec<Vec<usize>> = reference
        .iter()
        .map(|r| {
            estimate
                .iter()
                .enumerate()
                .filter(|(_, e)| config.admissible(r, e))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; estimate.len()];
    for r in 0..reference.len() {
        let mut seen = vec![false; estimate.len()];
        augment(r, &adjacency, &mut owner, &mut seen);
    }

    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(e, r)| r.map(|r| (r, e)))
        .collect();
    pairs.sort_unstable();
    pairs
}

fn augment(r: usize, adjacency: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &e in &adjacency[r] {
        if seen[e] {
            continue;
        }
        seen[e] = true;
        let free = match owner[e] {
            None => true,
            Some(other) => augment(other, adjacency, owner, seen),
        };
        if free {
            owner[e] = Some(r);
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Both lists empty scores a perfect 1; one empty side scores 0.
pub fn prf(reference: &[NoteEvent], estimate: &[NoteEvent], config: &MatchConfig) -> Scores {
    if reference.is_empty() && estimate.is_empty() {
        return Scores { precision: 1.0, recall: 1.0, f1: 1.0 };
    }
    let matched = match_notes(reference, estimate, config).len() as f64;
    let ratio = |n: usize| if n == 0 { 0.0 } else { matched / n as f64 };
    let precision = ratio(estimate.len());
    let recall = ratio(reference.len());
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Scores { precision, recall, f1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::music::midi_of_string_fret;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn note(onset: f64, fret: u8) -> NoteEvent {
        NoteEvent {
            onset,
            offset: onset + 0.5,
            pitch: midi_of_string_fret(6, fret).unwrap(),
            string: 6,
            fret,
            amplitude: 1.0,
        }
    }

    fn brute_force(reference: &[NoteEvent], estimate: &[NoteEvent], config: &MatchConfig) -> usize {
        fn go(r: usize, used: &mut Vec<bool>, re: &[NoteEvent], es: &[NoteEvent], c: &MatchConfig) -> usize {
            if r == re.len() {
                return 0;
            }
            let mut best = go(r + 1, used, re, es, c);
            for e in 0..es.len() {
                if !used[e] && c.admissible(&re[r], &es[e]) {
                    used[e] = true;
                    best = best.max(1 + go(r + 1, used, re, es, c));
                    used[e] = false;
                }
            }
            best
        }
        go(0, &mut vec![false; estimate.len()], reference, estimate, config)
    }

    #[test]
    fn identical_lists_match_fully() {
        let notes: Vec<_> = (0..10).map(|i| note(i as f64 * 0.3, i as u8)).collect();
        let cfg = MatchConfig::default();
        assert_eq!(match_notes(&notes, &notes, &cfg).len(), 10);
        assert_eq!(prf(&notes, &notes, &cfg), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn tolerance_boundary() {
        let cfg = MatchConfig::default();
        let r = [note(1.0, 3)];
        for (shift, hit) in [(0.049, true), (-0.049, true), (0.051, false), (-0.051, false)] {
            let e = [note(1.0 + shift, 3)];
            assert_eq!(match_notes(&r, &e, &cfg).len(), hit as usize, "shift {shift}");
        }
        assert_eq!(match_notes(&r, &[note(1.0, 4)], &cfg).len(), 0);
    }

    #[test]
    fn greedy_trap() {
        let cfg = MatchConfig::default();
        let r = [note(0.0, 0), note(0.04, 0)];
        let e = [note(0.02, 0)];
        assert_eq!(match_notes(&r, &e, &cfg).len(), 1);
        // greedy would give the first estimate to r0 and strand r1
        let r = [note(0.0, 0), note(0.06, 0)];
        let e = [note(0.03, 0), note(0.0, 0)];
        assert_eq!(match_notes(&r, &e, &cfg).len(), 2);
    }

    #[test]
    fn spurious_estimates() {
        let reference: Vec<_> = (0..10).map(|i| note(i as f64, 0)).collect();
        let mut estimate = reference.clone();
        estimate.extend((0..10).map(|i| note(i as f64, 7)));
        let s = prf(&reference, &estimate, &MatchConfig::default());
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_conventions() {
        let cfg = MatchConfig::default();
        let one = [note(0.0, 0)];
        assert_eq!(prf(&[], &[], &cfg).f1, 1.0);
        assert_eq!(prf(&[], &one, &cfg), Scores { precision: 0.0, recall: 0.0, f1: 0.0 });
        assert_eq!(prf(&one, &[], &cfg), Scores { precision: 0.0, recall: 0.0, f1: 0.0 });
    }

    #[test]
    fn offset_mode() {
        let cfg = MatchConfig { require_offset: true, ..Default::default() };
        let r = note(0.0, 0);
        let mut e = r;
        e.offset = r.offset + 0.09;
        assert!(cfg.admissible(&r, &e));
        e.offset = r.offset + 0.11;
        assert!(!cfg.admissible(&r, &e));
        assert!(MatchConfig::default().admissible(&r, &e));
    }

    #[test]
    fn brute_force_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = MatchConfig::default();
        for _ in 0..300 {
            let gen = |rng: &mut ChaCha8Rng| -> Vec<NoteEvent> {
                let n = rng.gen_range(0..=8);
                (0..n).map(|_| note(rng.gen_range(0.0..0.3), rng.gen_range(0..3))).collect()
            };
            let r = gen(&mut rng);
            let e = gen(&mut rng);
            assert_eq!(match_notes(&r, &e, &cfg).len(), brute_force(&r, &e, &cfg));
        }
    }

    proptest! {
        #[test]
        fn permutation_invariance(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r: Vec<_> = (0..12).map(|_| note(rng.gen_range(0.0..1.0), rng.gen_range(0..3))).collect();
            let mut e: Vec<_> = (0..12).map(|_| note(rng.gen_range(0.0..1.0), rng.gen_range(0..3))).collect();
            let cfg = MatchConfig::default();
            let before = prf(&r, &e, &cfg);
            r.shuffle(&mut rng);
            e.shuffle(&mut rng);
            prop_assert_eq!(before, prf(&r, &e, &cfg));
        }

        #[test]
        fn unmatched_additions_do_not_help(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r: Vec<_> = (0..6).map(|_| note(rng.gen_range(0.0..1.0), rng.gen_range(0..3))).collect();
            let e: Vec<_> = (0..6).map(|_| note(rng.gen_range(0.0..1.0), rng.gen_range(0..3))).collect();
            let cfg = MatchConfig::default();
            let base = prf(&r, &e, &cfg);
            let mut e2 = e.clone();
            e2.push(note(0.5, 15));
            prop_assert!(prf(&r, &e2, &cfg).precision <= base.precision);
            let mut r2 = r.clone();
            r2.push(note(0.5, 15));
            prop_assert!(prf(&r2, &e, &cfg).recall <= base.recall);
        }

        #[test]
        fn matching_is_one_to_one(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r: Vec<_> = (0..8).map(|_| note(rng.gen_range(0.0..0.2), rng.gen_range(0..2))).collect();
            let e: Vec<_> = (0..8).map(|_| note(rng.gen_range(0.0..0.2), rng.gen_range(0..2))).collect();
            let cfg = MatchConfig::default();
            let m = match_notes(&r, &e, &cfg);
            let mut rs: Vec<_> = m.iter().map(|p| p.0).collect();
            let mut es: Vec<_> = m.iter().map(|p| p.1).collect();
            rs.dedup();
            es.sort_unstable();
            es.dedup();
            prop_assert_eq!(rs.len(), m.len());
            prop_assert_eq!(es.len(), m.len());
            for (a, b) in m {
                prop_assert!(cfg.admissible(&r[a], &e[b]));
            }
        }
    }
}
