use rand::seq::SliceRandom;
use rand::Rng;

use crate::music::{GridEvent, TabScore, MAX_FRET, STRING_COUNT};

use super::{ComposeError, ComposerConfig};

/// Note lengths in 16th slots: 16th, 8th, quarter, half.
pub const GREEDY_DURATIONS: [u32; 4] = [1, 2, 4, 8];

/// Unstructured baseline: every string independently receives notes with a
/// uniform fret and a uniform duration until the target length is filled.
pub fn greedy_generate<R: Rng + ?Sized>(
    config: &ComposerConfig,
    rng: &mut R,
) -> Result<TabScore, ComposeError> {
    config.validate()?;
    let time_signature = *config.time_signatures.choose(rng).expect("validated non-empty");
    let [lo, hi] = config.tempo_range;
    let tempo_bpm = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
    let [min, max] = config.measures_per_piece;
    let measure_count = rng.gen_range(min..=max);

    let spm = time_signature.slots_per_measure();
    let total = measure_count * spm;
    let mut events = Vec::new();
    for string in 1..=STRING_COUNT {
        let mut cursor = 0;
        while cursor < total {
            let fret = rng.gen_range(0..=MAX_FRET);
            let duration = *GREEDY_DURATIONS.choose(rng).expect("non-empty");
            events.push(GridEvent { measure: cursor / spm, slot: cursor % spm, string, fret });
            cursor += duration;
        }
    }
    let mut score = TabScore { tempo_bpm, time_signature, measure_count, events };
    score.sort_events();
    Ok(score)
}
