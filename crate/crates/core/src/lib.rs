//! Procedural fingerstyle guitar data: tablature composition, humanized
//! performance, Karplus-Strong synthesis, augmentation, dataset writing and
//! note-level evaluation.

pub mod augmentation;
pub mod composer;
pub mod dataset;
pub mod evaluation;
pub mod knowledge;
pub mod music;
pub mod performance;
pub mod seed;
pub mod synthesis;

pub use augmentation::{augment_chain, AppliedEffect, AugmentConfig};
pub use composer::{compose, sample_piece, ComposedPiece, ComposerConfig, ComposerKind, FingeringTable};
pub use dataset::{generate_dataset, DatasetSpec, Manifest};
pub use evaluation::{match_notes, prf, MatchConfig, Scores};
pub use knowledge::KnowledgeBase;
pub use music::{NoteEvent, Pitch, TabScore, TimeSignature};
pub use performance::HumanizeConfig;
pub use synthesis::{AudioBuffer, SynthParams, SAMPLE_RATE};
