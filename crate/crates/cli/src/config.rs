//! TOML configuration file. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use tabsynth::{AugmentConfig, ComposerConfig, ComposerKind, HumanizeConfig, KnowledgeBase};

use crate::UsageError;

pub const CONFIG_ENV: &str = "TABSYNTH_CONFIG";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub composer: Option<ComposerKind>,
    pub workers: Option<usize>,
    pub count: Option<usize>,
    /// Progression database; the bundled one when unset.
    pub progressions: Option<PathBuf>,
    /// Picking pattern database; the bundled one when unset.
    pub patterns: Option<PathBuf>,
    #[serde(default)]
    pub composer_config: ComposerConfig,
    #[serde(default)]
    pub humanize: HumanizeConfig,
    #[serde(default)]
    pub augment: AugmentConfig,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: CliConfig =
            toml::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Resolves database paths relative to nothing: they must exist as given.
    pub fn knowledge(&self, progressions: Option<&Path>, patterns: Option<&Path>) -> anyhow::Result<KnowledgeBase> {
        let prog_path = progressions.or(self.progressions.as_deref());
        let pat_path = patterns.or(self.patterns.as_deref());
        let read = |p: Option<&Path>, fallback: &str| -> anyhow::Result<String> {
            match p {
                None => Ok(fallback.to_string()),
                Some(p) => std::fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read database {}: {e}", p.display())).into()),
            }
        };
        let prog_text = read(prog_path, tabsynth::knowledge::SEED_PROGRESSIONS)?;
        let pat_text = read(pat_path, tabsynth::knowledge::SEED_PATTERNS)?;
        let progressions = tabsynth::knowledge::parse_progression_db(&prog_text)
            .map_err(|e| UsageError(format!("{}: {e}", describe(prog_path, "bundled progressions"))))?;
        let patterns = tabsynth::knowledge::parse_pattern_db(&pat_text)
            .map_err(|e| UsageError(format!("{}: {e}", describe(pat_path, "bundled patterns"))))?;
        Ok(KnowledgeBase { progressions, patterns })
    }
}

fn describe(p: Option<&Path>, fallback: &str) -> String {
    p.map(|p| p.display().to_string()).unwrap_or_else(|| fallback.to_string())
}

/// Reads a JSON document, treating parse failures as usage errors.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}
