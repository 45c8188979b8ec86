mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tabsynth::augmentation::augment_chain;
use tabsynth::composer::{compose, ComposedPiece, ComposerKind, FingeringTable};
use tabsynth::dataset::{self, generate_dataset, read_annotations, read_wav, write_annotations, write_wav, DatasetSpec, Manifest};
use tabsynth::evaluation::{prf, MatchConfig};
use tabsynth::performance::{humanize_pitch, humanize_timing, score_to_events, sort_events};
use tabsynth::synthesis::{render_performance, SAMPLE_RATE};
use tabsynth::AugmentConfig;

use config::{read_json, CliConfig, CONFIG_ENV};

/// Bad input from the user: flags, config, or files that fail validation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "tabsynth", version, about = "Procedural fingerpicking guitar audio with note annotations")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compose one piece of tablature and write it as JSON.
    Compose(ComposeArgs),
    /// Generate a dataset of audio clips, annotations and a manifest.
    Generate(GenerateArgs),
    /// Apply the random augmentation chain to a WAV file.
    Augment(AugmentArgs),
    /// Render a composed piece or an annotation file to audio.
    Synth(SynthArgs),
    /// Score an estimated annotation file against a reference.
    Evaluate(EvaluateArgs),
    /// Pretty-print a manifest, annotation file, composed piece or WAV header.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct DbArgs {
    /// Chord progression database (bundled one by default).
    #[arg(long)]
    progressions: Option<PathBuf>,
    /// Picking pattern database (bundled one by default).
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// fingerpicking or greedy.
    #[arg(long)]
    composer: Option<ComposerKind>,
    /// Fix the number of measures.
    #[arg(long)]
    measures: Option<u32>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    db: DbArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of clips.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Worker threads; does not change the output.
    #[arg(long)]
    workers: Option<usize>,
    /// Disable every augmentation effect.
    #[arg(long)]
    no_augment: bool,
    /// fingerpicking or greedy.
    #[arg(long)]
    composer: Option<ComposerKind>,
    /// Fix the number of measures per clip.
    #[arg(long)]
    measures: Option<u32>,
    #[command(flatten)]
    db: DbArgs,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long = "in", short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Gate probability for each effect.
    #[arg(long)]
    probability: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Composed piece (.json) or annotation file (.jsonl).
    #[arg(long = "in", short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Render a composed piece without timing or pitch humanization.
    #[arg(long)]
    no_humanize: bool,
    /// Also write the rendered notes as annotations.
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reference annotations.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Estimated annotations.
    #[arg(long = "est")]
    estimate: PathBuf,
    /// Onset tolerance in seconds.
    #[arg(long, default_value_t = 0.050)]
    onset_tol: f64,
    /// Also require offsets to agree.
    #[arg(long)]
    offset: bool,
}

#[derive(Args)]
struct InspectArgs {
    /// Dataset directory, manifest, piece JSON, annotation file or WAV file.
    path: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = CliConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Compose(a) => cmd_compose(&cfg, a),
        Command::Generate(a) => cmd_generate(&cfg, a),
        Command::Augment(a) => cmd_augment(&cfg, a),
        Command::Synth(a) => cmd_synth(&cfg, a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

fn composer_config(cfg: &CliConfig, measures: Option<u32>) -> anyhow::Result<tabsynth::ComposerConfig> {
    let mut cc = cfg.composer_config.clone();
    if let Some(m) = measures {
        if m == 0 {
            return Err(usage("--measures must be at least 1"));
        }
        cc.measures_per_piece = [m, m];
    }
    cc.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cc)
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_compose(cfg: &CliConfig, a: ComposeArgs) -> anyhow::Result<()> {
    let kb = cfg.knowledge(a.db.progressions.as_deref(), a.db.patterns.as_deref())?;
    let cc = composer_config(cfg, a.measures)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(cc.rng_seed);
    let kind = a.composer.or(cfg.composer).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let piece = compose(kind, &kb, &FingeringTable::standard(), &cc, &mut rng)?;
    let mut text = serde_json::to_string_pretty(&piece)?;
    text.push('\n');
    write_output(a.out.as_deref(), &text)
}

fn cmd_generate(cfg: &CliConfig, a: GenerateArgs) -> anyhow::Result<()> {
    let count = a.count.or(cfg.count).unwrap_or(1);
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let workers = a.workers.or(cfg.workers).unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let kb = cfg.knowledge(a.db.progressions.as_deref(), a.db.patterns.as_deref())?;
    let mut spec = DatasetSpec::new(count, a.seed.or(cfg.seed).unwrap_or(0), &a.out);
    spec.composer = a.composer.or(cfg.composer).unwrap_or_default();
    spec.composer_config = composer_config(cfg, a.measures)?;
    spec.humanize_config = cfg.humanize.clone();
    spec.augment_config = if a.no_augment { AugmentConfig::disabled() } else { cfg.augment.clone() };
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let manifest = generate_dataset(&spec, &kb, workers)?;
    log::info!("{} clips written, {} failed", manifest.clips.len(), manifest.failures.len());
    for f in &manifest.failures {
        eprintln!("warning: {} failed: {}", f.clip_id, f.error);
    }
    println!("{}", a.out.join(dataset::MANIFEST_FILE).display());
    if manifest.clips.is_empty() {
        bail!("every clip failed");
    }
    Ok(())
}

fn cmd_augment(cfg: &CliConfig, a: AugmentArgs) -> anyhow::Result<()> {
    let mut ac = cfg.augment.clone();
    if let Some(p) = a.probability {
        ac.effect_probability = p;
    }
    ac.validate().map_err(|e| usage(e.to_string()))?;
    let input = read_wav(&a.input).map_err(|e| usage(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.or(cfg.seed).unwrap_or(0));
    let (mut out, effects) = augment_chain(&input, &ac, &mut rng);
    out.normalize_if_hot();
    write_wav(&out, &a.out)?;
    println!("{}", serde_json::to_string(&effects)?);
    Ok(())
}

fn cmd_synth(cfg: &CliConfig, a: SynthArgs) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.or(cfg.seed).unwrap_or(0));
    let is_annotation = a.input.extension().is_some_and(|e| e == "jsonl");
    let events = if is_annotation {
        read_annotations(&a.input).map_err(|e| usage(e.to_string()))?
    } else {
        let piece: ComposedPiece = read_json(&a.input)?;
        piece.score.validate().map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
        let events = score_to_events(&piece.score);
        if a.no_humanize {
            events
        } else {
            cfg.humanize.validate().map_err(|e| usage(e.to_string()))?;
            let events = humanize_timing(&events, &cfg.humanize, &mut rng);
            let mut events = humanize_pitch(&events, &cfg.humanize, &mut rng);
            sort_events(&mut events);
            events
        }
    };
    let audio = render_performance(&events, SAMPLE_RATE, &mut rng)?;
    write_wav(&audio, &a.out)?;
    if let Some(p) = &a.annotations {
        write_annotations(&events, p)?;
    }
    log::info!("{} notes, {:.2} s", events.len(), audio.duration());
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    if !(a.onset_tol > 0.0 && a.onset_tol.is_finite()) {
        return Err(usage("--onset-tol must be positive"));
    }
    let reference = read_annotations(&a.reference).map_err(|e| usage(e.to_string()))?;
    let estimate = read_annotations(&a.estimate).map_err(|e| usage(e.to_string()))?;
    let config = MatchConfig { onset_tolerance: a.onset_tol, require_offset: a.offset, ..Default::default() };
    let s = prf(&reference, &estimate, &config);
    println!("P {:.2} R {:.2} F1 {:.2}", 100.0 * s.precision, 100.0 * s.recall, 100.0 * s.f1);
    Ok(())
}

fn cmd_inspect(a: InspectArgs) -> anyhow::Result<()> {
    let mut path = a.path.clone();
    if path.is_dir() {
        path = path.join(dataset::MANIFEST_FILE);
    }
    if !path.exists() {
        return Err(usage(format!("{} does not exist", path.display())));
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("wav") => {
            let buf = read_wav(&path).map_err(|e| usage(e.to_string()))?;
            println!("{}", path.display());
            println!("  sample rate  {} Hz", buf.sample_rate);
            println!("  samples      {}", buf.len());
            println!("  duration     {:.3} s", buf.duration());
            println!("  peak         {:.4}", buf.peak());
            println!("  rms          {:.4}", buf.rms());
        }
        Some("jsonl") => {
            let events = read_annotations(&path).map_err(|e| usage(e.to_string()))?;
            println!("{:>10} {:>10} {:>5} {:>6} {:>5} {:>9}", "onset", "offset", "midi", "string", "fret", "amplitude");
            for e in &events {
                println!(
                    "{:>10.3} {:>10.3} {:>5} {:>6} {:>5} {:>9.3}",
                    e.onset,
                    e.offset,
                    e.pitch.midi(),
                    e.string,
                    e.fret,
                    e.amplitude
                );
            }
            println!("{} notes", events.len());
        }
        _ => {
            let value: serde_json::Value = read_json(&path)?;
            if value.get("clips").is_some() {
                let m: Manifest = serde_json::from_value(value).map_err(|e| usage(e.to_string()))?;
                print_manifest(&m);
            } else {
                println!("{}", serde_json::to_string_pretty(&value)?);
            }
        }
    }
    Ok(())
}

fn print_manifest(m: &Manifest) {
    println!("tool version   {}", m.tool_version);
    println!("spec hash      {}", m.spec_hash);
    println!("knowledge hash {}", m.knowledge_hash);
    println!("master seed    {}", m.spec.master_seed);
    println!("clips          {} ok, {} failed", m.clips.len(), m.failures.len());
    let total: f64 = m.clips.iter().map(|c| c.duration_s).sum();
    println!("audio          {:.1} s", total);
    for c in &m.clips {
        let effects: Vec<&str> = c.effects.iter().map(|e| e.name()).collect();
        println!(
            "  {}  {:>6.1} s  {:>4} notes  {:>5.1} bpm  {:<5} {:<4} {:<24} {:<20} [{}]",
            c.clip_id,
            c.duration_s,
            c.note_count,
            c.tempo_bpm,
            c.time_signature.to_string(),
            c.key,
            c.progression,
            c.pattern,
            effects.join(", ")
        );
    }
    for f in &m.failures {
        println!("  {}  FAILED  {}", f.clip_id, f.error);
    }
}
