//! `entfix`: detect and correct entity/quantity hallucinations in
//! summaries.
//!
//! Settings come from one TOML file (`--config`); flags override it.
//! Environment variables are never read.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use entfix::config::{derive_seed, PipelineConfig, RecognizerConfig, ScorerConfig};
use entfix::contrast::TrainingPair;
use entfix::corpus::{load_examples, read_records, write_records, Example};
use entfix::eval::{BootstrapSettings, IdentificationMode};
use entfix::pipeline::{self, EvalOptions};
use entfix::ranker::save_model;
use entfix::select::SelectionOutcome;

#[derive(Parser)]
#[command(name = "entfix", version, about = "Entity hallucination detection and correction for summaries")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-example stages.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Abort on the first malformed input record instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Args)]
struct Io {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Changed,
    Threshold,
}

#[derive(Subcommand)]
enum Command {
    /// Flag summaries whose entities have no match in the document.
    Detect(Io),
    /// Write contrast candidates for every example.
    Generate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        max_candidates: Option<usize>,
    },
    /// Build (faithful, corrupted) training pairs from reference summaries.
    Synth {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        negatives_per_example: Option<usize>,
    },
    /// Train the built-in ranker on training pairs.
    Train {
        #[command(flatten)]
        io: Io,
        /// Where to write the training report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run detection, generation, scoring and selection end to end.
    Correct {
        #[command(flatten)]
        io: Io,
        /// Model file for the built-in scorer; overrides the config.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        max_candidates: Option<usize>,
    },
    /// Evaluate selection outcomes.
    Eval {
        #[command(flatten)]
        io: Io,
        /// Examples holding reference summaries and gold flags.
        #[arg(long)]
        examples: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Changed)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
    },
    /// Write a synthetic demo corpus, gazetteer and config to a directory.
    Fixtures {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 200)]
        train: usize,
        #[arg(long, default_value_t = 100)]
        test: usize,
    },
}

fn load_config(global: &Global) -> Result<PipelineConfig> {
    let mut config = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn load(path: &Path, strict: bool) -> Result<Vec<Example>> {
    let loaded = load_examples(path, strict).with_context(|| format!("corpus: {}", path.display()))?;
    for (line, detail) in &loaded.diagnostics.problems {
        eprintln!("skipped {}:{line}: {detail}", path.display());
    }
    Ok(loaded.examples)
}

fn write<T: serde::Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let n = write_records(path, records).with_context(|| format!("corpus: {}", path.display()))?;
    eprintln!("wrote {n} records to {}", path.display());
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let mut config = load_config(g)?;
    match cli.command {
        Command::Detect(io) => {
            let examples = load(&io.input, g.strict)?;
            let rec = pipeline::build_recognizer(&config)?;
            write(&io.output, &pipeline::run_detect(&examples, rec.as_ref(), g.parallel)?)
        }
        Command::Generate { io, max_candidates } => {
            if let Some(n) = max_candidates {
                config.max_candidates = n;
            }
            config.validate()?;
            let examples = load(&io.input, g.strict)?;
            let rec = pipeline::build_recognizer(&config)?;
            let records = pipeline::run_generate(&examples, rec.as_ref(), config.max_candidates, g.parallel)?;
            write(&io.output, &records)
        }
        Command::Synth { io, negatives_per_example } => {
            if let Some(n) = negatives_per_example {
                config.negatives_per_example = n;
            }
            config.validate()?;
            let examples = load(&io.input, g.strict)?;
            let rec = pipeline::build_recognizer(&config)?;
            let pairs = pipeline::run_synth(&examples, rec.as_ref(), config.negatives_per_example, config.seed)?;
            write(&io.output, &pairs)
        }
        Command::Train { io, report } => {
            let pairs: Vec<TrainingPair> =
                read_records(&io.input).with_context(|| format!("corpus: {}", io.input.display()))?;
            let rec = pipeline::build_recognizer(&config)?;
            let (model, summary) = pipeline::run_train(&pairs, rec.as_ref(), &config)?;
            save_model(&model, &io.output).map_err(pipeline::PipelineError::from)?;
            eprintln!(
                "trained on {} pairs; epoch losses {:?}; pairwise accuracy {:.4}",
                summary.pairs, summary.epoch_losses, summary.pairwise_accuracy
            );
            if let Some(path) = report {
                write_json(&path, &summary)?;
            }
            Ok(())
        }
        Command::Correct { io, model, max_candidates } => {
            if let Some(n) = max_candidates {
                config.max_candidates = n;
            }
            config.validate()?;
            let examples = load(&io.input, g.strict)?;
            let rec = pipeline::build_recognizer(&config)?;
            let scorer = pipeline::build_scorer(&config, rec.clone(), model.as_deref())?;
            let outcomes = pipeline::run_correct(&examples, rec.as_ref(), scorer.as_ref(), &config, g.parallel)?;
            for o in outcomes.iter().filter(|o| o.diagnostic.is_some()) {
                eprintln!("{}: {}", o.example_id, o.diagnostic.as_deref().unwrap_or_default());
            }
            write(&io.output, &outcomes)
        }
        Command::Eval { io, examples, mode, threshold, resamples, z } => {
            let outcomes: Vec<SelectionOutcome> =
                read_records(&io.input).with_context(|| format!("corpus: {}", io.input.display()))?;
            let examples = match examples {
                Some(p) => load(&p, g.strict)?,
                None => Vec::new(),
            };
            let mode = match mode {
                Mode::Changed => IdentificationMode::Changed,
                Mode::Threshold => IdentificationMode::Threshold(threshold),
            };
            let options = EvalOptions {
                mode,
                bootstrap: Some(BootstrapSettings { resamples, seed: derive_seed(config.seed, "eval"), z }),
                threads: g.parallel,
            };
            let report = pipeline::run_eval(&outcomes, &examples, &options)?;
            print!("{report}");
            write_json(&io.output, &report)
        }
        Command::Fixtures { output, train, test } => write_fixtures(&output, train, test, config.seed),
    }
}

fn write_fixtures(dir: &Path, train: usize, test: usize, seed: u64) -> Result<()> {
    use entfix::fixtures::{clean_examples, plant_hallucinations, write_gazetteer_tsv};
    if train == 0 || test == 0 {
        bail!("--train and --test must be positive");
    }
    std::fs::create_dir_all(dir)?;
    write(&dir.join("train.jsonl"), &clean_examples(train, derive_seed(seed, "fixtures-train"), "train-"))?;
    let clean = clean_examples(test, derive_seed(seed, "fixtures-test"), "test-");
    let (planted, _) = plant_hallucinations(&clean, derive_seed(seed, "fixtures-plant"));
    let mut corpus = Vec::with_capacity(2 * test);
    for (c, mut p) in clean.into_iter().zip(planted) {
        p.id.push_str("-planted");
        corpus.push(c);
        corpus.push(p);
    }
    write(&dir.join("test.jsonl"), &corpus)?;
    write_gazetteer_tsv(dir.join("gazetteers.tsv"))?;
    let config = PipelineConfig {
        recognizer: RecognizerConfig::Builtin { gazetteers: vec![PathBuf::from("gazetteers.tsv")] },
        scorer: ScorerConfig::Builtin { model: None },
        seed,
        ..PipelineConfig::default()
    };
    std::fs::write(dir.join("config.toml"), config.to_toml())?;
    eprintln!("wrote config.toml and gazetteers.tsv to {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render_chain(&e));
            ExitCode::FAILURE
        }
    }
}

/// The error chain joined by ": ", skipping causes already quoted by the
/// message above them.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}
