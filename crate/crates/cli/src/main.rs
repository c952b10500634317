use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use vulncand_core::model::{Preset, DEFAULT_DELTA};
use vulncand_core::pipeline::{HyperOverrides, Manifest, Pipeline, RunConfig, StageOutcome};
use vulncand_core::syvc::parse_kinds;
use vulncand_core::vectorizer::TrainingMode;

/// Slice-based vulnerability candidate detection for C/C++ sources.
#[derive(Debug, Parser)]
#[command(name = "vulncand", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Corpus manifest (JSON).
    #[arg(long, global = true, env = "VULNCAND_MANIFEST")]
    manifest: Option<PathBuf>,
    /// Artifact directory. Defaults to the manifest's output_dir, then `out`.
    #[arg(long, global = true, env = "VULNCAND_OUT")]
    out: Option<PathBuf>,
    /// Root seed for every random choice.
    #[arg(long, global = true, env = "VULNCAND_SEED", default_value_t = 1)]
    seed: u64,
    /// Vector length; must be a multiple of --dim.
    #[arg(long, global = true, env = "VULNCAND_THETA")]
    theta: Option<usize>,
    /// Symbol embedding width.
    #[arg(long, global = true, env = "VULNCAND_DIM")]
    dim: Option<usize>,
    /// Comma-separated SyVC kinds (FC, AU, PU, AE).
    #[arg(long, global = true, env = "VULNCAND_KINDS")]
    kinds: Option<String>,
    /// Hyperparameter preset: paper, desk or custom.
    #[arg(long, global = true, env = "VULNCAND_PRESET", default_value = "desk")]
    preset: String,
    /// Classification threshold on the final activation.
    #[arg(long, global = true, env = "VULNCAND_THRESHOLD")]
    threshold: Option<f64>,
    /// Leave needs-review samples out of training.
    #[arg(long, global = true, env = "VULNCAND_STRICT_REVIEW")]
    strict_review: bool,
    /// Call list for FC candidates, one name per line.
    #[arg(long, global = true, env = "VULNCAND_FC_LIST")]
    fc_list: Option<PathBuf>,
    /// Embedding training: skipgram or hash.
    #[arg(long, global = true, env = "VULNCAND_EMBEDDING", default_value = "skipgram")]
    embedding: String,
    #[arg(long, global = true, env = "VULNCAND_EPOCHS")]
    epochs: Option<usize>,
    #[arg(long, global = true, env = "VULNCAND_HIDDEN")]
    hidden: Option<usize>,
    #[arg(long, global = true, env = "VULNCAND_LAYERS")]
    layers: Option<usize>,
    #[arg(long, global = true, env = "VULNCAND_BATCH_SIZE")]
    batch_size: Option<usize>,
    #[arg(long, global = true, env = "VULNCAND_LEARNING_RATE")]
    learning_rate: Option<f64>,
    #[arg(long, global = true, env = "VULNCAND_DROPOUT")]
    dropout: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lex and parse every program in the manifest.
    Parse,
    /// Find syntax-based vulnerability candidates.
    Extract,
    /// Slice each candidate into a semantics-based candidate.
    Slice,
    /// Symbolize, embed and encode candidates as fixed-length vectors.
    Vectorize {
        /// Reuse embeddings.json from an earlier run.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Assign ground-truth labels from annotations or diffs.
    Label,
    /// Split programs and train the classifier.
    Train,
    /// Flag candidates whose probability reaches the threshold.
    Detect {
        /// Checkpoint to use instead of <out>/model.ckpt.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score the held-out programs.
    Evaluate,
    /// Report tokens where the activation jumps.
    Explain {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Run every stage from parse to explain.
    Pipeline {
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
}

fn config(opts: &Opts) -> Result<RunConfig> {
    let preset: Preset = opts.preset.parse()?;
    let mut cfg = RunConfig::new(preset, opts.seed);
    if let Some(dim) = opts.dim {
        cfg.theta = cfg.seq_len() * dim;
        cfg.dim = dim;
    }
    if let Some(theta) = opts.theta {
        cfg.theta = theta;
    }
    if let Some(kinds) = &opts.kinds {
        cfg.kinds = parse_kinds(kinds)?;
    }
    if let Some(t) = opts.threshold {
        cfg.threshold = t;
    }
    cfg.strict_review = opts.strict_review;
    cfg.fc_list.clone_from(&opts.fc_list);
    cfg.embedding = match opts.embedding.as_str() {
        "skipgram" => TrainingMode::Skipgram,
        "hash" => TrainingMode::Hash,
        other => anyhow::bail!("unknown embedding mode `{other}` (expected skipgram or hash)"),
    };
    cfg.overrides = HyperOverrides {
        epochs: opts.epochs,
        hidden: opts.hidden,
        layers: opts.layers,
        dense_dim: None,
        batch_size: opts.batch_size,
        learning_rate: opts.learning_rate,
        dropout: opts.dropout,
    };
    Ok(cfg)
}

fn report(stage: &str, outcome: &StageOutcome) {
    for n in &outcome.notes {
        eprintln!("warning: {n}");
    }
    println!("{stage}: {} records -> {}", outcome.records, outcome.written.join(", "));
}

fn run(cli: Cli) -> Result<bool> {
    let manifest = cli
        .opts
        .manifest
        .as_deref()
        .map(|p| Manifest::load(p).with_context(|| format!("loading manifest {}", p.display())))
        .transpose()?;
    let out = cli
        .opts
        .out
        .clone()
        .or_else(|| manifest.as_ref().and_then(Manifest::output_path))
        .unwrap_or_else(|| PathBuf::from("out"));
    let pipeline = Pipeline::new(manifest, config(&cli.opts)?, out)?;
    match cli.command {
        Command::Parse => report("parse", &pipeline.parse()?),
        Command::Extract => report("extract", &pipeline.extract()?),
        Command::Slice => report("slice", &pipeline.slice()?),
        Command::Vectorize { embeddings } => report("vectorize", &pipeline.vectorize(embeddings.as_deref())?),
        Command::Label => report("label", &pipeline.label()?),
        Command::Train => report("train", &pipeline.train()?),
        Command::Evaluate => {
            let (outcome, metrics) = pipeline.evaluate()?;
            report("evaluate", &outcome);
            print!("{}", metrics.metrics);
        }
        Command::Detect { model } => {
            let (outcome, found) = pipeline.detect(model.as_deref())?;
            for d in &found {
                let lines: Vec<String> = d.lines.iter().map(u32::to_string).collect();
                println!(
                    "{}: {} in {} lines [{}] p={:.4} kind={}",
                    d.program,
                    d.file,
                    d.function,
                    lines.join(","),
                    d.probability,
                    d.kind
                );
            }
            report("detect", &outcome);
            return Ok(!found.is_empty());
        }
        Command::Explain { model, delta } => report("explain", &pipeline.explain(model.as_deref(), delta)?),
        Command::Pipeline { delta } => {
            let (stages, metrics) = pipeline.run_all(delta)?;
            for (name, outcome) in &stages {
                report(name, outcome);
            }
            print!("{}", metrics.metrics);
        }
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
