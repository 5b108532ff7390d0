mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xprs_core::Result;

use commands::{EmotionSource, ScoreSource};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "xprs", version, about = "Vocal expression detection pipeline")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dotted-path override, e.g. expression.finetune.learning_rate=0.005
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Scores {
    /// CSV with score and label columns
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Expression, BoW or fusion checkpoint scored on the eval partition
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long = "embeddings")]
    embeddings: Vec<PathBuf>,
}

impl Scores {
    fn source(&self) -> ScoreSource<'_> {
        ScoreSource {
            scores: self.scores.as_deref(),
            model: self.model.as_deref(),
            manifest: self.manifest.as_deref(),
            split: self.split.as_deref(),
            features: self.features.as_deref(),
            embeddings: &self.embeddings,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded synthetic graded corpus with split file
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one FEAT file per manifest query
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// mfcc, gcc, nmcc, f0v, mfcc39, concat:a,b,... with optional +tv
        #[arg(long)]
        feature: Option<String>,
        /// Inversion checkpoint, needed for +tv streams
        #[arg(long)]
        inversion: Option<PathBuf>,
    },
    /// Train the acoustic-to-articulatory inversion network
    TrainInversion {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the two-stage expression classifier
    TrainExpr {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the valence/arousal regressor
    TrainEmo {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the bag-of-words transcript baseline
    TrainBow {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-query embeddings from an expression or emotion checkpoint
    Embed {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the embedding fusion network
    TrainFusion {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long = "embeddings", required = true)]
        embeddings: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// JSON evaluation report
    Eval {
        #[command(flatten)]
        scores: Scores,
        #[arg(long)]
        emotion_model: Option<PathBuf>,
        #[arg(long)]
        emotion_features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROC curve as CSV
    Roc {
        #[command(flatten)]
        scores: Scores,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of every architecture's gradients
    Gradcheck,
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = cli.common.overrides;
    if let Cmd::Extract { feature: Some(f), .. } = &cli.cmd {
        overrides.push(format!("feature={f}"));
    }
    let cfg = RunConfig::resolve(cli.common.config.as_deref(), &overrides, cli.common.seed)?;
    match cli.cmd {
        Cmd::Synth { out } => commands::synth(&cfg, &out),
        Cmd::Extract { manifest, out, inversion, .. } => commands::extract(&cfg, &manifest, &out, inversion.as_deref()),
        Cmd::TrainInversion { manifest, out } => commands::train_inversion_cmd(&cfg, &manifest, &out),
        Cmd::TrainExpr { manifest, split, features, out } => commands::train_expr(&cfg, &manifest, &split, &features, &out),
        Cmd::TrainEmo { manifest, split, features, out } => commands::train_emo(&cfg, &manifest, &split, &features, &out),
        Cmd::TrainBow { manifest, split, out } => commands::bow(&cfg, &manifest, &split, &out),
        Cmd::Embed { model, manifest, features, out } => commands::embed(&cfg, &model, &manifest, &features, &out),
        Cmd::TrainFusion { manifest, split, embeddings, out } => commands::train_fusion_cmd(&cfg, &manifest, &split, &embeddings, &out),
        Cmd::Eval { scores, emotion_model, emotion_features, out } => {
            let emotion = match (&emotion_model, &emotion_features) {
                (Some(m), Some(f)) => Some(EmotionSource { model: m, features: f }),
                (None, None) => None,
                _ => return Err(xprs_core::Error::BadConfig("--emotion-model and --emotion-features go together".into())),
            };
            let text = commands::eval(&cfg, &scores.source(), emotion, out.as_deref())?;
            print_unless_written(&text, out.as_deref());
            Ok(())
        }
        Cmd::Roc { scores, out } => {
            let text = commands::roc(&cfg, &scores.source(), out.as_deref())?;
            print_unless_written(&text, out.as_deref());
            Ok(())
        }
        Cmd::Gradcheck => {
            print!("{}", commands::gradcheck(&cfg)?);
            Ok(())
        }
    }
}

fn print_unless_written(text: &str, out: Option<&Path>) {
    if out.is_none() {
        print!("{text}");
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.code());
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
