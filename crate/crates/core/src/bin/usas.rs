use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use usas_core::cli::{cmd_build_silver, cmd_evaluate, cmd_tag, cmd_train, Mode, RunConfig};
use usas_core::silver::SplitUnit;

/// USAS semantic tagging: rule-based, neural and hybrid.
///
/// Defaults come from the TOML file named by USAS_CONFIG, if set; flags
/// override it.
#[derive(Parser)]
#[command(name = "usas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag a vertical corpus and write it with a tags column.
    Tag {
        #[command(flatten)]
        common: Common,
        /// Ranked tags written per token.
        #[arg(long)]
        top_k: Option<usize>,
        /// Neural candidates for tokens the lexicons miss (hybrid mode).
        #[arg(long)]
        k_backoff: Option<usize>,
    },
    /// Turn a rule-tagged corpus into silver train/validation files.
    BuildSilver {
        #[command(flatten)]
        common: Common,
        /// Train:validation proportions.
        #[arg(long)]
        split: Option<String>,
        /// Split by whole documents or by sentences.
        #[arg(long, value_enum)]
        split_unit: Option<Unit>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train the bi-encoder on silver files.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        /// Directory for checkpoints, model.bin and train_log.jsonl.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        /// Embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Context tokens on each side of the target.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Score a tagger against a gold corpus.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated n values for top-n accuracy.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Compare membership tags as sets instead of sequences.
        #[arg(long)]
        unordered_membership: bool,
        #[arg(long)]
        k_backoff: Option<usize>,
        /// Name used in the report.
        #[arg(long)]
        model_name: Option<String>,
        #[arg(long)]
        language: Option<String>,
        /// Write one JSON record per n to this file.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rule,
    Neural,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Document,
    Sentence,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Single-word lexicon TSV.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// MWE template lexicon TSV.
    #[arg(long)]
    mwe_lexicon: Option<PathBuf>,
    /// Sense inventory TSV (defaults to the bundled USAS inventory).
    #[arg(long)]
    inventory: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Input corpus in vertical format.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Two-column TSV mapping lexicon POS tags to corpus POS tags.
    #[arg(long)]
    pos_map: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn apply(self, cfg: &mut RunConfig) {
        set(
            &mut cfg.mode,
            self.mode.map(|m| match m {
                ModeArg::Rule => Mode::Rule,
                ModeArg::Neural => Mode::Neural,
                ModeArg::Hybrid => Mode::Hybrid,
            }),
        );
        for (slot, value) in [
            (&mut cfg.lexicon, self.lexicon),
            (&mut cfg.mwe_lexicon, self.mwe_lexicon),
            (&mut cfg.inventory, self.inventory),
            (&mut cfg.checkpoint, self.checkpoint),
            (&mut cfg.corpus, self.corpus),
            (&mut cfg.pos_map, self.pos_map),
        ] {
            if value.is_some() {
                *slot = value;
            }
        }
        set(&mut cfg.seed, self.seed);
    }
}

fn run(cli: Cli) -> usas_core::Result<()> {
    let mut cfg = RunConfig::from_env()?;
    match cli.command {
        Command::Tag { common, top_k, k_backoff } => {
            common.apply(&mut cfg);
            set(&mut cfg.top_k, top_k);
            set(&mut cfg.k_backoff, k_backoff);
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            cmd_tag(&cfg, &mut out)?;
            out.flush()?;
        }
        Command::BuildSilver {
            common,
            split,
            split_unit,
            out,
        } => {
            common.apply(&mut cfg);
            set(&mut cfg.split, split);
            set(
                &mut cfg.split_unit,
                split_unit.map(|u| match u {
                    Unit::Document => SplitUnit::Document,
                    Unit::Sentence => SplitUnit::Sentence,
                }),
            );
            let summary = cmd_build_silver(&cfg, &out)?;
            println!(
                "{} train and {} validation records ({} labelled tokens)",
                summary.train_records, summary.validation_records, summary.stats.labelled_tokens
            );
            print!("{}", summary.report);
        }
        Command::Train {
            common,
            train,
            validation,
            out,
            learning_rate,
            batch_size,
            epochs,
            patience,
            dim,
            window,
        } => {
            common.apply(&mut cfg);
            set(&mut cfg.train.learning_rate, learning_rate);
            set(&mut cfg.train.batch_size, batch_size);
            set(&mut cfg.train.max_epochs, epochs);
            set(&mut cfg.train.patience, patience);
            set(&mut cfg.encoder.dim, dim);
            set(&mut cfg.encoder.window, window);
            cfg.train.seed = cfg.seed;
            let outcome = cmd_train(&cfg, &train, &validation, &out)?;
            let best = outcome.best_record();
            println!(
                "best: epoch {} segment {} val 4-way {:.4} top-1 {:.4}",
                best.epoch, best.segment, best.val_four_way, best.val_top1
            );
        }
        Command::Evaluate {
            common,
            n,
            unordered_membership,
            k_backoff,
            model_name,
            language,
            jsonl,
        } => {
            common.apply(&mut cfg);
            set(&mut cfg.n_values, n);
            cfg.unordered_membership |= unordered_membership;
            set(&mut cfg.k_backoff, k_backoff);
            if model_name.is_some() {
                cfg.model_name = model_name;
            }
            set(&mut cfg.language, language);
            let report = cmd_evaluate(&cfg)?;
            print!("{}", report.to_table());
            if let Some(path) = jsonl {
                std::fs::write(&path, report.to_jsonl()).map_err(|e| usas_core::Error::Io { path, source: e })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
