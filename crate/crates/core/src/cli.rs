//! Command implementations behind the `usas` binary.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bi_encoder::{read_checkpoint, train, write_checkpoint, BiEncoder, EncoderConfig, NeuralTagger, TrainConfig, TrainOutcome};
use crate::corpus::{Corpus, CorpusToken};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_run, EvalOptions, EvalReport, MembershipMatch};
use crate::hybrid::{HybridConfig, HybridTagger};
use crate::lexicon::{MweLexicon, PosMap, SingleWordLexicon};
use crate::rule_tagger::{RuleTagger, Tagger};
use crate::silver::{distribution_report, make_dataset, read_records, write_records, SilverStats, SplitSpec, SplitUnit};
use crate::tagset::{SenseInventory, TokenTag};

/// Environment variable naming a TOML file with default settings.
pub const CONFIG_ENV: &str = "USAS_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rule,
    Neural,
    Hybrid,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rule" => Ok(Mode::Rule),
            "neural" => Ok(Mode::Neural),
            "hybrid" => Ok(Mode::Hybrid),
            _ => Err(Error::Config(format!("unknown mode {s:?} (rule, neural, hybrid)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rule => "rule",
            Mode::Neural => "neural",
            Mode::Hybrid => "hybrid",
        })
    }
}

/// Settings shared by all commands. Loaded from TOML, then overridden by
/// command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub lexicon: Option<PathBuf>,
    pub mwe_lexicon: Option<PathBuf>,
    /// Sense inventory TSV; the bundled USAS inventory when unset.
    pub inventory: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub pos_map: Option<PathBuf>,
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub top_k: usize,
    pub k_backoff: usize,
    pub unordered_membership: bool,
    pub split: String,
    pub split_unit: SplitUnit,
    pub model_name: Option<String>,
    pub language: String,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Rule,
            lexicon: None,
            mwe_lexicon: None,
            inventory: None,
            checkpoint: None,
            corpus: None,
            pos_map: None,
            seed: 42,
            n_values: vec![1, 5],
            top_k: 1,
            k_backoff: HybridConfig::default().k_backoff,
            unordered_membership: false,
            split: "95:5".into(),
            split_unit: SplitUnit::Document,
            model_name: None,
            language: "unknown".into(),
            encoder: EncoderConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The file named by `USAS_CONFIG`, or the defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    /// SHA-256 of the canonical JSON form, for run logs.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("plain data serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.mode, Mode::Neural | Mode::Hybrid) && self.checkpoint.is_none() {
            return Err(Error::Config(format!("mode {} needs a model checkpoint", self.mode)));
        }
        if matches!(self.mode, Mode::Rule | Mode::Hybrid) && self.lexicon.is_none() {
            return Err(Error::Config(format!("mode {} needs a single-word lexicon", self.mode)));
        }
        if self.top_k == 0 || self.k_backoff == 0 {
            return Err(Error::Config("top_k and k_backoff must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::Config("n values must be positive".into()));
        }
        Ok(())
    }

    pub fn membership(&self) -> MembershipMatch {
        if self.unordered_membership {
            MembershipMatch::Unordered
        } else {
            MembershipMatch::Ordered
        }
    }

    pub fn split_spec(&self) -> Result<SplitSpec> {
        SplitSpec::parse(&self.split, self.split_unit)
    }

    pub fn load_inventory(&self) -> Result<SenseInventory> {
        match &self.inventory {
            Some(p) => SenseInventory::load(p),
            None => Ok(SenseInventory::usas()),
        }
    }

    fn corpus_path(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus given".into()))
    }

    fn log_start(&self, command: &str) {
        info!("{command}: config {} seed {}", self.hash(), self.seed);
    }
}

pub fn load_rule_tagger(config: &RunConfig) -> Result<RuleTagger> {
    let pos_map = config.pos_map.as_deref().map(PosMap::load).transpose()?;
    let lexicon = config
        .lexicon
        .as_deref()
        .ok_or_else(|| Error::Config("no single-word lexicon given".into()))?;
    let single = SingleWordLexicon::load(lexicon, pos_map.as_ref())?;
    let mwe = match &config.mwe_lexicon {
        Some(p) => MweLexicon::load(p, pos_map.as_ref())?,
        None => MweLexicon::from_entries(Vec::new()),
    };
    Ok(RuleTagger::new(single, mwe))
}

pub fn load_neural_tagger(config: &RunConfig, inventory: &SenseInventory, k: usize) -> Result<NeuralTagger> {
    let path = config
        .checkpoint
        .as_deref()
        .ok_or_else(|| Error::Config("no model checkpoint given".into()))?;
    NeuralTagger::new(read_checkpoint(path, inventory)?, k)
}

/// The tagger selected by `config.mode`.
pub fn build_tagger(config: &RunConfig, inventory: &SenseInventory, k: usize) -> Result<Box<dyn Tagger>> {
    config.validate()?;
    Ok(match config.mode {
        Mode::Rule => Box::new(load_rule_tagger(config)?),
        Mode::Neural => Box::new(load_neural_tagger(config, inventory, k)?),
        Mode::Hybrid => Box::new(HybridTagger::new(
            load_rule_tagger(config)?,
            load_neural_tagger(config, inventory, 1)?,
            HybridConfig {
                k_backoff: config.k_backoff,
            },
        )?),
    })
}

/// Tags a corpus, replacing any tags column with the top `k` predictions.
pub fn tag_corpus(corpus: &Corpus, tagger: &dyn Tagger, k: usize) -> Result<Corpus> {
    let mut out = corpus.clone();
    for doc in &mut out.documents {
        for sentence in &mut doc.sentences {
            let predictions = tagger.tag_sentence(&sentence.input_tokens());
            for (tok, p) in sentence.tokens.iter_mut().zip(predictions) {
                let tags = p
                    .top_k_strings(k)
                    .iter()
                    .map(|t| TokenTag::parse(t))
                    .collect::<Result<Vec<_>>>()?;
                *tok = CorpusToken {
                    tags: Some(tags),
                    ..tok.clone()
                };
            }
        }
    }
    Ok(out)
}

pub fn cmd_tag(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    config.log_start("tag");
    let inventory = config.load_inventory()?;
    let tagger = build_tagger(config, &inventory, config.top_k)?;
    let corpus = Corpus::load(config.corpus_path()?)?;
    let tagged = tag_corpus(&corpus, tagger.as_ref(), config.top_k)?;
    out.write_all(tagged.to_vertical().as_bytes())?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SilverSummary {
    pub train_path: PathBuf,
    pub validation_path: PathBuf,
    pub train_records: usize,
    pub validation_records: usize,
    pub stats: SilverStats,
    pub report: String,
}

/// Writes `train.jsonl`, `validation.jsonl` and `distributions.txt` to
/// `out_dir`.
pub fn cmd_build_silver(config: &RunConfig, out_dir: &Path) -> Result<SilverSummary> {
    config.log_start("build-silver");
    let inventory = config.load_inventory()?;
    let corpus = Corpus::load(config.corpus_path()?)?;
    let dataset = make_dataset(&corpus, &inventory, &config.split_spec()?, config.seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let train_path = out_dir.join("train.jsonl");
    let validation_path = out_dir.join("validation.jsonl");
    write_records(&dataset.train, &train_path)?;
    write_records(&dataset.validation, &validation_path)?;
    let report = distribution_report(&dataset.distributions, 10);
    let report_path = out_dir.join("distributions.txt");
    fs::write(&report_path, &report).map_err(|e| Error::io(&report_path, e))?;
    info!(
        "{} labelled tokens, {} examples ({:.2} labels per token)",
        dataset.stats.labelled_tokens,
        dataset.stats.examples,
        dataset.stats.labels_per_token()
    );
    Ok(SilverSummary {
        train_path,
        validation_path,
        train_records: dataset.train.len(),
        validation_records: dataset.validation.len(),
        stats: dataset.stats,
        report,
    })
}

/// Trains on silver files. Checkpoints go to `out_dir`, the best model to
/// `out_dir/model.bin`, and the per-checkpoint log to
/// `out_dir/train_log.jsonl`.
pub fn cmd_train(config: &RunConfig, train_path: &Path, validation_path: &Path, out_dir: &Path) -> Result<TrainOutcome> {
    config.log_start("train");
    let inventory = config.load_inventory()?;
    let train_set: Vec<_> = read_records(train_path)?.iter().map(|r| r.to_example()).collect();
    let validation: Vec<_> = read_records(validation_path)?
        .iter()
        .map(|r| r.to_example())
        .collect();
    let vocab = BiEncoder::build_vocabulary(&train_set, &inventory, config.encoder.oov_buckets);
    let encoder = EncoderConfig {
        seed: config.seed,
        ..config.encoder.clone()
    };
    let model = BiEncoder::new(&encoder, vocab, &inventory)?;
    let train_config = TrainConfig {
        checkpoint_dir: Some(out_dir.to_path_buf()),
        ..config.train.clone()
    };
    let outcome = train(model, &train_set, &validation, &train_config)?;
    write_checkpoint(&outcome.model, &out_dir.join("model.bin"))?;
    let log_path = out_dir.join("train_log.jsonl");
    let mut log = String::new();
    for r in &outcome.records {
        log.push_str(&serde_json::to_string(r)?);
        log.push('\n');
    }
    fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;
    Ok(outcome)
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<EvalReport> {
    config.log_start("evaluate");
    let inventory = config.load_inventory()?;
    let k = config.n_values.iter().copied().max().unwrap_or(1);
    let k = k.min(inventory.semantic_entries().count());
    let tagger = build_tagger(config, &inventory, k)?;
    let corpus = Corpus::load(config.corpus_path()?)?;
    let options = EvalOptions {
        n_values: config.n_values.clone(),
        membership: config.membership(),
        model: config.model_name.clone().unwrap_or_else(|| config.mode.to_string()),
        language: config.language.clone(),
    };
    evaluate_run(&corpus, tagger.as_ref(), &inventory, &options)
}
