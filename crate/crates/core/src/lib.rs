//! USAS semantic tagging: a lexicon-driven rule tagger, a gloss bi-encoder
//! trained on silver data, a hybrid of the two, and top-n evaluation.

pub mod bi_encoder;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod hybrid;
pub mod lexicon;
pub mod mwe;
pub mod rule_tagger;
pub mod silver;
pub mod synthetic;
pub mod tagset;
pub mod token;

pub use bi_encoder::{BiEncoder, EncoderConfig, NeuralTagger, TrainConfig, TrainingExample};
pub use corpus::Corpus;
pub use error::{Error, Result};
pub use evaluation::{evaluate_run, EvalOptions, EvalReport, MembershipMatch};
pub use hybrid::{HybridConfig, HybridTagger};
pub use lexicon::{MweLexicon, SingleWordLexicon};
pub use rule_tagger::{Provenance, RankedPrediction, RuleTagger, Tagger};
pub use tagset::{parse_tag, CategoryLabel, ParsedTag, SenseInventory};
pub use token::InputToken;
