//! Rule tagger with a neural back-off for words missing from the lexicons.

use serde::{Deserialize, Serialize};

use crate::bi_encoder::NeuralTagger;
use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::rule_tagger::{Provenance, RankedPrediction, RuleTagger, Tagger};
use crate::token::InputToken;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridConfig {
    /// Neural candidates emitted for an unmatched token.
    pub k_backoff: usize,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig { k_backoff: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct HybridTagger {
    rule: RuleTagger,
    neural: NeuralTagger,
    config: HybridConfig,
}

impl HybridTagger {
    pub fn new(rule: RuleTagger, neural: NeuralTagger, config: HybridConfig) -> Result<Self> {
        let m = neural.gloss_matrix().len();
        if config.k_backoff == 0 || config.k_backoff > m {
            return Err(Error::Config(format!(
                "k_backoff must be between 1 and {m}, got {}",
                config.k_backoff
            )));
        }
        Ok(HybridTagger { rule, neural, config })
    }

    pub fn rule(&self) -> &RuleTagger {
        &self.rule
    }

    pub fn neural(&self) -> &NeuralTagger {
        &self.neural
    }

    pub fn config(&self) -> HybridConfig {
        self.config
    }
}

impl Tagger for HybridTagger {
    fn tag_sentence(&self, tokens: &[InputToken]) -> Vec<RankedPrediction> {
        let words = NeuralTagger::words(tokens);
        self.rule
            .tag_sentence(tokens)
            .into_iter()
            .map(|p| {
                if p.provenance == Provenance::Unmatched {
                    self.neural
                        .predict_token(&words, p.token_index, self.config.k_backoff)
                        .expect("k validated at construction")
                } else {
                    p
                }
            })
            .collect()
    }
}

/// Hybrid predictions for one corpus sentence.
pub fn tag_hybrid(sentence: &Sentence, tagger: &HybridTagger) -> Vec<RankedPrediction> {
    tagger.tag_sentence(&sentence.input_tokens())
}
