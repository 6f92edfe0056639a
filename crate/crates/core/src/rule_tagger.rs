//! Lexicon-driven tagger. MWE matches outrank single-word matches; within a
//! lexicon entry the tag order is the likelihood order.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lexicon::{MweLexicon, SingleWordLexicon};
use crate::tagset::{CategoryLabel, ParsedTag, UNMATCHED};
use crate::token::InputToken;

pub const DEFAULT_PUNCTUATION_POS: [&str; 2] = ["PUNCT", "PUNC"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Mwe,
    SingleWord,
    Neural,
    Unmatched,
    Punctuation,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Mwe => "MWE",
            Provenance::SingleWord => "SINGLE_WORD",
            Provenance::Neural => "NEURAL",
            Provenance::Unmatched => "UNMATCHED",
            Provenance::Punctuation => "PUNCTUATION",
        })
    }
}

/// Ranked candidate tags for one token, most likely first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedPrediction {
    pub token_index: usize,
    pub candidates: Vec<ParsedTag>,
    pub provenance: Provenance,
}

impl RankedPrediction {
    pub fn unmatched(token_index: usize) -> Self {
        let z99 = CategoryLabel::new(UNMATCHED).expect("Z99 is a valid label");
        RankedPrediction {
            token_index,
            candidates: vec![ParsedTag::from_label(z99)],
            provenance: Provenance::Unmatched,
        }
    }

    /// Punctuation carries no candidates and is written out as `PUNC`.
    pub fn punctuation(token_index: usize) -> Self {
        RankedPrediction {
            token_index,
            candidates: Vec::new(),
            provenance: Provenance::Punctuation,
        }
    }

    pub fn top(&self) -> Option<&ParsedTag> {
        self.candidates.first()
    }

    /// The first `k` candidates as strings, or `PUNC` for punctuation.
    pub fn top_k_strings(&self, k: usize) -> Vec<String> {
        if self.provenance == Provenance::Punctuation {
            return vec!["PUNC".to_owned()];
        }
        self.candidates
            .iter()
            .take(k)
            .map(|t| t.raw().to_owned())
            .collect()
    }
}

/// Anything that tags a whole sentence at once.
pub trait Tagger: Send + Sync {
    fn tag_sentence(&self, tokens: &[InputToken]) -> Vec<RankedPrediction>;
}

impl<T: Tagger + ?Sized> Tagger for &T {
    fn tag_sentence(&self, tokens: &[InputToken]) -> Vec<RankedPrediction> {
        (**self).tag_sentence(tokens)
    }
}

pub(crate) fn punctuation_set<'a>(pos: impl IntoIterator<Item = &'a str>) -> HashSet<String> {
    pos.into_iter().map(str::to_owned).collect()
}

#[derive(Clone, Debug)]
pub struct RuleTagger {
    single: SingleWordLexicon,
    mwe: MweLexicon,
    punctuation_pos: HashSet<String>,
}

impl RuleTagger {
    pub fn new(single: SingleWordLexicon, mwe: MweLexicon) -> Self {
        RuleTagger {
            single,
            mwe,
            punctuation_pos: punctuation_set(DEFAULT_PUNCTUATION_POS),
        }
    }

    pub fn with_punctuation_pos<'a>(mut self, pos: impl IntoIterator<Item = &'a str>) -> Self {
        self.punctuation_pos = punctuation_set(pos);
        self
    }

    pub fn single_word_lexicon(&self) -> &SingleWordLexicon {
        &self.single
    }

    pub fn mwe_lexicon(&self) -> &MweLexicon {
        &self.mwe
    }

    pub fn is_punctuation(&self, token: &InputToken) -> bool {
        self.punctuation_pos.contains(&token.pos)
    }
}

impl Tagger for RuleTagger {
    fn tag_sentence(&self, tokens: &[InputToken]) -> Vec<RankedPrediction> {
        let mut out: Vec<Option<RankedPrediction>> = vec![None; tokens.len()];

        for m in self.mwe.match_sentence(tokens) {
            let tags = &self.mwe.entries()[m.entry].tags;
            for (i, slot) in out.iter_mut().enumerate().skip(m.start).take(m.length) {
                *slot = Some(RankedPrediction {
                    token_index: i,
                    candidates: tags.clone(),
                    provenance: Provenance::Mwe,
                });
            }
        }

        tokens
            .iter()
            .zip(out)
            .enumerate()
            .map(|(i, (tok, mwe))| {
                if let Some(p) = mwe {
                    return p;
                }
                if self.is_punctuation(tok) {
                    return RankedPrediction::punctuation(i);
                }
                match self.single.lookup_first(&tok.lemma, &tok.pos, &tok.text) {
                    Some((_, tags)) => RankedPrediction {
                        token_index: i,
                        candidates: tags.to_vec(),
                        provenance: Provenance::SingleWord,
                    },
                    None => RankedPrediction::unmatched(i),
                }
            })
            .collect()
    }
}

/// Tags one sentence with the given lexicons.
pub fn tag_sentence(
    tokens: &[InputToken],
    single: &SingleWordLexicon,
    mwe: &MweLexicon,
) -> Vec<RankedPrediction> {
    RuleTagger::new(single.clone(), mwe.clone()).tag_sentence(tokens)
}
