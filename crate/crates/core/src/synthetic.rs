//! Generated corpora where the sense of every target word is fully
//! determined by the word itself. Useful for checking that training works.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusToken, Document, Sentence};
use crate::error::{Error, Result};
use crate::tagset::{CategoryLabel, ParsedTag, SenseInventory, TokenTag, UNMATCHED};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub senses: usize,
    /// One labelled target per sentence, so also the sentence count.
    pub examples: usize,
    pub words_per_sense: usize,
    pub filler_words: usize,
    pub sentence_len: usize,
    pub sentences_per_doc: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            senses: 20,
            examples: 2000,
            words_per_sense: 3,
            filler_words: 40,
            sentence_len: 6,
            sentences_per_doc: 20,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub senses: Vec<CategoryLabel>,
    /// Pseudo-word to its sense.
    pub lexicon: BTreeMap<String, CategoryLabel>,
}

/// Labels none of whose gloss tokens occur in any other label's gloss,
/// in inventory order.
pub fn distinctive_labels(inventory: &SenseInventory) -> Vec<CategoryLabel> {
    let mut owners: HashMap<&str, usize> = HashMap::new();
    for e in inventory.semantic_entries() {
        let mut seen: Vec<&str> = e.gloss_tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *owners.entry(t).or_default() += 1;
        }
    }
    inventory
        .semantic_entries()
        .filter(|e| e.gloss_tokens.iter().all(|t| owners[t.as_str()] == 1))
        .map(|e| e.label.clone())
        .collect()
}

fn pseudo_word(sense: usize, variant: usize) -> String {
    const SYL: [&str; 8] = ["ka", "lo", "mi", "nu", "pe", "ro", "su", "ti"];
    format!("{}{}{}q", SYL[sense % 8], SYL[(sense / 8) % 8], SYL[variant % 8])
}

fn filler_word(i: usize) -> String {
    format!("filler{i}")
}

/// Builds the corpus. Target tokens carry their sense; fillers carry `Z99`
/// so they yield no training examples.
pub fn separable_corpus(inventory: &SenseInventory, config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if config.sentence_len == 0 || config.sentences_per_doc == 0 || config.words_per_sense == 0 {
        return Err(Error::Config("synthetic corpus sizes must be positive".into()));
    }
    let pool = distinctive_labels(inventory);
    if pool.len() < config.senses {
        return Err(Error::InsufficientLabels {
            needed: config.senses,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let senses: Vec<CategoryLabel> = pool.choose_multiple(&mut rng, config.senses).cloned().collect();

    let mut lexicon = BTreeMap::new();
    for (s, label) in senses.iter().enumerate() {
        for v in 0..config.words_per_sense {
            lexicon.insert(pseudo_word(s, v), label.clone());
        }
    }
    let z99 = TokenTag::Semantic(ParsedTag::from_label(CategoryLabel::new(UNMATCHED)?));

    let mut documents: Vec<Document> = Vec::new();
    for n in 0..config.examples {
        if n % config.sentences_per_doc == 0 {
            documents.push(Document {
                id: format!("syn{:04}", documents.len()),
                sentences: Vec::new(),
            });
        }
        let s = n % config.senses;
        let word = pseudo_word(s, rng.gen_range(0..config.words_per_sense));
        let target = rng.gen_range(0..config.sentence_len);
        let tokens = (0..config.sentence_len)
            .map(|i| {
                if i == target {
                    let tag = TokenTag::Semantic(ParsedTag::from_label(senses[s].clone()));
                    CorpusToken::new(&word, &word, "NOUN", Some(vec![tag]))
                } else {
                    let f = filler_word(rng.gen_range(0..config.filler_words.max(1)));
                    CorpusToken::new(&f, &f, "X", Some(vec![z99.clone()]))
                }
            })
            .collect();
        documents.last_mut().unwrap().sentences.push(Sentence { tokens });
    }
    Ok(SyntheticCorpus {
        corpus: Corpus { documents },
        senses,
        lexicon,
    })
}
