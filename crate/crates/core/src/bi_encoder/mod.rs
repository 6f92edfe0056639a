//! Gloss bi-encoder sense model.
//!
//! Context and glosses go through one shared encoder. A sense is scored by
//! the dot product of the target-word vector `u` with the mean encoding of
//! the sense's gloss tokens, and training minimises the cross-entropy of the
//! positive sense against three sampled negatives.

mod checkpoint;
mod encoder;
mod loss;
mod train;
mod vocab;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use encoder::{average_units, ContextEmbedding, ReferenceEncoder, SenseEncoder, INIT_RANGE};
pub use loss::{cross_entropy, softmax, Gradients};
pub use train::{train, validation_accuracy, CheckpointRecord, TrainConfig, TrainOutcome};
pub use vocab::Vocabulary;
pub(crate) use vocab::stable_hash;

use crate::error::{Error, Result};
use crate::rule_tagger::{punctuation_set, Provenance, RankedPrediction, Tagger, DEFAULT_PUNCTUATION_POS};
use crate::tagset::{CategoryLabel, GlossEntry, ParsedTag, SenseInventory};
use crate::token::InputToken;

/// Shape and seed of the reference encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Embedding dimension.
    pub dim: usize,
    /// Context tokens on each side of the target.
    pub window: usize,
    /// Size of the hashed band for words outside the vocabulary.
    pub oov_buckets: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: 64,
            window: 2,
            oov_buckets: 1024,
            seed: 42,
        }
    }
}

/// One positive sense against three negatives, for one target word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub tokens: Vec<String>,
    pub target_index: usize,
    pub positive: CategoryLabel,
    pub negatives: [CategoryLabel; 3],
}

impl TrainingExample {
    pub fn validate(&self) -> Result<()> {
        if self.target_index >= self.tokens.len() {
            return Err(Error::IndexOutOfRange {
                index: self.target_index,
                len: self.tokens.len(),
            });
        }
        if self.negatives.contains(&self.positive) {
            return Err(Error::InvalidExample(format!(
                "positive {} is also a negative",
                self.positive
            )));
        }
        let [a, b, c] = &self.negatives;
        if a == b || a == c || b == c {
            return Err(Error::InvalidExample("negatives are not distinct".into()));
        }
        Ok(())
    }

    /// Positive first, then the negatives.
    pub fn candidates(&self) -> [&CategoryLabel; 4] {
        let [a, b, c] = &self.negatives;
        [&self.positive, a, b, c]
    }
}

/// Precomputed sense embeddings, one row per label.
#[derive(Clone, Debug, PartialEq)]
pub struct GlossMatrix {
    dim: usize,
    rows: Vec<f64>,
    labels: Vec<CategoryLabel>,
}

impl GlossMatrix {
    pub fn new(dim: usize, labels: Vec<CategoryLabel>, rows: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                actual: rows.len(),
            });
        }
        Ok(GlossMatrix { dim, rows, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_order(&self) -> &[CategoryLabel] {
        &self.labels
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n * self.dim..(n + 1) * self.dim]
    }
}

/// Builds one row per predictable inventory label (everything but `Z99`):
/// the mean encoding of the label's gloss tokens.
pub fn build_gloss_matrix<E: SenseEncoder>(encoder: &E, inventory: &SenseInventory) -> Result<GlossMatrix> {
    let entries: Vec<&GlossEntry> = inventory.semantic_entries().collect();
    let mut rows = Vec::with_capacity(entries.len() * encoder.dim());
    for e in &entries {
        if e.gloss_tokens.is_empty() {
            return Err(Error::EmptyGloss(e.label.to_string()));
        }
        let units: Vec<Vec<f64>> = e
            .gloss_tokens
            .iter()
            .map(|t| encoder.encode_gloss_token(t))
            .collect();
        rows.extend(average_units(&units));
    }
    GlossMatrix::new(
        encoder.dim(),
        entries.iter().map(|e| e.label.clone()).collect(),
        rows,
    )
}

/// `score[n] = u . j_n`.
pub fn score(u: &ContextEmbedding, gloss: &GlossMatrix) -> Result<Vec<f64>> {
    if u.dim() != gloss.dim() {
        return Err(Error::DimensionMismatch {
            expected: gloss.dim(),
            actual: u.dim(),
        });
    }
    Ok((0..gloss.len()).map(|n| dot(&u.0, gloss.row(n))).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Labels by descending score, ties broken by ascending label code.
pub fn rank_scores(scores: &[f64], labels: &[CategoryLabel], k: usize) -> Vec<(CategoryLabel, f64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| labels[a].cmp(&labels[b]))
    });
    order
        .into_iter()
        .take(k)
        .map(|i| (labels[i].clone(), scores[i]))
        .collect()
}

/// The trainable bi-encoder: reference encoder plus the sense labels it
/// scores, in a fixed order, with their gloss tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct BiEncoder {
    encoder: ReferenceEncoder,
    labels: Vec<CategoryLabel>,
    label_index: HashMap<CategoryLabel, usize>,
    gloss_ids: Vec<Vec<usize>>,
}

impl BiEncoder {
    /// A freshly initialised model over the predictable labels of
    /// `inventory`.
    pub fn new(config: &EncoderConfig, vocab: Vocabulary, inventory: &SenseInventory) -> Result<Self> {
        let encoder = ReferenceEncoder::new(config.dim, config.window, config.seed, vocab)?;
        let labels = inventory.semantic_entries().map(|e| e.label.clone()).collect();
        Self::from_parts(encoder, labels, inventory)
    }

    /// Vocabulary covering the training sentences and every gloss.
    pub fn build_vocabulary<'a>(
        examples: impl IntoIterator<Item = &'a TrainingExample>,
        inventory: &SenseInventory,
        oov_buckets: usize,
    ) -> Vocabulary {
        let words = examples
            .into_iter()
            .flat_map(|e| e.tokens.iter().map(String::as_str))
            .chain(
                inventory
                    .entries()
                    .iter()
                    .flat_map(|e| e.gloss_tokens.iter().map(String::as_str)),
            );
        Vocabulary::build(words, oov_buckets)
    }

    pub(crate) fn from_parts(
        encoder: ReferenceEncoder,
        labels: Vec<CategoryLabel>,
        inventory: &SenseInventory,
    ) -> Result<Self> {
        let mut gloss_ids = Vec::with_capacity(labels.len());
        let mut label_index = HashMap::new();
        for (i, label) in labels.iter().enumerate() {
            let entry = inventory
                .get(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            if entry.gloss_tokens.is_empty() {
                return Err(Error::EmptyGloss(label.to_string()));
            }
            gloss_ids.push(entry.gloss_tokens.iter().map(|t| encoder.vocab.id(t)).collect());
            if label_index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
        }
        Ok(BiEncoder {
            encoder,
            labels,
            label_index,
            gloss_ids,
        })
    }

    pub fn encoder(&self) -> &ReferenceEncoder {
        &self.encoder
    }

    pub fn encoder_mut(&mut self) -> &mut ReferenceEncoder {
        &mut self.encoder
    }

    pub fn dim(&self) -> usize {
        self.encoder.dim
    }

    pub fn label_order(&self) -> &[CategoryLabel] {
        &self.labels
    }

    pub fn label_id(&self, label: &CategoryLabel) -> Result<usize> {
        self.label_index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn gloss_token_ids(&self, label_id: usize) -> &[usize] {
        &self.gloss_ids[label_id]
    }

    pub fn encode_context(&self, tokens: &[String], target: usize) -> Result<ContextEmbedding> {
        self.encoder.encode_context(tokens, target)
    }

    /// Current embedding `j_n` of one sense.
    pub fn sense_embedding(&self, label_id: usize) -> Vec<f64> {
        self.encoder.gloss_ids_embedding(&self.gloss_ids[label_id])
    }

    /// Full gloss matrix over this model's label order.
    pub fn gloss_matrix(&self) -> GlossMatrix {
        let rows = (0..self.labels.len())
            .flat_map(|n| self.sense_embedding(n))
            .collect();
        GlossMatrix::new(self.dim(), self.labels.clone(), rows).expect("row count matches labels")
    }

    /// Scores of the four candidates (positive first).
    pub fn candidate_scores(&self, example: &TrainingExample) -> Result<[f64; 4]> {
        let u = self.encode_context(&example.tokens, example.target_index)?;
        let mut s = [0.0; 4];
        for (q, label) in example.candidates().into_iter().enumerate() {
            s[q] = dot(&u.0, &self.sense_embedding(self.label_id(label)?));
        }
        Ok(s)
    }

    /// Cross-entropy of the positive among the four candidates, with the
    /// gradient for every parameter it touches.
    pub fn loss(&self, example: &TrainingExample) -> Result<(f64, Gradients)> {
        loss::loss_and_gradients(self, example)
    }

    pub fn loss_value(&self, example: &TrainingExample) -> Result<f64> {
        let s = self.candidate_scores(example)?;
        Ok(loss::cross_entropy(&s))
    }

    pub fn predict_topk(
        &self,
        gloss: &GlossMatrix,
        tokens: &[String],
        target: usize,
        k: usize,
    ) -> Result<Vec<(CategoryLabel, f64)>> {
        if k == 0 || k > gloss.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: gloss.len(),
            });
        }
        let u = self.encode_context(tokens, target)?;
        let scores = score(&u, gloss)?;
        Ok(rank_scores(&scores, gloss.label_order(), k))
    }
}

/// Encodes `tokens` and returns the target-word vector.
pub fn encode_context(model: &BiEncoder, tokens: &[String], target: usize) -> Result<ContextEmbedding> {
    model.encode_context(tokens, target)
}

pub fn predict_topk(
    model: &BiEncoder,
    gloss: &GlossMatrix,
    tokens: &[String],
    target: usize,
    k: usize,
) -> Result<Vec<(CategoryLabel, f64)>> {
    model.predict_topk(gloss, tokens, target, k)
}

/// Neural-only tagger: top-k senses for every non-punctuation token.
#[derive(Clone, Debug)]
pub struct NeuralTagger {
    model: Arc<BiEncoder>,
    gloss: Arc<GlossMatrix>,
    k: usize,
    punctuation_pos: std::collections::HashSet<String>,
}

impl NeuralTagger {
    pub fn new(model: BiEncoder, k: usize) -> Result<Self> {
        let gloss = model.gloss_matrix();
        if k == 0 || k > gloss.len() {
            return Err(Error::Config(format!(
                "k must be between 1 and {}, got {k}",
                gloss.len()
            )));
        }
        Ok(NeuralTagger {
            model: Arc::new(model),
            gloss: Arc::new(gloss),
            k,
            punctuation_pos: punctuation_set(DEFAULT_PUNCTUATION_POS),
        })
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.gloss.len() {
            return Err(Error::Config(format!(
                "k must be between 1 and {}, got {k}",
                self.gloss.len()
            )));
        }
        Ok(NeuralTagger { k, ..self.clone() })
    }

    pub fn model(&self) -> &BiEncoder {
        &self.model
    }

    pub fn gloss_matrix(&self) -> &GlossMatrix {
        &self.gloss
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Neural prediction for a single token of an already-tokenized sentence.
    pub fn predict_token(&self, words: &[String], index: usize, k: usize) -> Result<RankedPrediction> {
        let top = self.model.predict_topk(&self.gloss, words, index, k)?;
        Ok(RankedPrediction {
            token_index: index,
            candidates: top.into_iter().map(|(l, _)| ParsedTag::from_label(l)).collect(),
            provenance: Provenance::Neural,
        })
    }

    pub(crate) fn words(tokens: &[InputToken]) -> Vec<String> {
        tokens.iter().map(|t| t.text.clone()).collect()
    }
}

impl Tagger for NeuralTagger {
    fn tag_sentence(&self, tokens: &[InputToken]) -> Vec<RankedPrediction> {
        let words = Self::words(tokens);
        tokens
            .iter()
            .enumerate()
            .map(|(i, tok)| {
                if self.punctuation_pos.contains(&tok.pos) {
                    RankedPrediction::punctuation(i)
                } else {
                    self.predict_token(&words, i, self.k)
                        .expect("index and k validated at construction")
                }
            })
            .collect()
    }
}
