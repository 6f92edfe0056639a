use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Encoder output for the target word.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextEmbedding(pub Vec<f64>);

impl ContextEmbedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The encoder contract shared by context and gloss encoding.
///
/// An implementation that splits a word into several units (sub-words)
/// must represent the word by the average of its unit vectors, see
/// [`average_units`].
pub trait SenseEncoder {
    fn dim(&self) -> usize;

    /// Encodes `tokens` and returns the vector at `target`.
    fn encode_context(&self, tokens: &[String], target: usize) -> Result<ContextEmbedding>;

    /// Encoding of a single gloss token.
    fn encode_gloss_token(&self, token: &str) -> Vec<f64>;
}

/// Mean of the unit vectors making up one word.
pub fn average_units(units: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = units.first() else {
        return Vec::new();
    };
    let mut out = vec![0.0; first.len()];
    for u in units {
        for (o, x) in out.iter_mut().zip(u) {
            *o += x;
        }
    }
    let n = units.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Initialization range of both tables.
pub const INIT_RANGE: f32 = 0.05;

/// Trainable word-level encoder: a target table used for the target word
/// and for gloss tokens, and a context table averaged over a symmetric
/// window around the target.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceEncoder {
    pub(crate) dim: usize,
    pub(crate) window: usize,
    pub(crate) seed: u64,
    pub(crate) vocab: Vocabulary,
    pub(crate) target: Vec<f32>,
    pub(crate) context: Vec<f32>,
}

impl ReferenceEncoder {
    /// Both tables drawn from U(-0.05, 0.05) with a seeded ChaCha8 stream,
    /// target table first.
    pub fn new(dim: usize, window: usize, seed: u64, vocab: Vocabulary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        let n = vocab.size() * dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f32> {
            (0..n)
                .map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE))
                .collect()
        };
        let target = draw(n);
        let context = draw(n);
        Ok(ReferenceEncoder {
            dim,
            window,
            seed,
            vocab,
            target,
            context,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.size()
    }

    pub fn target_row(&self, id: usize) -> &[f32] {
        &self.target[id * self.dim..(id + 1) * self.dim]
    }

    pub fn context_row(&self, id: usize) -> &[f32] {
        &self.context[id * self.dim..(id + 1) * self.dim]
    }

    pub fn target_table(&self) -> &[f32] {
        &self.target
    }

    pub fn context_table(&self) -> &[f32] {
        &self.context
    }

    pub fn target_table_mut(&mut self) -> &mut [f32] {
        &mut self.target
    }

    pub fn context_table_mut(&mut self) -> &mut [f32] {
        &mut self.context
    }

    /// Indices of the context window around `target`, excluding it.
    pub fn neighbourhood(&self, len: usize, target: usize) -> std::ops::Range<usize> {
        target.saturating_sub(self.window)..(target + self.window + 1).min(len)
    }

    pub(crate) fn ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.vocab.id(t)).collect()
    }

    /// `u = T[t_i] + mean(C[t_k] for k in window, k != i)`, on token ids.
    pub(crate) fn encode_ids(&self, ids: &[usize], target: usize) -> Result<ContextEmbedding> {
        if target >= ids.len() {
            return Err(Error::IndexOutOfRange {
                index: target,
                len: ids.len(),
            });
        }
        let mut u: Vec<f64> = self.target_row(ids[target]).iter().map(|&x| x as f64).collect();
        let neighbours: Vec<usize> = self
            .neighbourhood(ids.len(), target)
            .filter(|&k| k != target)
            .collect();
        if !neighbours.is_empty() {
            let scale = 1.0 / neighbours.len() as f64;
            for &k in &neighbours {
                for (o, &c) in u.iter_mut().zip(self.context_row(ids[k])) {
                    *o += scale * c as f64;
                }
            }
        }
        Ok(ContextEmbedding(u))
    }

    /// Mean of the target-table rows of `ids`.
    pub(crate) fn gloss_ids_embedding(&self, ids: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &id in ids {
            for (o, &x) in out.iter_mut().zip(self.target_row(id)) {
                *o += x as f64;
            }
        }
        let n = ids.len().max(1) as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

impl SenseEncoder for ReferenceEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode_context(&self, tokens: &[String], target: usize) -> Result<ContextEmbedding> {
        self.encode_ids(&self.ids(tokens), target)
    }

    fn encode_gloss_token(&self, token: &str) -> Vec<f64> {
        self.target_row(self.vocab.id(token))
            .iter()
            .map(|&x| x as f64)
            .collect()
    }
}
