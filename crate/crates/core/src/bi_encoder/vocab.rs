use std::collections::{BTreeSet, HashMap};

/// Word-level vocabulary for the reference encoder.
///
/// Known words get ids `0..known`, every other word is hashed into a
/// reserved band of `oov_buckets` ids after them. Words are lowercased.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    oov_buckets: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from the given words (deduplicated, sorted).
    pub fn build<I, S>(words: I, oov_buckets: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        Self::from_words(set.into_iter().collect(), oov_buckets)
    }

    pub(crate) fn from_words(words: Vec<String>, oov_buckets: usize) -> Self {
        let oov_buckets = oov_buckets.max(1);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary {
            words,
            index,
            oov_buckets,
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn known(&self) -> usize {
        self.words.len()
    }

    pub fn oov_buckets(&self) -> usize {
        self.oov_buckets
    }

    pub fn size(&self) -> usize {
        self.words.len() + self.oov_buckets
    }

    pub fn id(&self, word: &str) -> usize {
        let lower = word.to_lowercase();
        match self.index.get(&lower) {
            Some(&i) => i,
            None => self.words.len() + (stable_hash(lower.as_bytes()) % self.oov_buckets as u64) as usize,
        }
    }
}

/// 64-bit FNV-1a; stable across platforms and toolchains.
pub(crate) fn stable_hash(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}
