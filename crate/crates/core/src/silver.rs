//! Silver training data from a rule-tagged corpus.
//!
//! Every labelled token yields one example per positive label. Each example
//! gets one negative from each of three distributions estimated on the
//! training split, never overlapping the token's positives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bi_encoder::TrainingExample;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::tagset::{is_discardable, CategoryLabel, SenseInventory, TokenTag};

/// A labelled token with its positive labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveToken {
    pub doc_id: String,
    pub doc_index: usize,
    pub sentence_index: usize,
    pub tokens: Vec<String>,
    pub target_index: usize,
    pub positives: BTreeSet<CategoryLabel>,
}

/// The positive labels of one tags column: the membership of the first tag
/// group, affixes dropped, restricted to `inventory`. `None` for punctuation,
/// anything with a `Z99` member, and tags with no label left.
pub fn token_positives(tags: &[TokenTag], inventory: &SenseInventory) -> Option<BTreeSet<CategoryLabel>> {
    let first = tags.first()?;
    if is_discardable(first) {
        return None;
    }
    let set: BTreeSet<CategoryLabel> = first
        .as_semantic()?
        .membership()
        .iter()
        .filter(|l| inventory.contains(l))
        .cloned()
        .collect();
    (!set.is_empty()).then_some(set)
}

pub fn extract_positives(corpus: &Corpus, inventory: &SenseInventory) -> Result<Vec<PositiveToken>> {
    let mut out = Vec::new();
    for (d, doc) in corpus.documents.iter().enumerate() {
        for (s, sentence) in doc.sentences.iter().enumerate() {
            let words = sentence.words();
            for (i, tok) in sentence.tokens.iter().enumerate() {
                let tags = tok.tags.as_ref().ok_or_else(|| {
                    Error::InvalidExample(format!(
                        "token {:?} (line {}) has no tags column",
                        tok.text, tok.line
                    ))
                })?;
                if let Some(positives) = token_positives(tags, inventory) {
                    out.push(PositiveToken {
                        doc_id: doc.id.clone(),
                        doc_index: d,
                        sentence_index: s,
                        tokens: words.clone(),
                        target_index: i,
                        positives,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Label counts over exploded positives. Every inventory label is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagFrequencyTable {
    counts: BTreeMap<CategoryLabel, u64>,
    total: u64,
}

impl TagFrequencyTable {
    pub fn new(inventory: &SenseInventory) -> Self {
        TagFrequencyTable {
            counts: inventory
                .semantic_entries()
                .map(|e| (e.label.clone(), 0))
                .collect(),
            total: 0,
        }
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (CategoryLabel, u64)>) -> Self {
        let counts: BTreeMap<CategoryLabel, u64> = counts.into_iter().collect();
        let total = counts.values().sum();
        TagFrequencyTable { counts, total }
    }

    pub fn add(&mut self, label: &CategoryLabel) {
        if let Some(c) = self.counts.get_mut(label) {
            *c += 1;
            self.total += 1;
        }
    }

    pub fn count(&self, label: &CategoryLabel) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<CategoryLabel, u64> {
        &self.counts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SamplingKind {
    Original,
    Inverse,
    LogInverse,
}

impl SamplingKind {
    pub const ALL: [SamplingKind; 3] = [SamplingKind::Original, SamplingKind::Inverse, SamplingKind::LogInverse];

    fn weight(self, count: u64, total: u64) -> f64 {
        if count == 0 {
            return 0.0;
        }
        let c = count as f64;
        match self {
            SamplingKind::Original => c / total as f64,
            SamplingKind::Inverse => 1.0 / c,
            SamplingKind::LogInverse => (1.0 + total as f64 / c).log2(),
        }
    }
}

impl fmt::Display for SamplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingKind::Original => "ORIGINAL",
            SamplingKind::Inverse => "INVERSE",
            SamplingKind::LogInverse => "LOG_INVERSE",
        })
    }
}

/// Normalized weights over every label of the frequency table.
#[derive(Clone, Debug)]
pub struct SamplingDistribution {
    kind: SamplingKind,
    labels: Vec<CategoryLabel>,
    weights: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl SamplingDistribution {
    pub fn kind(&self) -> SamplingKind {
        self.kind
    }

    pub fn labels(&self) -> &[CategoryLabel] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, label: &CategoryLabel) -> f64 {
        self.labels
            .binary_search(label)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// Labels with nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = &CategoryLabel> {
        self.labels
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(l, _)| l)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &CategoryLabel {
        &self.labels[self.index.sample(rng)]
    }

    /// Draws from the distribution conditioned on avoiding `excluded`.
    /// Plain rejection first; if that keeps failing, samples once from the
    /// renormalized remainder, which has the same conditional law.
    pub fn sample_excluding<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        excluded: &dyn Fn(&CategoryLabel) -> bool,
    ) -> Option<&CategoryLabel> {
        const TRIES: usize = 64;
        for _ in 0..TRIES {
            let l = self.sample(rng);
            if !excluded(l) {
                return Some(l);
            }
        }
        let restricted: Vec<f64> = self
            .labels
            .iter()
            .zip(&self.weights)
            .map(|(l, &w)| if excluded(l) { 0.0 } else { w })
            .collect();
        let index = WeightedIndex::new(&restricted).ok()?;
        Some(&self.labels[index.sample(rng)])
    }
}

#[derive(Clone, Debug)]
pub struct Distributions {
    pub original: SamplingDistribution,
    pub inverse: SamplingDistribution,
    pub log_inverse: SamplingDistribution,
}

impl Distributions {
    pub fn iter(&self) -> impl Iterator<Item = &SamplingDistribution> {
        [&self.original, &self.inverse, &self.log_inverse].into_iter()
    }

    pub fn get(&self, kind: SamplingKind) -> &SamplingDistribution {
        match kind {
            SamplingKind::Original => &self.original,
            SamplingKind::Inverse => &self.inverse,
            SamplingKind::LogInverse => &self.log_inverse,
        }
    }
}

pub fn build_distributions(freq: &TagFrequencyTable) -> Result<Distributions> {
    if freq.total() == 0 {
        return Err(Error::EmptyTable);
    }
    let labels: Vec<CategoryLabel> = freq.counts().keys().cloned().collect();
    let build = |kind: SamplingKind| {
        let raw: Vec<f64> = freq
            .counts()
            .values()
            .map(|&c| kind.weight(c, freq.total()))
            .collect();
        let z: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / z).collect();
        let index = WeightedIndex::new(&weights).expect("at least one positive weight");
        SamplingDistribution {
            kind,
            labels: labels.clone(),
            weights,
            index,
        }
    };
    Ok(Distributions {
        original: build(SamplingKind::Original),
        inverse: build(SamplingKind::Inverse),
        log_inverse: build(SamplingKind::LogInverse),
    })
}

/// One draw per distribution, distinct and disjoint from `positives`.
pub fn sample_negatives<R: Rng + ?Sized>(
    positives: &BTreeSet<CategoryLabel>,
    dists: &Distributions,
    rng: &mut R,
) -> Result<[CategoryLabel; 3]> {
    let available = dists
        .original
        .support()
        .filter(|l| !positives.contains(*l))
        .count();
    if available < 3 {
        return Err(Error::InsufficientLabels { needed: 3, available });
    }
    let mut drawn: Vec<CategoryLabel> = Vec::with_capacity(3);
    for dist in dists.iter() {
        let label = {
            let excluded = |l: &CategoryLabel| positives.contains(l) || drawn.contains(l);
            dist.sample_excluding(rng, &excluded)
                .ok_or(Error::InsufficientLabels { needed: 3, available })?
                .clone()
        };
        drawn.push(label);
    }
    Ok(drawn.try_into().expect("three draws"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeSet {
    pub original: CategoryLabel,
    pub inverse: CategoryLabel,
    pub log_inverse: CategoryLabel,
}

/// One line of a silver dataset file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilverRecord {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub target_index: usize,
    pub positive: CategoryLabel,
    pub negatives: NegativeSet,
}

impl SilverRecord {
    pub fn to_example(&self) -> TrainingExample {
        TrainingExample {
            tokens: self.tokens.clone(),
            target_index: self.target_index,
            positive: self.positive.clone(),
            negatives: [
                self.negatives.original.clone(),
                self.negatives.inverse.clone(),
                self.negatives.log_inverse.clone(),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitUnit {
    Document,
    Sentence,
}

/// Train/validation proportions, e.g. `95:5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub unit: SplitUnit,
    pub train: u32,
    pub validation: u32,
}

impl SplitSpec {
    pub fn new(unit: SplitUnit, train: u32, validation: u32) -> Result<Self> {
        if train + validation == 0 {
            return Err(Error::Config("split proportions sum to zero".into()));
        }
        Ok(SplitSpec {
            unit,
            train,
            validation,
        })
    }

    pub fn parse(text: &str, unit: SplitUnit) -> Result<Self> {
        let bad = || Error::Config(format!("split must look like 95:5, got {text:?}"));
        let (a, b) = text.split_once(':').ok_or_else(bad)?;
        let train = a.trim().parse().map_err(|_| bad())?;
        let validation = b.trim().parse().map_err(|_| bad())?;
        Self::new(unit, train, validation)
    }

    /// Units going to the training side, rounded to nearest.
    pub fn train_count(&self, units: usize) -> usize {
        let total = (self.train + self.validation) as usize;
        (units * self.train as usize + total / 2) / total
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            unit: SplitUnit::Document,
            train: 95,
            validation: 5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SilverStats {
    pub tokens: usize,
    pub labelled_tokens: usize,
    pub examples: usize,
}

impl SilverStats {
    pub fn labels_per_token(&self) -> f64 {
        if self.labelled_tokens == 0 {
            0.0
        } else {
            self.examples as f64 / self.labelled_tokens as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct SilverDataset {
    pub train: Vec<SilverRecord>,
    pub validation: Vec<SilverRecord>,
    pub frequencies: TagFrequencyTable,
    pub distributions: Distributions,
    pub stats: SilverStats,
}

/// RNG stream for one document, independent of processing order.
fn document_rng(seed: u64, doc_id: &str) -> ChaCha8Rng {
    let mut key = seed.to_le_bytes().to_vec();
    key.extend_from_slice(doc_id.as_bytes());
    ChaCha8Rng::seed_from_u64(crate::bi_encoder::stable_hash(&key))
}

pub fn make_dataset(
    corpus: &Corpus,
    inventory: &SenseInventory,
    split: &SplitSpec,
    seed: u64,
) -> Result<SilverDataset> {
    let positives = extract_positives(corpus, inventory)?;
    if positives.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Split units: (doc_index, sentence_index or usize::MAX for whole documents).
    let unit_of = |p: &PositiveToken| match split.unit {
        SplitUnit::Document => (p.doc_index, usize::MAX),
        SplitUnit::Sentence => (p.doc_index, p.sentence_index),
    };
    let mut units: Vec<(usize, usize)> = match split.unit {
        SplitUnit::Document => (0..corpus.documents.len()).map(|d| (d, usize::MAX)).collect(),
        SplitUnit::Sentence => corpus
            .documents
            .iter()
            .enumerate()
            .flat_map(|(d, doc)| (0..doc.sentences.len()).map(move |s| (d, s)))
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    units.shuffle(&mut rng);
    let train_units: BTreeSet<(usize, usize)> = units[..split.train_count(units.len())].iter().copied().collect();
    if train_units.len() == units.len() {
        warn!("validation split is empty");
    }

    let (train_pos, val_pos): (Vec<&PositiveToken>, Vec<&PositiveToken>) =
        positives.iter().partition(|p| train_units.contains(&unit_of(p)));

    let mut frequencies = TagFrequencyTable::new(inventory);
    for p in &train_pos {
        for l in &p.positives {
            frequencies.add(l);
        }
    }
    let distributions = build_distributions(&frequencies)?;

    let explode = |group: &[&PositiveToken]| -> Result<Vec<SilverRecord>> {
        let mut out = Vec::new();
        let mut current: Option<(usize, ChaCha8Rng)> = None;
        for p in group {
            if current.as_ref().map(|(d, _)| *d) != Some(p.doc_index) {
                current = Some((p.doc_index, document_rng(seed, &p.doc_id)));
            }
            let rng = &mut current.as_mut().unwrap().1;
            for positive in &p.positives {
                let [original, inverse, log_inverse] = sample_negatives(&p.positives, &distributions, rng)?;
                out.push(SilverRecord {
                    doc_id: p.doc_id.clone(),
                    tokens: p.tokens.clone(),
                    target_index: p.target_index,
                    positive: positive.clone(),
                    negatives: NegativeSet {
                        original,
                        inverse,
                        log_inverse,
                    },
                });
            }
        }
        Ok(out)
    };
    let train = explode(&train_pos)?;
    let validation = explode(&val_pos)?;

    let stats = SilverStats {
        tokens: corpus.token_count(),
        labelled_tokens: positives.len(),
        examples: train.len() + validation.len(),
    };
    Ok(SilverDataset {
        train,
        validation,
        frequencies,
        distributions,
        stats,
    })
}

/// Top and bottom `n` labels of each distribution's support.
pub fn distribution_report(dists: &Distributions, n: usize) -> String {
    let mut out = String::new();
    for dist in dists.iter() {
        let mut ranked: Vec<(&CategoryLabel, f64)> = dist
            .labels()
            .iter()
            .zip(dist.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(l, &w)| (l, w))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let _ = writeln!(out, "{} ({} labels)", dist.kind(), ranked.len());
        let fmt = |items: &[(&CategoryLabel, f64)]| {
            items
                .iter()
                .map(|(l, w)| format!("{l}={w:.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let k = n.min(ranked.len());
        let _ = writeln!(out, "  top:    {}", fmt(&ranked[..k]));
        let _ = writeln!(out, "  bottom: {}", fmt(&ranked[ranked.len() - k..]));
    }
    out
}

pub fn write_records(records: &[SilverRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<SilverRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SilverRecord =
            serde_json::from_str(&line).map_err(|e| Error::at_line(path, n + 1, e.into()))?;
        let ex = record.to_example();
        ex.validate().map_err(|e| Error::at_line(path, n + 1, e))?;
        out.push(record);
    }
    Ok(out)
}
