//! Gold preprocessing and top-n accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rule_tagger::{Provenance, RankedPrediction, Tagger};
use crate::tagset::{is_discardable, ParsedTag, SenseInventory};

/// One scorable token: the first gold tag group, affixes stripped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldToken {
    /// Sentence number across the whole corpus.
    pub sentence: usize,
    pub token_index: usize,
    pub gold: ParsedTag,
    pub multi_membership: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStats {
    pub tokens: usize,
    pub labelled: usize,
    pub multi_membership: usize,
}

impl GoldStats {
    pub fn multi_membership_pct(&self) -> f64 {
        if self.labelled == 0 {
            0.0
        } else {
            100.0 * self.multi_membership as f64 / self.labelled as f64
        }
    }
}

/// Keeps the first tag group of every token, drops punctuation, anything
/// with a `Z99` member and tags with a label outside `inventory`, and strips
/// affixes and MWE markers.
pub fn preprocess_gold(corpus: &Corpus, inventory: &SenseInventory) -> Result<(Vec<GoldToken>, GoldStats)> {
    let mut gold = Vec::new();
    let mut stats = GoldStats::default();
    for (s, sentence) in corpus.sentences().enumerate() {
        for (i, tok) in sentence.tokens.iter().enumerate() {
            stats.tokens += 1;
            let tags = tok.tags.as_ref().ok_or_else(|| {
                Error::InvalidExample(format!(
                    "token {:?} (line {}) has no gold tags column",
                    tok.text, tok.line
                ))
            })?;
            let Some(first) = tags.first() else { continue };
            if is_discardable(first) {
                continue;
            }
            let Some(tag) = first.as_semantic() else { continue };
            if !inventory.covers(tag) {
                continue;
            }
            let tag = tag.stripped();
            stats.labelled += 1;
            let multi = tag.is_multi_membership();
            if multi {
                stats.multi_membership += 1;
            }
            gold.push(GoldToken {
                sentence: s,
                token_index: i,
                gold: tag,
                multi_membership: multi,
            });
        }
    }
    Ok((gold, stats))
}

/// How membership tags are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipMatch {
    /// Same labels in the same order.
    #[default]
    Ordered,
    /// Same set of labels.
    Unordered,
}

pub fn tags_match(gold: &ParsedTag, predicted: &ParsedTag, mode: MembershipMatch) -> bool {
    match mode {
        MembershipMatch::Ordered => gold.membership() == predicted.membership(),
        MembershipMatch::Unordered => {
            let mut a = gold.membership().to_vec();
            let mut b = predicted.membership().to_vec();
            a.sort();
            a.dedup();
            b.sort();
            b.dedup();
            a == b
        }
    }
}

/// Rank (1-based) of the first candidate matching the gold tag.
pub fn hit_rank(gold: &ParsedTag, prediction: &RankedPrediction, mode: MembershipMatch) -> Option<usize> {
    prediction
        .candidates
        .iter()
        .position(|c| tags_match(gold, c, mode))
        .map(|r| r + 1)
}

fn check_alignment(gold: &[GoldToken], predictions: &[RankedPrediction]) -> Result<()> {
    if gold.len() != predictions.len() {
        return Err(Error::Alignment {
            position: gold.len().min(predictions.len()),
            gold: gold.len(),
            predicted: predictions.len(),
        });
    }
    for (position, (g, p)) in gold.iter().zip(predictions).enumerate() {
        if g.token_index != p.token_index {
            return Err(Error::Alignment {
                position,
                gold: g.token_index,
                predicted: p.token_index,
            });
        }
    }
    Ok(())
}

/// `predictions[j]` is the prediction for `gold[j]`.
pub fn top_n_accuracy(
    gold: &[GoldToken],
    predictions: &[RankedPrediction],
    n: usize,
    mode: MembershipMatch,
) -> Result<f64> {
    check_alignment(gold, predictions)?;
    if gold.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let hits = gold
        .iter()
        .zip(predictions)
        .filter(|(g, p)| hit_rank(&g.gold, p, mode).is_some_and(|r| r <= n))
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub n_values: Vec<usize>,
    pub membership: MembershipMatch,
    pub model: String,
    pub language: String,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            n_values: vec![1, 5],
            membership: MembershipMatch::Ordered,
            model: "model".into(),
            language: "unknown".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceBreakdown {
    pub tokens: usize,
    /// Hits at each requested n, in the order of `EvalReport::n_values`.
    pub hits: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub language: String,
    pub membership: MembershipMatch,
    pub n_values: Vec<usize>,
    pub accuracy: Vec<f64>,
    pub hits: Vec<usize>,
    pub stats: GoldStats,
    pub by_provenance: BTreeMap<Provenance, ProvenanceBreakdown>,
}

/// One machine-readable line per (model, language, n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub model: String,
    pub language: String,
    pub n: usize,
    pub accuracy: f64,
    pub hits: usize,
    pub labelled_tokens: usize,
    pub multi_membership: usize,
    pub membership: MembershipMatch,
}

impl EvalReport {
    pub fn accuracy_at(&self, n: usize) -> Option<f64> {
        self.n_values
            .iter()
            .position(|&m| m == n)
            .map(|i| self.accuracy[i])
    }

    pub fn records(&self) -> Vec<EvalRecord> {
        self.n_values
            .iter()
            .zip(&self.accuracy)
            .zip(&self.hits)
            .map(|((&n, &accuracy), &hits)| EvalRecord {
                model: self.model.clone(),
                language: self.language.clone(),
                n,
                accuracy,
                hits,
                labelled_tokens: self.stats.labelled,
                multi_membership: self.stats.multi_membership,
                membership: self.membership,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        self.records()
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data serializes") + "\n")
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}  language: {}", self.model, self.language);
        let _ = writeln!(
            out,
            "tokens: {}  labelled: {}  multi-membership: {} ({:.1}%)",
            self.stats.tokens,
            self.stats.labelled,
            self.stats.multi_membership,
            self.stats.multi_membership_pct()
        );
        let _ = write!(out, "{:<14}{:>8}", "", "tokens");
        for n in &self.n_values {
            let _ = write!(out, "{:>10}", format!("top-{n}"));
        }
        out.push('\n');
        let _ = write!(out, "{:<14}{:>8}", "all", self.stats.labelled);
        for a in &self.accuracy {
            let _ = write!(out, "{:>10.1}", 100.0 * a);
        }
        out.push('\n');
        for (prov, b) in &self.by_provenance {
            let _ = write!(out, "{:<14}{:>8}", prov.to_string(), b.tokens);
            for h in &b.hits {
                let pct = if b.tokens == 0 { 0.0 } else { 100.0 * *h as f64 / b.tokens as f64 };
                let _ = write!(out, "{pct:>10.1}");
            }
            out.push('\n');
        }
        out
    }
}

/// Tags every sentence of a gold corpus and scores it.
pub fn evaluate_run<T: Tagger + ?Sized>(
    corpus: &Corpus,
    tagger: &T,
    inventory: &SenseInventory,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if options.n_values.is_empty() || options.n_values.contains(&0) {
        return Err(Error::Config("n values must be positive".into()));
    }
    let (gold, stats) = preprocess_gold(corpus, inventory)?;
    if gold.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut predictions = Vec::with_capacity(gold.len());
    let mut next = 0;
    for (s, sentence) in corpus.sentences().enumerate() {
        if next >= gold.len() {
            break;
        }
        if gold[next].sentence != s {
            continue;
        }
        let tagged = tagger.tag_sentence(&sentence.input_tokens());
        if tagged.len() != sentence.tokens.len() {
            return Err(Error::Alignment {
                position: next,
                gold: sentence.tokens.len(),
                predicted: tagged.len(),
            });
        }
        while next < gold.len() && gold[next].sentence == s {
            predictions.push(tagged[gold[next].token_index].clone());
            next += 1;
        }
    }
    check_alignment(&gold, &predictions)?;

    let k = options.n_values.len();
    let mut hits = vec![0usize; k];
    let mut by_provenance: BTreeMap<Provenance, ProvenanceBreakdown> = BTreeMap::new();
    for (g, p) in gold.iter().zip(&predictions) {
        let rank = hit_rank(&g.gold, p, options.membership);
        let b = by_provenance.entry(p.provenance).or_insert_with(|| ProvenanceBreakdown {
            tokens: 0,
            hits: vec![0; k],
        });
        b.tokens += 1;
        for (i, &n) in options.n_values.iter().enumerate() {
            if rank.is_some_and(|r| r <= n) {
                hits[i] += 1;
                b.hits[i] += 1;
            }
        }
    }
    let accuracy = hits.iter().map(|&h| h as f64 / gold.len() as f64).collect();
    Ok(EvalReport {
        model: options.model.clone(),
        language: options.language.clone(),
        membership: options.membership,
        n_values: options.n_values.clone(),
        accuracy,
        hits,
        stats,
        by_provenance,
    })
}
