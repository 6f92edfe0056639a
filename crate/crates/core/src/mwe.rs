//! MWE template language: whitespace-separated `word_POS` slots where `*`
//! matches any (possibly empty) run of characters inside a slot part.
//!
//! A slot matches a token when its word part matches the token text or the
//! lemma, and its POS part matches the POS. Word parts are compared
//! case-sensitively first; a pattern that finds nothing anywhere in the
//! sentence gets a second, lowercased pass. POS parts are always verbatim.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::token::InputToken;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Part {
    raw: String,
    lower: String,
}

impl Part {
    fn new(raw: &str) -> Self {
        Part {
            raw: raw.to_owned(),
            lower: raw.to_lowercase(),
        }
    }

    fn is_literal(&self) -> bool {
        !self.raw.contains('*')
    }

    fn matches(&self, text: &str) -> bool {
        glob_match(&self.raw, text)
    }

    fn matches_lowercase(&self, lowered_text: &str) -> bool {
        glob_match(&self.lower, lowered_text)
    }
}

/// `*` matches any run of characters; everything else is literal.
fn glob_match(pattern: &str, text: &str) -> bool {
    let mut pieces = pattern.split('*');
    let first = pieces.next().unwrap_or("");
    let Some(mut rest) = text.strip_prefix(first) else {
        return false;
    };
    let pieces: Vec<&str> = pieces.collect();
    let Some((last, middle)) = pieces.split_last() else {
        // no wildcard at all
        return rest.is_empty();
    };
    for piece in middle {
        match rest.find(piece) {
            Some(i) => rest = &rest[i + piece.len()..],
            None => return false,
        }
    }
    rest.ends_with(last)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    word: Part,
    pos: Part,
}

impl Slot {
    pub fn word_part(&self) -> &str {
        &self.word.raw
    }

    pub fn pos_part(&self) -> &str {
        &self.pos.raw
    }

    fn matches(&self, token: &InputToken, lowercase: bool) -> bool {
        if !self.pos.matches(&token.pos) {
            return false;
        }
        if lowercase {
            self.word.matches_lowercase(&token.text.to_lowercase())
                || self.word.matches_lowercase(&token.lemma.to_lowercase())
        } else {
            self.word.matches(&token.text) || self.word.matches(&token.lemma)
        }
    }
}

/// A compiled MWE template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    slots: Vec<Slot>,
    source: String,
}

impl Pattern {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn matches_at(&self, tokens: &[InputToken], start: usize, lowercase: bool) -> bool {
        start + self.slots.len() <= tokens.len()
            && self
                .slots
                .iter()
                .zip(&tokens[start..])
                .all(|(slot, tok)| slot.matches(tok, lowercase))
    }

    /// Rewrites literal POS parts through `map`.
    pub(crate) fn map_pos(&mut self, map: impl Fn(&str) -> Option<String>) {
        for slot in &mut self.slots {
            if slot.pos.is_literal() {
                if let Some(to) = map(&slot.pos.raw) {
                    slot.pos = Part::new(&to);
                }
            }
        }
    }
}

pub fn compile_template(template: &str) -> Result<Pattern> {
    let bad = |reason: &str| Error::MalformedTemplate {
        template: template.to_owned(),
        reason: reason.to_owned(),
    };
    let mut slots = Vec::new();
    for raw in template.split_whitespace() {
        let mut parts = raw.split('_');
        let (Some(word), Some(pos), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(&format!("slot {raw:?} must contain exactly one '_'")));
        };
        if word.is_empty() || pos.is_empty() {
            return Err(bad(&format!("slot {raw:?} has an empty part")));
        }
        slots.push(Slot {
            word: Part::new(word),
            pos: Part::new(pos),
        });
    }
    if slots.len() < 2 {
        return Err(bad("an MWE template needs at least two slots"));
    }
    Ok(Pattern {
        slots,
        source: template.to_owned(),
    })
}

/// An accepted MWE span. `entry` indexes the pattern list the match was
/// computed against (lexicon file order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MweMatch {
    pub start: usize,
    pub length: usize,
    pub entry: usize,
}

impl MweMatch {
    pub fn covers(&self, index: usize) -> bool {
        (self.start..self.start + self.length).contains(&index)
    }
}

/// Greedy selection: longer span first, then leftmost start, then lower
/// pattern index. Returns matches sorted by start.
fn select_non_overlapping(mut candidates: Vec<MweMatch>, sentence_len: usize) -> Vec<MweMatch> {
    candidates.sort_by_key(|m| (std::cmp::Reverse(m.length), m.start, m.entry));
    let mut taken = vec![false; sentence_len];
    let mut accepted = Vec::new();
    for m in candidates {
        let span = m.start..m.start + m.length;
        if taken[span.clone()].iter().any(|&t| t) {
            continue;
        }
        taken[span].iter_mut().for_each(|t| *t = true);
        accepted.push(m);
    }
    accepted.sort_by_key(|m| m.start);
    accepted
}

fn matches_for_pattern(
    pattern: &Pattern,
    entry: usize,
    tokens: &[InputToken],
    starts: impl Iterator<Item = usize> + Clone,
    out: &mut Vec<MweMatch>,
) {
    let len = pattern.len();
    let before = out.len();
    for lowercase in [false, true] {
        out.extend(
            starts
                .clone()
                .filter(|&s| pattern.matches_at(tokens, s, lowercase))
                .map(|start| MweMatch {
                    start,
                    length: len,
                    entry,
                }),
        );
        if out.len() > before {
            break;
        }
    }
}

/// Finds the maximal non-overlapping MWE matches by scanning every pattern at
/// every position.
pub fn match_sentence(patterns: &[Pattern], tokens: &[InputToken]) -> Vec<MweMatch> {
    let mut candidates = Vec::new();
    for (entry, pattern) in patterns.iter().enumerate() {
        if pattern.len() > tokens.len() {
            continue;
        }
        let starts = 0..=tokens.len() - pattern.len();
        matches_for_pattern(pattern, entry, tokens, starts, &mut candidates);
    }
    select_non_overlapping(candidates, tokens.len())
}

/// Pattern set indexed by the first literal word slot, so that only patterns
/// anchored on a word present in the sentence are tried. Produces the same
/// result as [`match_sentence`].
#[derive(Clone, Debug, Default)]
pub struct MweMatcher {
    patterns: Vec<Pattern>,
    by_literal: HashMap<String, Vec<(usize, usize)>>,
    unanchored: Vec<usize>,
}

impl MweMatcher {
    pub fn new(patterns: Vec<Pattern>) -> Self {
        let mut by_literal: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
        let mut unanchored = Vec::new();
        for (i, p) in patterns.iter().enumerate() {
            match p.slots.iter().position(|s| s.word.is_literal()) {
                Some(k) => by_literal
                    .entry(p.slots[k].word.lower.clone())
                    .or_default()
                    .push((i, k)),
                None => unanchored.push(i),
            }
        }
        MweMatcher {
            patterns,
            by_literal,
            unanchored,
        }
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn match_sentence(&self, tokens: &[InputToken]) -> Vec<MweMatch> {
        let mut starts: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for (t, tok) in tokens.iter().enumerate() {
            let text = tok.text.to_lowercase();
            let lemma = tok.lemma.to_lowercase();
            let keys = if text == lemma { vec![text] } else { vec![text, lemma] };
            for key in &keys {
                for &(p, k) in self.by_literal.get(key).into_iter().flatten() {
                    let n = self.patterns[p].len();
                    if t >= k && t - k + n <= tokens.len() {
                        starts.entry(p).or_default().insert(t - k);
                    }
                }
            }
        }

        let mut candidates = Vec::new();
        let mut anchored: Vec<_> = starts.into_iter().collect();
        anchored.sort_by_key(|(p, _)| *p);
        for (p, s) in &anchored {
            matches_for_pattern(&self.patterns[*p], *p, tokens, s.iter().copied(), &mut candidates);
        }
        for &p in &self.unanchored {
            let pattern = &self.patterns[p];
            if pattern.len() <= tokens.len() {
                let starts = 0..=tokens.len() - pattern.len();
                matches_for_pattern(pattern, p, tokens, starts, &mut candidates);
            }
        }
        select_non_overlapping(candidates, tokens.len())
    }
}
