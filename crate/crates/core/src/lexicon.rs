//! Single-word and MWE lexicons.
//!
//! Single-word rows are `lemma<TAB>pos<TAB>tags`, MWE rows are
//! `mwe_template<TAB>tags`; tags are whitespace separated and their order is
//! the likelihood ranking (first is most likely).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mwe::{compile_template, MweMatch, MweMatcher, Pattern};
use crate::tagset::{parse_tag, ParsedTag};
use crate::token::InputToken;

/// Which fallback stage produced a single-word lookup hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchKind {
    LemmaPos,
    TokenPos,
    Lemma,
    LowercaseLemma,
}

/// Rewrites lexicon POS tags (first column) into the tagset used by the
/// input corpus (second column). Unlisted tags pass through unchanged.
#[derive(Clone, Debug, Default)]
pub struct PosMap(HashMap<String, String>);

impl PosMap {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `from<TAB>to` lines.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((from, to)) if !from.trim().is_empty() && !to.trim().is_empty() => {
                    map.insert(from.trim().to_owned(), to.trim().to_owned());
                }
                _ => {
                    return Err(Error::at_line(
                        origin,
                        i + 1,
                        Error::Config(format!("expected from<TAB>to, got {line:?}")),
                    ))
                }
            }
        }
        Ok(PosMap(map))
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        PosMap(
            pairs
                .into_iter()
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
                .collect(),
        )
    }

    pub fn get(&self, pos: &str) -> Option<&str> {
        self.0.get(pos).map(String::as_str)
    }

    pub fn map<'a>(&'a self, pos: &'a str) -> &'a str {
        self.get(pos).unwrap_or(pos)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleWordEntry {
    pub lemma: String,
    pub pos: String,
    pub tags: Vec<ParsedTag>,
}

fn push_unique(list: &mut Vec<ParsedTag>, tags: &[ParsedTag]) {
    for t in tags {
        let core = t.canonical_core();
        if !list.iter().any(|x| x.canonical_core() == core) {
            list.push(t.clone());
        }
    }
}

fn parse_tag_list(field: &str) -> Result<Vec<ParsedTag>> {
    let tags = field
        .split_whitespace()
        .map(parse_tag)
        .collect::<Result<Vec<_>>>()?;
    if tags.is_empty() {
        return Err(Error::MalformedTag {
            tag: String::new(),
            reason: "lexicon row has no tags".into(),
        });
    }
    Ok(tags)
}

#[derive(Clone, Debug, Default)]
pub struct SingleWordLexicon {
    by_lemma_pos: HashMap<(String, String), Vec<ParsedTag>>,
    by_lemma: HashMap<String, Vec<ParsedTag>>,
}

impl SingleWordLexicon {
    pub fn load(path: impl AsRef<Path>, pos_map: Option<&PosMap>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, pos_map)
    }

    pub fn parse(text: &str, origin: &Path, pos_map: Option<&PosMap>) -> Result<Self> {
        let mut lexicon = SingleWordLexicon::default();
        let mut seen_content = false;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if !seen_content && cols[0].trim() == "lemma" {
                seen_content = true;
                continue;
            }
            seen_content = true;
            let located = |e| Error::at_line(origin, i + 1, e);
            if cols.len() < 3 {
                return Err(located(Error::MalformedTag {
                    tag: line.to_owned(),
                    reason: "expected lemma<TAB>pos<TAB>tags".into(),
                }));
            }
            let tags = parse_tag_list(cols[2]).map_err(located)?;
            let pos = cols[1].trim();
            let pos = pos_map.map_or(pos, |m| m.map(pos));
            lexicon.insert(SingleWordEntry {
                lemma: cols[0].trim().to_owned(),
                pos: pos.to_owned(),
                tags,
            });
        }
        Ok(lexicon)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = SingleWordEntry>) -> Self {
        let mut lexicon = SingleWordLexicon::default();
        for e in entries {
            lexicon.insert(e);
        }
        lexicon
    }

    /// Duplicate `(lemma, pos)` keys append their tags, keeping the first
    /// occurrence of each canonical core.
    pub fn insert(&mut self, entry: SingleWordEntry) {
        push_unique(
            self.by_lemma_pos
                .entry((entry.lemma.clone(), entry.pos))
                .or_default(),
            &entry.tags,
        );
        push_unique(self.by_lemma.entry(entry.lemma).or_default(), &entry.tags);
    }

    pub fn len(&self) -> usize {
        self.by_lemma_pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_lemma_pos.is_empty()
    }

    pub fn get(&self, lemma: &str, pos: &str) -> Option<&[ParsedTag]> {
        self.by_lemma_pos
            .get(&(lemma.to_owned(), pos.to_owned()))
            .map(Vec::as_slice)
    }

    pub fn get_any_pos(&self, lemma: &str) -> Option<&[ParsedTag]> {
        self.by_lemma.get(lemma).map(Vec::as_slice)
    }

    /// All successful lookups in fallback order: lemma+POS, lowercased
    /// token+POS, lemma alone, lowercased lemma alone. A stage whose key is
    /// identical to an earlier stage's key is not repeated.
    pub fn lookup(&self, lemma: &str, pos: &str, token: &str) -> Vec<(MatchKind, &[ParsedTag])> {
        let mut hits = Vec::new();
        let mut tried_pos: HashSet<String> = HashSet::new();
        for (kind, key) in [
            (MatchKind::LemmaPos, lemma.to_owned()),
            (MatchKind::TokenPos, token.to_lowercase()),
        ] {
            if tried_pos.insert(key.clone()) {
                if let Some(tags) = self.get(&key, pos) {
                    hits.push((kind, tags));
                }
            }
        }
        let mut tried: HashSet<String> = HashSet::new();
        for (kind, key) in [
            (MatchKind::Lemma, lemma.to_owned()),
            (MatchKind::LowercaseLemma, lemma.to_lowercase()),
        ] {
            if tried.insert(key.clone()) {
                if let Some(tags) = self.get_any_pos(&key) {
                    hits.push((kind, tags));
                }
            }
        }
        hits
    }

    /// The first successful lookup stage, if any.
    pub fn lookup_first(&self, lemma: &str, pos: &str, token: &str) -> Option<(MatchKind, &[ParsedTag])> {
        self.lookup(lemma, pos, token).into_iter().next()
    }
}

#[derive(Clone, Debug)]
pub struct MweEntry {
    pub template: String,
    pub pattern: Pattern,
    pub tags: Vec<ParsedTag>,
}

/// MWE entries in file order, with an index for sentence matching.
#[derive(Clone, Debug, Default)]
pub struct MweLexicon {
    entries: Vec<MweEntry>,
    matcher: MweMatcher,
}

impl MweLexicon {
    pub fn load(path: impl AsRef<Path>, pos_map: Option<&PosMap>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, pos_map)
    }

    pub fn parse(text: &str, origin: &Path, pos_map: Option<&PosMap>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen_content = false;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let located = |e| Error::at_line(origin, i + 1, e);
            let (template, tags) = line.split_once('\t').unwrap_or((line, ""));
            if !seen_content && template.trim() == "mwe_template" {
                seen_content = true;
                continue;
            }
            seen_content = true;
            let mut pattern = compile_template(template.trim()).map_err(located)?;
            if let Some(m) = pos_map {
                pattern.map_pos(|p| m.get(p).map(str::to_owned));
            }
            let tags = parse_tag_list(tags).map_err(located)?;
            entries.push(MweEntry {
                template: template.trim().to_owned(),
                pattern,
                tags,
            });
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_entries(entries: Vec<MweEntry>) -> Self {
        let matcher = MweMatcher::new(entries.iter().map(|e| e.pattern.clone()).collect());
        MweLexicon { entries, matcher }
    }

    pub fn entries(&self) -> &[MweEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn match_sentence(&self, tokens: &[InputToken]) -> Vec<MweMatch> {
        self.matcher.match_sentence(tokens)
    }
}

/// Loads the MWE lexicon as a list of entries in file order.
pub fn load_mwe(path: impl AsRef<Path>) -> Result<Vec<MweEntry>> {
    Ok(MweLexicon::load(path, None)?.entries)
}

pub fn load_single_word(path: impl AsRef<Path>) -> Result<SingleWordLexicon> {
    SingleWordLexicon::load(path, None)
}
