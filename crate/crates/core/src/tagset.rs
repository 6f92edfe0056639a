//! USAS tag grammar and the category sense inventory.
//!
//! A raw tag such as `F2/O2[i135.2.1` or `A5.1+++` is decomposed into its
//! membership labels, affix symbols and an optional MWE marker. Evaluation
//! and training only ever look at the canonical core (`F2/O2`, `A5.1`).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The gloss inventory shipped with the crate: 232 category labels.
pub const USAS_INVENTORY_TSV: &str = include_str!("../data/usas_inventory.tsv");

/// Tag used by the rule tagger when no lexicon entry applies.
pub const UNMATCHED: &str = "Z99";

const MAX_MEMBERSHIP: usize = 4;
const MAX_LEVELS: usize = 3;

/// A single USAS category code, e.g. `O1.3` or `Z2`.
///
/// Ordering is lexicographic on the code string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CategoryLabel(String);

impl CategoryLabel {
    pub fn new(code: &str) -> Result<Self> {
        match scan_label(code) {
            Some(len) if len == code.len() => Ok(CategoryLabel(code.to_owned())),
            _ => Err(malformed(code, "not a category label")),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The discourse field letter.
    pub fn field(&self) -> char {
        self.0.as_bytes()[0] as char
    }

    pub fn is_unmatched(&self) -> bool {
        self.0 == UNMATCHED
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for CategoryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CategoryLabel::new(s)
    }
}

impl TryFrom<String> for CategoryLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        CategoryLabel::new(&s)
    }
}

impl From<CategoryLabel> for String {
    fn from(l: CategoryLabel) -> String {
        l.0
    }
}

/// Returns the byte length of the longest valid label prefix of `s`.
///
/// Grammar: `LETTER DIGITS? ('.' DIGITS)*`, with at most three numeric levels.
fn scan_label(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    if bytes.is_empty() || !bytes[0].is_ascii_uppercase() {
        return None;
    }
    let digits_at = |from: usize| bytes[from..].iter().take_while(|b| b.is_ascii_digit()).count();

    let mut pos = 1;
    let first = digits_at(pos);
    if first == 0 {
        return Some(pos);
    }
    pos += first;
    let mut levels = 1;
    while pos < bytes.len() && bytes[pos] == b'.' {
        let n = digits_at(pos + 1);
        if n == 0 {
            break;
        }
        levels += 1;
        if levels > MAX_LEVELS {
            return None;
        }
        pos += 1 + n;
    }
    Some(pos)
}

fn malformed(tag: &str, reason: &str) -> Error {
    Error::MalformedTag {
        tag: tag.to_owned(),
        reason: reason.to_owned(),
    }
}

/// Affix symbols attached to a tag: `%`, `@`, `m`, `f`, `c`, `n` as flags
/// and repeatable `+` / `-`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Affixes {
    marks: u8,
    plus: u8,
    minus: u8,
}

const MARKS: [char; 6] = ['%', '@', 'm', 'f', 'c', 'n'];

impl Affixes {
    fn push(&mut self, c: char) -> bool {
        match c {
            '+' => self.plus = self.plus.saturating_add(1),
            '-' => self.minus = self.minus.saturating_add(1),
            _ => match MARKS.iter().position(|&m| m == c) {
                Some(i) => self.marks |= 1 << i,
                None => return false,
            },
        }
        true
    }

    pub fn contains(&self, c: char) -> bool {
        match c {
            '+' => self.plus > 0,
            '-' => self.minus > 0,
            _ => MARKS
                .iter()
                .position(|&m| m == c)
                .is_some_and(|i| self.marks & (1 << i) != 0),
        }
    }

    pub fn plus(&self) -> u8 {
        self.plus
    }

    pub fn minus(&self) -> u8 {
        self.minus
    }

    pub fn is_empty(&self) -> bool {
        self.marks == 0 && self.plus == 0 && self.minus == 0
    }

    /// Flag symbols in canonical order, without the comparative counts.
    pub fn marks(&self) -> impl Iterator<Item = char> + '_ {
        MARKS
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.marks & (1 << i) != 0)
            .map(|(_, &c)| c)
    }
}

/// MWE marker `[iID.LEN.POS`, decoded structurally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MweMarker {
    pub entry_id: u32,
    pub span_length: u32,
    pub position: u32,
}

impl MweMarker {
    fn parse(tag: &str, marker: &str) -> Result<Self> {
        let body = marker
            .strip_prefix("[i")
            .ok_or_else(|| malformed(tag, "MWE marker must start with \"[i\""))?;
        let parts: Vec<&str> = body.split('.').collect();
        if parts.len() != 3 {
            return Err(malformed(tag, "MWE marker needs ID.LEN.POS"));
        }
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| malformed(tag, "MWE marker fields must be integers"))
        };
        Ok(MweMarker {
            entry_id: num(parts[0])?,
            span_length: num(parts[1])?,
            position: num(parts[2])?,
        })
    }
}

/// A USAS tag decomposed into membership, affixes and MWE marker.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParsedTag {
    membership: Vec<CategoryLabel>,
    affixes: Affixes,
    mwe_marker: Option<MweMarker>,
    raw: String,
}

impl ParsedTag {
    /// A bare single-label tag.
    pub fn from_label(label: CategoryLabel) -> Self {
        ParsedTag {
            raw: label.0.clone(),
            membership: vec![label],
            affixes: Affixes::default(),
            mwe_marker: None,
        }
    }

    /// A bare tag with the given membership and no affixes.
    pub fn from_membership(membership: Vec<CategoryLabel>) -> Result<Self> {
        if membership.is_empty() || membership.len() > MAX_MEMBERSHIP {
            return Err(malformed("", "membership must have 1 to 4 labels"));
        }
        let raw = join_labels(&membership);
        Ok(ParsedTag {
            membership,
            affixes: Affixes::default(),
            mwe_marker: None,
            raw,
        })
    }

    pub fn membership(&self) -> &[CategoryLabel] {
        &self.membership
    }

    pub fn affixes(&self) -> Affixes {
        self.affixes
    }

    pub fn mwe_marker(&self) -> Option<MweMarker> {
        self.mwe_marker
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn is_multi_membership(&self) -> bool {
        self.membership.len() > 1
    }

    /// Membership joined with `/`, affixes and marker dropped.
    pub fn canonical_core(&self) -> String {
        join_labels(&self.membership)
    }

    /// The same tag with affixes and marker removed.
    pub fn stripped(&self) -> ParsedTag {
        ParsedTag {
            raw: self.canonical_core(),
            membership: self.membership.clone(),
            affixes: Affixes::default(),
            mwe_marker: None,
        }
    }

    pub fn contains_unmatched(&self) -> bool {
        self.membership.iter().any(CategoryLabel::is_unmatched)
    }
}

impl fmt::Display for ParsedTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for ParsedTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_tag(s)
    }
}

fn join_labels(labels: &[CategoryLabel]) -> String {
    let mut out = String::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            out.push('/');
        }
        out.push_str(l.as_str());
    }
    out
}

pub fn is_punctuation_marker(raw: &str) -> bool {
    raw == "PUNC" || raw == "PUNCT"
}

/// Parses a raw USAS tag string.
pub fn parse_tag(raw: &str) -> Result<ParsedTag> {
    if raw.is_empty() {
        return Err(malformed(raw, "empty tag"));
    }
    if is_punctuation_marker(raw) {
        return Err(malformed(raw, "punctuation marker is not a semantic tag"));
    }

    let (body, mwe_marker) = match raw.find('[') {
        Some(i) => (&raw[..i], Some(MweMarker::parse(raw, &raw[i..])?)),
        None => (raw, None),
    };

    let mut membership = Vec::new();
    let mut affixes = Affixes::default();
    for component in body.split('/') {
        let len = scan_label(component)
            .ok_or_else(|| malformed(raw, "membership component is not a category label"))?;
        membership.push(CategoryLabel(component[..len].to_owned()));
        for c in component[len..].chars() {
            if !affixes.push(c) {
                return Err(malformed(raw, &format!("unknown affix {c:?}")));
            }
        }
    }
    if membership.len() > MAX_MEMBERSHIP {
        return Err(malformed(raw, "more than four membership labels"));
    }

    Ok(ParsedTag {
        membership,
        affixes,
        mwe_marker,
        raw: raw.to_owned(),
    })
}

pub fn canonical_core(tag: &ParsedTag) -> String {
    tag.canonical_core()
}

pub fn split_membership(tag: &ParsedTag) -> Vec<CategoryLabel> {
    tag.membership.clone()
}

/// One tag group attached to a corpus token: either a semantic tag or the
/// punctuation pseudo-tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TokenTag {
    Punctuation(String),
    Semantic(ParsedTag),
}

impl TokenTag {
    pub fn parse(raw: &str) -> Result<Self> {
        if is_punctuation_marker(raw) {
            Ok(TokenTag::Punctuation(raw.to_owned()))
        } else {
            parse_tag(raw).map(TokenTag::Semantic)
        }
    }

    pub fn as_semantic(&self) -> Option<&ParsedTag> {
        match self {
            TokenTag::Semantic(t) => Some(t),
            TokenTag::Punctuation(_) => None,
        }
    }
}

impl fmt::Display for TokenTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenTag::Punctuation(raw) => f.write_str(raw),
            TokenTag::Semantic(t) => t.fmt(f),
        }
    }
}

/// True for punctuation and for any tag with a `Z99` member.
pub fn is_discardable(tag: &TokenTag) -> bool {
    match tag {
        TokenTag::Punctuation(_) => true,
        TokenTag::Semantic(t) => t.contains_unmatched(),
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn gloss_tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlossEntry {
    pub label: CategoryLabel,
    pub title: String,
    pub description: Option<String>,
    pub gloss_tokens: Vec<String>,
}

impl GlossEntry {
    pub fn new(label: CategoryLabel, title: &str, description: Option<&str>) -> Result<Self> {
        let title = title.trim();
        if title.is_empty() {
            return Err(Error::MissingTitle(label.0));
        }
        let description = description
            .map(str::trim)
            .filter(|d| !d.is_empty())
            .map(str::to_owned);
        let mut gloss_tokens = gloss_tokenize(title);
        if let Some(d) = &description {
            gloss_tokens.extend(gloss_tokenize(d));
        }
        if gloss_tokens.is_empty() {
            return Err(Error::EmptyGloss(label.0));
        }
        Ok(GlossEntry {
            label,
            title: title.to_owned(),
            description,
            gloss_tokens,
        })
    }

    /// Title followed by the description, when there is one.
    pub fn gloss_text(&self) -> String {
        match &self.description {
            Some(d) => format!("{} {}", self.title, d),
            None => self.title.clone(),
        }
    }
}

/// Category labels with their glosses, in file order.
#[derive(Clone, Debug, Default)]
pub struct SenseInventory {
    entries: Vec<GlossEntry>,
    index: HashMap<CategoryLabel, usize>,
}

impl SenseInventory {
    /// The shipped 232-label USAS inventory.
    pub fn usas() -> Self {
        Self::parse_tsv(USAS_INVENTORY_TSV, Path::new("<builtin>"))
            .expect("shipped inventory is well-formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }

    /// Parses the `tag<TAB>title<TAB>description` format. `origin` is only
    /// used in error messages.
    pub fn parse_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut inventory = SenseInventory::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let tag = cols.next().unwrap_or("").trim();
            if i == 0 && tag == "tag" {
                continue;
            }
            let title = cols.next().unwrap_or("");
            let description = cols.next();
            let entry = CategoryLabel::new(tag)
                .and_then(|label| GlossEntry::new(label, title, description))
                .and_then(|entry| inventory.push(entry))
                .map_err(|e| Error::at_line(origin, lineno, e));
            entry?;
        }
        Ok(inventory)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = GlossEntry>) -> Result<Self> {
        let mut inventory = SenseInventory::default();
        for e in entries {
            inventory.push(e)?;
        }
        Ok(inventory)
    }

    fn push(&mut self, entry: GlossEntry) -> Result<()> {
        if self.index.contains_key(&entry.label) {
            return Err(Error::DuplicateLabel(entry.label.0));
        }
        self.index.insert(entry.label.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &CategoryLabel) -> Option<&GlossEntry> {
        self.index.get(label).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, label: &CategoryLabel) -> bool {
        self.index.contains_key(label)
    }

    pub fn entries(&self) -> &[GlossEntry] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &CategoryLabel> {
        self.entries.iter().map(|e| &e.label)
    }

    /// Labels a sense model may predict: everything except `Z99`.
    pub fn semantic_entries(&self) -> impl Iterator<Item = &GlossEntry> {
        self.entries.iter().filter(|e| !e.label.is_unmatched())
    }

    /// True when every membership label of `tag` is in the inventory.
    pub fn covers(&self, tag: &ParsedTag) -> bool {
        tag.membership.iter().all(|l| self.contains(l))
    }
}
