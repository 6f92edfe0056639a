//! Vertical corpus format.
//!
//! One token per line as `token<TAB>lemma<TAB>pos[<TAB>tags]`. A blank line
//! ends a sentence and `#doc id=NAME` starts a document; other `#` lines
//! are ignored. The tags column holds whitespace-separated tag groups
//! (`Z1mf Z3c`); the braced form `{Z1mf}{Z3c}` is also accepted on input.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tagset::TokenTag;
use crate::token::InputToken;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusToken {
    pub text: String,
    pub lemma: String,
    pub pos: String,
    /// `None` when the line has no tags column.
    pub tags: Option<Vec<TokenTag>>,
    /// 1-based source line, 0 for tokens built in memory.
    pub line: usize,
}

impl CorpusToken {
    pub fn new(text: &str, lemma: &str, pos: &str, tags: Option<Vec<TokenTag>>) -> Self {
        CorpusToken {
            text: text.to_owned(),
            lemma: lemma.to_owned(),
            pos: pos.to_owned(),
            tags,
            line: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<CorpusToken>,
}

impl Sentence {
    pub fn input_tokens(&self) -> Vec<InputToken> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| InputToken::new(i, &t.text, &t.lemma, &t.pos))
            .collect()
    }

    pub fn words(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

/// Id given to sentences that appear before any `#doc` line.
pub const DEFAULT_DOC_ID: &str = "doc";

impl Corpus {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &CorpusToken> {
        self.sentences().flat_map(|s| s.tokens.iter())
    }

    pub fn token_count(&self) -> usize {
        self.tokens().count()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().count()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences().next().is_none()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut documents: Vec<Document> = Vec::new();
        let mut current = Sentence::default();

        fn flush(documents: &mut Vec<Document>, current: &mut Sentence) {
            if current.tokens.is_empty() {
                return;
            }
            if documents.is_empty() {
                documents.push(Document {
                    id: DEFAULT_DOC_ID.to_owned(),
                    sentences: Vec::new(),
                });
            }
            let s = std::mem::take(current);
            documents.last_mut().unwrap().sentences.push(s);
        }

        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                flush(&mut documents, &mut current);
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some(rest) = meta.trim_start().strip_prefix("doc") {
                    flush(&mut documents, &mut current);
                    let id = parse_doc_id(rest).ok_or_else(|| {
                        Error::at_line(origin, lineno, Error::Config("`#doc` line without `id=`".into()))
                    })?;
                    documents.push(Document {
                        id,
                        sentences: Vec::new(),
                    });
                }
                continue;
            }
            let token = parse_token_line(line).map_err(|e| Error::at_line(origin, lineno, e))?;
            current.tokens.push(CorpusToken { line: lineno, ..token });
        }
        flush(&mut documents, &mut current);
        documents.retain(|d| !d.sentences.is_empty());
        Ok(Corpus { documents })
    }

    pub fn to_vertical(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            let _ = writeln!(out, "#doc id={}", doc.id);
            for s in &doc.sentences {
                for t in &s.tokens {
                    out.push_str(&format_token(t));
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_vertical()).map_err(|e| Error::io(path, e))
    }
}

fn parse_doc_id(rest: &str) -> Option<String> {
    rest.split_whitespace()
        .find_map(|kv| kv.strip_prefix("id="))
        .filter(|id| !id.is_empty())
        .map(str::to_owned)
}

fn parse_token_line(line: &str) -> Result<CorpusToken> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 3 || cols.len() > 4 {
        return Err(Error::Config(format!(
            "expected 3 or 4 tab-separated columns, found {}",
            cols.len()
        )));
    }
    for (name, c) in ["token", "lemma", "pos"].iter().zip(&cols) {
        if c.is_empty() {
            return Err(Error::Config(format!("empty {name} column")));
        }
    }
    let tags = match cols.get(3) {
        Some(raw) => Some(parse_tag_groups(raw)?),
        None => None,
    };
    Ok(CorpusToken::new(cols[0], cols[1], cols[2], tags))
}

/// Splits a tags column into groups, accepting both `A B` and `{A}{B}`.
pub fn parse_tag_groups(raw: &str) -> Result<Vec<TokenTag>> {
    let mut groups = Vec::new();
    for word in raw.split_whitespace() {
        if word.starts_with('{') {
            let mut rest = word;
            while let Some(body) = rest.strip_prefix('{') {
                let end = body
                    .find('}')
                    .ok_or_else(|| Error::Config(format!("unclosed brace in {word:?}")))?;
                groups.push(TokenTag::parse(&body[..end])?);
                rest = &body[end + 1..];
            }
            if !rest.is_empty() {
                return Err(Error::Config(format!("text after braces in {word:?}")));
            }
        } else {
            groups.push(TokenTag::parse(word)?);
        }
    }
    if groups.is_empty() {
        return Err(Error::Config("empty tags column".into()));
    }
    Ok(groups)
}

pub fn format_token(t: &CorpusToken) -> String {
    let mut line = format!("{}\t{}\t{}", t.text, t.lemma, t.pos);
    if let Some(tags) = &t.tags {
        line.push('\t');
        let groups: Vec<String> = tags.iter().map(ToString::to_string).collect();
        line.push_str(&groups.join(" "));
    }
    line
}
