/// A pre-tokenized word with its lemma and POS, as supplied by an external
/// tagger.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputToken {
    pub text: String,
    pub lemma: String,
    pub pos: String,
    pub index: usize,
}

impl InputToken {
    pub fn new(index: usize, text: &str, lemma: &str, pos: &str) -> Self {
        InputToken {
            text: text.to_owned(),
            lemma: lemma.to_owned(),
            pos: pos.to_owned(),
            index,
        }
    }
}

/// Builds a sentence from `(text, lemma, pos)` triples, numbering from 0.
pub fn sentence<'a, I>(triples: I) -> Vec<InputToken>
where
    I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
{
    triples
        .into_iter()
        .enumerate()
        .map(|(i, (text, lemma, pos))| InputToken::new(i, text, lemma, pos))
        .collect()
}
