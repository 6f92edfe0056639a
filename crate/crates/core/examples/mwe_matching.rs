//! Matches MWE templates against a sentence, showing that the indexed
//! matcher agrees with a scan of every template at every position.
//!
//! cargo run --example mwe_matching

use usas_core::mwe::{compile_template, match_sentence, MweMatcher};
use usas_core::token::sentence;

fn main() -> usas_core::Result<()> {
    let templates = ["*_* Ocean_NOUN", "*_VERB over_ADV", "coffee_NOUN bean*_NOUN", "Pacific_PROPN Ocean_NOUN"];
    let patterns = templates
        .iter()
        .map(|t| compile_template(t))
        .collect::<usas_core::Result<Vec<_>>>()?;
    let matcher = MweMatcher::new(patterns.clone());

    let tokens = sentence([
        ("We", "we", "PRON"),
        ("sail", "sail", "VERB"),
        ("the", "the", "DET"),
        ("Pacific", "Pacific", "PROPN"),
        ("Ocean", "Ocean", "NOUN"),
        ("and", "and", "CCONJ"),
        ("hand", "hand", "VERB"),
        ("over", "over", "ADV"),
        ("coffee", "coffee", "NOUN"),
        ("beans", "bean", "NOUN"),
    ]);

    let indexed = matcher.match_sentence(&tokens);
    assert_eq!(indexed, match_sentence(&patterns, &tokens));
    for m in &indexed {
        let words: Vec<&str> = tokens[m.start..m.start + m.length].iter().map(|t| t.text.as_str()).collect();
        println!("{:<26} <- {}", words.join(" "), templates[m.entry]);
    }
    Ok(())
}
